#include "doctest.h"
#include "sastl/monitor.hpp"
#include "support/fixture.hpp"
#include "support/oracle.hpp"
#include "support/random.hpp"

using namespace sastl;
using fixture::kAll;
using fixture::Line;

namespace {
Verdict check_b(const Line& w, const Formula& f, std::size_t t = 0, std::uint32_t l = 0, MonitorOptions o = {}) {
  return monitor_b(f, *w.signal, t, Loc{l}, w.index, w.labeling, std::move(o));
}
}  // namespace

TEST_CASE("atoms and the undefined-value rule") {
  Line w(1, 1);
  w.snapshot(0, {3.0});
  CHECK(check_b(w, atom("x", Cmp::Less, 5)) == Verdict{true, false});
  CHECK(check_b(w, atom("x", Cmp::Greater, 5)) == Verdict{false, false});
  w.snapshot(0, {std::nullopt});
  CHECK(check_b(w, atom("x", Cmp::Less, 5)) == Verdict{true, true});
  CHECK(check_b(w, atom("x", Cmp::Greater, 5)) == Verdict{true, true});
  // The negation of a vacuous truth is a plain falsehood.
  CHECK(check_b(w, negation(atom("x", Cmp::Less, 5))) == Verdict{false, false});
  CHECK(check_b(w, negation(negation(atom("x", Cmp::Less, 5)))) == Verdict{true, true});
}

TEST_CASE("counting over a {F, F, T} pattern") {
  Line w(3, 1);
  w.snapshot(0, {-4.0, -3.0, 2.0});
  const auto phi = atom("x", Cmp::Greater, 0);
  CHECK(check_b(w, count(SpatialOp::Max, kAll, phi, Cmp::Greater, 0)).satisfied);
  CHECK_FALSE(check_b(w, count(SpatialOp::Min, kAll, phi, Cmp::Greater, 0)).satisfied);
  CHECK_FALSE(check_b(w, count(SpatialOp::Sum, kAll, phi, Cmp::Greater, 1)).satisfied);
  CHECK(check_b(w, count(SpatialOp::Avg, kAll, phi, Cmp::Greater, 0.2)).satisfied);
  CHECK(check_b(w, count(SpatialOp::Sum, kAll, phi, Cmp::GreaterEqual, 1)).satisfied);
  CHECK(check_b(w, count(SpatialOp::Avg, kAll, phi, Cmp::Less, 0.5)).satisfied);
}

TEST_CASE("counting over an empty domain is vacuously satisfied") {
  Line w(3, 1);
  w.snapshot(0, {1.0, 1.0, 1.0});
  const SpatialDomain schools{0, kInf, psi_prop("School")};
  const auto v = check_b(w, count(SpatialOp::Min, schools, atom("x", Cmp::Greater, 5), Cmp::Greater, 0));
  CHECK(v == Verdict{true, true});
  CHECK(check_b(w, everywhere(schools, atom("x", Cmp::Greater, 5))) == Verdict{true, true});
}

TEST_CASE("aggregates") {
  Line w(2, 1);
  w.snapshot(0, {51.0, 40.0});
  CHECK(check_b(w, aggregate(SpatialOp::Avg, kAll, "x", Cmp::Less, 50)) == Verdict{true, false});
  CHECK_FALSE(check_b(w, aggregate(SpatialOp::Max, kAll, "x", Cmp::Less, 51)).satisfied);
  CHECK(check_b(w, aggregate(SpatialOp::Sum, kAll, "x", Cmp::GreaterEqual, 91)).satisfied);
  CHECK(check_b(w, aggregate(SpatialOp::Min, {1, 1, psi_true()}, "x", Cmp::Less, 41)).satisfied);

  Line one(1, 1);
  one.snapshot(0, {80.0});
  CHECK_FALSE(check_b(one, aggregate(SpatialOp::Max, kAll, "x", Cmp::Less, 80)).satisfied);

  // Undefined values drop out of alpha; nothing left means vacuous.
  one.snapshot(0, {std::nullopt});
  CHECK(check_b(one, aggregate(SpatialOp::Max, kAll, "x", Cmp::Greater, 1000)) == Verdict{true, true});
}

TEST_CASE("until") {
  Line w(1, 3);
  w.series(0, {1.0, 2.0, 11.0});
  const auto pos = atom("x", Cmp::Greater, 0), big = atom("x", Cmp::Greater, 10);
  CHECK(check_b(w, until({0, 2}, pos, big)).satisfied);
  CHECK_FALSE(check_b(w, until({0, 1}, pos, big)).satisfied);
  // The witness must lie inside the closed interval.
  CHECK(check_b(w, until({2, 2}, pos, big)).satisfied);
  CHECK(check_b(w, until({0, 0}, pos, pos)).satisfied);
  // lhs must hold up to and including the witness.
  CHECK_FALSE(check_b(w, until({0, 2}, atom("x", Cmp::Less, 5), big)).satisfied);
  CHECK(check_b(w, eventually({0, 2}, big)).satisfied);
  CHECK_FALSE(check_b(w, always({0, 2}, atom("x", Cmp::Less, 5))).satisfied);
  CHECK(check_b(w, always({0, 1}, atom("x", Cmp::Less, 5))).satisfied);
}

TEST_CASE("a horizon past the trace raises IncompleteTraceError") {
  Line w(1, 2);
  w.series(0, {1.0, 1.0});
  const auto f = always({0, 3}, atom("x", Cmp::Greater, 0));
  CHECK_THROWS_AS(check_b(w, f), IncompleteTraceError);
  try {
    check_b(w, f);
  } catch (const IncompleteTraceError& e) {
    CHECK(e.first_missing_sample() == 2u);
  }
  CHECK_NOTHROW(check_b(w, always({0, 1}, atom("x", Cmp::Greater, 0))));
}

TEST_CASE("conjunction short-circuits the costlier side") {
  Line w(8, 1);
  w.snapshot(0, {1, 2, 3, 4, 5, 6, 7, 8});
  const auto cheap_false = atom("x", Cmp::Greater, 100);
  const auto costly = aggregate(SpatialOp::Avg, kAll, "x", Cmp::Greater, 0);

  Monitor m(*w.signal, w.index, w.labeling);
  CHECK_FALSE(m.boolean(conjunction(costly, cheap_false), 0, Loc{0}).satisfied);
  CHECK(m.counters().descan_calls == 0u);
  CHECK(m.counters().skipped_conjuncts == 1u);

  MonitorOptions naive;
  naive.reorder = false;
  Monitor plain(*w.signal, w.index, w.labeling, naive);
  CHECK_FALSE(plain.boolean(conjunction(costly, cheap_false), 0, Loc{0}).satisfied);
  CHECK(plain.counters().descan_calls == 1u);
  CHECK(plain.counters().skipped_conjuncts == 0u);
}

TEST_CASE("equal costs evaluate the left conjunct first") {
  Line w(1, 1);
  w.snapshot(0, {1.0});
  Monitor m(*w.signal, w.index, w.labeling);
  CHECK_FALSE(m.boolean(conjunction(atom("x", Cmp::Greater, 5), atom("x", Cmp::Greater, 0)), 0, Loc{0}).satisfied);
  CHECK(m.counters().atom_evals == 1u);
  m.reset_counters();
  CHECK_FALSE(m.boolean(conjunction(atom("x", Cmp::Greater, 0), atom("x", Cmp::Greater, 5)), 0, Loc{0}).satisfied);
  CHECK(m.counters().atom_evals == 2u);
}

TEST_CASE("conjunction vacuity") {
  Line w(1, 1);
  w.snapshot(0, {std::nullopt});
  const auto vac = atom("x", Cmp::Greater, 0);
  Line v(1, 1, {"x", "y"});
  v.snapshot(0, {std::nullopt});
  v.snapshot(0, {1.0}, 1);
  CHECK(check_b(w, conjunction(vac, vac)) == Verdict{true, true});
  CHECK(check_b(v, conjunction(vac, atom("y", Cmp::Greater, 0))) == Verdict{true, false});
  CHECK(check_b(v, conjunction(vac, atom("y", Cmp::Greater, 5))) == Verdict{false, false});
}

TEST_CASE("cost model") {
  Line w(7, 1);
  Monitor m(*w.signal, w.index, w.labeling);
  const auto a = atom("x", Cmp::Greater, 0);
  // The memo is keyed by node address, so every formula is kept alive here.
  const std::vector<Formula> fs = {
      a,
      negation(a),
      conjunction(a, a),
      until({0, 1}, a, a),
      aggregate(SpatialOp::Avg, kAll, "x", Cmp::Less, 1),
      count(SpatialOp::Avg, kAll, a, Cmp::Greater, 0.5),
      count(SpatialOp::Avg, {0, 1, psi_true()}, a, Cmp::Greater, 0.5),
      aggregate(SpatialOp::Avg, {0, kInf, psi_prop("School")}, "x", Cmp::Less, 1),
  };
  CHECK(m.cost(*fs[0], Loc{0}) == 1.0);
  CHECK(m.cost(*fs[1], Loc{0}) == 2.0);
  CHECK(m.cost(*fs[2], Loc{0}) == 2.0);
  CHECK(m.cost(*fs[3], Loc{0}) == 2.0);
  CHECK(m.cost(*fs[4], Loc{3}) == 7.0);
  CHECK(m.cost(*fs[5], Loc{3}) == 7.0);
  CHECK(m.cost(*fs[6], Loc{0}) == 2.0);
  // An empty domain still costs one step: the scan itself.
  CHECK(m.cost(*fs[7], Loc{0}) == 1.0);
}

TEST_CASE("selection helpers") {
  const std::vector<double> s = {-4, -3, 2};
  CHECK(kth_largest(s, 1) == 2.0);
  CHECK(kth_largest(s, 2) == -3.0);
  CHECK(kth_largest(s, 3) == -4.0);
  const std::vector<double> five = {5};
  CHECK(kth_largest(five, 2) == -kInf);

  CHECK(required_count(SpatialOp::Max, Cmp::Greater, 0, 3) == 1u);
  CHECK(required_count(SpatialOp::Min, Cmp::Greater, 0, 3) == 3u);
  CHECK(required_count(SpatialOp::Sum, Cmp::Greater, 1, 3) == 2u);
  CHECK(required_count(SpatialOp::Avg, Cmp::Greater, 0.2, 3) == 1u);
  CHECK(required_count(SpatialOp::Avg, Cmp::GreaterEqual, 0, 3) == 0u);
  CHECK_FALSE(required_count(SpatialOp::Sum, Cmp::Greater, 3, 3).has_value());
  CHECK(counting_value(SpatialOp::Avg, 1, 4) == 0.25);
  CHECK(counting_value(SpatialOp::Min, 3, 4) == 0.0);
}

TEST_CASE("monitor agrees with the oracle on random instances") {
  gen::Rng rng(21);
  for (int i = 0; i < 300; ++i) {
    auto w = gen::random_world(rng);
    const oracle::Oracle o(*w.signal, w.graph, w.labeling);
    const auto f = gen::random_formula(rng, {3, true, w.graph.size(), 2.0, false});
    const auto h = horizon_samples(f, 1.0);
    if (h >= w.signal->sample_count()) continue;
    const std::size_t t = std::uniform_int_distribution<std::size_t>(0, w.signal->sample_count() - 1 - h)(rng);
    const Loc l{static_cast<std::uint32_t>(rng() % w.graph.size())};
    const auto got = monitor_b(f, *w.signal, t, l, w.index, w.labeling);
    const auto want = o.boolean(f, t, l);
    CHECK(got.satisfied == want.value);
    CHECK(got.vacuous == (want.value && want.vacuous));
  }
}

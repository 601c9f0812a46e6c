#include "sastl/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>

namespace sastl {

CounterSnapshot CounterSnapshot::operator-(const CounterSnapshot& o) const {
  return {atom_evals - o.atom_evals,           descan_calls - o.descan_calls,
          spatial_tasks - o.spatial_tasks,     parallel_fanouts - o.parallel_fanouts,
          sequential_spatial - o.sequential_spatial, skipped_conjuncts - o.skipped_conjuncts};
}

double kth_largest(std::span<const double> values, std::size_t k) {
  if (k == 0 || k > values.size()) return -kInf;
  std::vector<double> s(values.begin(), values.end());
  std::nth_element(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(k - 1), s.end(), std::greater<>{});
  return s[k - 1];
}

double counting_value(SpatialOp op, std::size_t k, std::size_t n) {
  switch (op) {
    case SpatialOp::Max: return k > 0 ? 1.0 : 0.0;
    case SpatialOp::Min: return k == n ? 1.0 : 0.0;
    case SpatialOp::Sum: return static_cast<double>(k);
    case SpatialOp::Avg: return static_cast<double>(k) / static_cast<double>(n);
  }
  return 0.0;
}

std::optional<std::size_t> required_count(SpatialOp op, Cmp cmp, double c, std::size_t n) {
  // counting_value is non-decreasing in k, so the satisfying k form a suffix.
  for (std::size_t k = 0; k <= n; ++k)
    if (compare(counting_value(op, k, n), cmp, c)) return k;
  return std::nullopt;
}

namespace {

/// Comparison whose truth set is the complement of `cmp`.
Cmp complement(Cmp cmp) {
  switch (cmp) {
    case Cmp::Less: return Cmp::GreaterEqual;
    case Cmp::LessEqual: return Cmp::Greater;
    case Cmp::Greater: return Cmp::LessEqual;
    case Cmp::GreaterEqual: return Cmp::Less;
  }
  return cmp;
}

double fold(SpatialOp op, std::span<const double> values) {
  double v = op == SpatialOp::Min ? kInf : op == SpatialOp::Max ? -kInf : 0.0;
  for (double x : values) {
    switch (op) {
      case SpatialOp::Max: v = std::max(v, x); break;
      case SpatialOp::Min: v = std::min(v, x); break;
      case SpatialOp::Sum:
      case SpatialOp::Avg: v += x; break;
    }
  }
  if (op == SpatialOp::Avg) v /= static_cast<double>(values.size());
  return v;
}

/// Robustness of "at least k of S" for the lower-bound comparisons.
double counting_robustness(SpatialOp op, Cmp cmp, double c, std::span<const double> s) {
  const auto k = required_count(op, cmp, c, s.size());
  if (!k) return -kInf;
  if (*k == 0) return kInf;
  return kth_largest(s, *k);
}

}  // namespace

// ---------------------------------------------------------------------------

Monitor::Monitor(const SpatioTemporalSignal& signal, const DistanceIndex& index, const Labeling& labeling,
                 MonitorOptions options)
    : signal_(signal), index_(index), labeling_(labeling), options_(std::move(options)) {
  check(options_.parallel);
  if (index_.size() != signal_.locations().size())
    throw std::invalid_argument("distance index and signal disagree on the number of locations");
  if (options_.parallel.worker_count > 1 && !options_.pool)
    options_.pool = std::make_shared<WorkerPool>(options_.parallel.worker_count);
}

CounterSnapshot Monitor::counters() const {
  return {counters_.atom_evals.load(),       counters_.descan_calls.load(),
          counters_.spatial_tasks.load(),    counters_.parallel_fanouts.load(),
          counters_.sequential_spatial.load(), counters_.skipped_conjuncts.load()};
}

void Monitor::reset_counters() {
  counters_.atom_evals = 0;
  counters_.descan_calls = 0;
  counters_.spatial_tasks = 0;
  counters_.parallel_fanouts = 0;
  counters_.sequential_spatial = 0;
  counters_.skipped_conjuncts = 0;
}

void Monitor::check_window(std::size_t t, std::size_t last) const {
  (void)t;
  if (last >= signal_.sample_count()) throw IncompleteTraceError(signal_.sample_count(), signal_.sample_count());
}

namespace {

void check_entry(const Formula& f, const SpatioTemporalSignal& signal, const DistanceIndex& index, std::size_t t,
                 Loc l) {
  if (!f) throw std::invalid_argument("null formula");
  if (!is_core(f)) throw std::invalid_argument("formula must be desugared before monitoring");
  if (t >= signal.sample_count()) throw LookupError("anchor sample " + std::to_string(t) + " outside the trace");
  if (l.value >= index.size()) throw LookupError("anchor location out of range");
  const auto need = t + horizon_samples(f, signal.grid().step);
  if (need >= signal.sample_count()) throw IncompleteTraceError(signal.sample_count(), signal.sample_count());
}

}  // namespace

void Monitor::retain(const Formula& f) {
  std::lock_guard lk(roots_mu_);
  roots_.try_emplace(f.get(), f);
}

Verdict Monitor::boolean(const Formula& f, std::size_t t, Loc l) {
  check_entry(f, signal_, index_, t, l);
  retain(f);
  const auto o = eval_b(*f, t, l);
  return {o.value, o.value && o.vacuous};
}

double Monitor::robustness(const Formula& f, std::size_t t, Loc l) {
  check_entry(f, signal_, index_, t, l);
  retain(f);
  return eval_q(*f, t, l);
}

std::size_t Monitor::variable(const Node& n) const {
  const auto x = signal_.variable_index(n.variable);
  if (!x) throw LookupError("unknown variable '" + n.variable + "'");
  return *x;
}

const std::vector<char>& Monitor::psi_mask(const Psi& psi) {
  {
    std::shared_lock lk(psi_mu_);
    if (auto it = psi_masks_.find(psi.get()); it != psi_masks_.end()) return it->second;
  }
  std::vector<char> mask(index_.size());
  for (std::uint32_t i = 0; i < mask.size(); ++i) mask[i] = eval_psi(labeling_, Loc{i}, psi) ? 1 : 0;
  std::unique_lock lk(psi_mu_);
  return psi_masks_.try_emplace(psi.get(), std::move(mask)).first->second;
}

std::vector<Loc> Monitor::scan(Loc l, const SpatialDomain& d) {
  counters_.descan_calls.fetch_add(1, std::memory_order_relaxed);
  const auto& mask = psi_mask(d.psi);
  std::vector<Loc> out;
  for (const auto& n : index_.band(l, d.d1, d.d2))
    if (mask[n.location.value]) out.push_back(n.location);
  return out;
}

bool Monitor::fan_out(std::size_t tasks) {
  return options_.pool && options_.parallel.worker_count > 1 && tasks >= options_.parallel.parallel_threshold &&
         !WorkerPool::in_worker();
}

template <typename Fn>
void Monitor::for_each_location(std::span<const Loc> locs, Fn&& fn) {
  // Both paths report the lowest-index failure, tagged with its location.
  auto rethrow = [&](std::exception_ptr err, std::size_t i) {
    try {
      std::rethrow_exception(err);
    } catch (const EvaluationError&) {
      throw;
    } catch (const std::exception& e) {
      const auto& where = signal_.locations()[locs[i].value];
      throw EvaluationError("evaluation failed at location '" + where + "': " + e.what(), where);
    }
  };
  if (!fan_out(locs.size())) {
    counters_.sequential_spatial.fetch_add(1, std::memory_order_relaxed);
    for (std::size_t i = 0; i < locs.size(); ++i) {
      try {
        fn(i, std::size_t{0});
      } catch (...) {
        rethrow(std::current_exception(), i);
      }
    }
    return;
  }
  counters_.parallel_fanouts.fetch_add(1, std::memory_order_relaxed);
  std::mutex err_mu;
  std::size_t err_index = locs.size();
  std::exception_ptr err;
  options_.pool->run(locs.size(), [&](std::size_t i, std::size_t worker) {
    try {
      fn(i, worker);
    } catch (...) {
      std::lock_guard lk(err_mu);
      if (i < err_index) {
        err_index = i;
        err = std::current_exception();
      }
    }
  });
  if (err) rethrow(err, err_index);
}

// --- Boolean ----------------------------------------------------------------------

Monitor::Outcome Monitor::eval_b(const Node& n, std::size_t t, Loc l) {
  switch (n.kind) {
    case Kind::True: return {true, true};
    case Kind::Atom: {
      counters_.atom_evals.fetch_add(1, std::memory_order_relaxed);
      const double v = signal_.raw(t, l, variable(n));
      if (std::isnan(v)) return {true, true};
      return {compare(v, n.cmp, n.threshold), false};
    }
    case Kind::Not: {
      const auto o = eval_b(*n.lhs, t, l);
      return {!o.value, o.vacuous};
    }
    case Kind::And: return and_outcome(n, t, l);
    case Kind::Until: return until_outcome(n, t, l);
    case Kind::Aggregate: return aggregate_outcome(n, t, l);
    case Kind::Count: return counting_outcome(n, t, l);
    default: throw std::invalid_argument("formula must be desugared before monitoring");
  }
}

Monitor::Outcome Monitor::and_outcome(const Node& n, std::size_t t, Loc l) {
  const Node* first = n.lhs.get();
  const Node* second = n.rhs.get();
  if (options_.reorder && cost(*n.rhs, l) < cost(*n.lhs, l)) std::swap(first, second);
  const auto a = eval_b(*first, t, l);
  if (!a.value) {
    counters_.skipped_conjuncts.fetch_add(1, std::memory_order_relaxed);
    // A false conjunction is never reported as vacuous: which conjunct decided
    // it depends on evaluation order.
    return {false, false};
  }
  const auto b = eval_b(*second, t, l);
  return {b.value, b.value && a.vacuous && b.vacuous};
}

Monitor::Outcome Monitor::until_outcome(const Node& n, std::size_t t, Loc l) {
  const auto w = sample_window(n.interval, signal_.grid().step);
  if (w.empty()) return {false, false};
  check_window(t, t + w.last);
  bool vacuous = true;
  for (std::size_t s = t; s <= t + w.last; ++s) {
    const bool in_window = s >= t + w.first;
    bool target = false;
    if (in_window) {
      const auto o2 = eval_b(*n.rhs, s, l);
      target = o2.value;
      vacuous = vacuous && o2.vacuous;
    }
    const auto o1 = eval_b(*n.lhs, s, l);
    vacuous = vacuous && o1.vacuous;
    if (target && o1.value) return {true, vacuous};
    if (!o1.value) return {false, vacuous};
  }
  return {false, vacuous};
}

std::vector<double> Monitor::alpha(const Node& n, std::size_t t, Loc l) {
  const auto x = variable(n);
  const auto locs = scan(l, n.domain);
  std::vector<double> raw(locs.size());
  for_each_location(locs, [&](std::size_t i, std::size_t) { raw[i] = signal_.raw(t, locs[i], x); });
  std::erase_if(raw, [](double v) { return std::isnan(v); });
  return raw;
}

Monitor::Outcome Monitor::aggregate_outcome(const Node& n, std::size_t t, Loc l) {
  const auto values = alpha(n, t, l);
  if (values.empty()) return {true, true};
  return {compare(fold(n.op, values), n.cmp, n.threshold), false};
}

Monitor::Outcome Monitor::counting_outcome(const Node& n, std::size_t t, Loc l) {
  const auto locs = scan(l, n.domain);
  if (locs.empty()) return {true, true};
  counters_.spatial_tasks.fetch_add(locs.size(), std::memory_order_relaxed);

  // Worker-side fold: per-lane satisfied count and vacuity.
  struct Partial {
    std::size_t satisfied = 0;
    bool vacuous = true;
  };
  std::vector<Partial> lanes(options_.pool ? options_.pool->size() : 1);
  for_each_location(locs, [&](std::size_t i, std::size_t worker) {
    const auto o = eval_b(*n.lhs, t, locs[i]);
    auto& p = lanes[worker];
    p.satisfied += o.value ? 1 : 0;
    p.vacuous = p.vacuous && o.vacuous;
  });
  Partial total;
  for (const auto& p : lanes) {
    total.satisfied += p.satisfied;
    total.vacuous = total.vacuous && p.vacuous;
  }
  const bool value = compare(counting_value(n.op, total.satisfied, locs.size()), n.cmp, n.threshold);
  return {value, total.vacuous};
}

Verdict Monitor::until_b(const Node& n, std::size_t t, Loc l) {
  const auto o = until_outcome(n, t, l);
  return {o.value, o.value && o.vacuous};
}

Verdict Monitor::aggregate_b(const Node& n, std::size_t t, Loc l) {
  const auto o = aggregate_outcome(n, t, l);
  return {o.value, o.value && o.vacuous};
}

Verdict Monitor::counting_b(const Node& n, std::size_t t, Loc l) {
  const auto o = counting_outcome(n, t, l);
  return {o.value, o.value && o.vacuous};
}

Verdict Monitor::and_reordered(const Node& n, std::size_t t, Loc l) {
  const auto o = and_outcome(n, t, l);
  return {o.value, o.value && o.vacuous};
}

// --- quantitative -------------------------------------------------------------------

double Monitor::eval_q(const Node& n, std::size_t t, Loc l) {
  switch (n.kind) {
    case Kind::True: return kInf;
    case Kind::Atom: {
      counters_.atom_evals.fetch_add(1, std::memory_order_relaxed);
      const double v = signal_.raw(t, l, variable(n));
      if (std::isnan(v)) return kInf;
      return is_upper_bound(n.cmp) ? n.threshold - v : v - n.threshold;
    }
    case Kind::Not: return -eval_q(*n.lhs, t, l);
    case Kind::And: return std::min(eval_q(*n.lhs, t, l), eval_q(*n.rhs, t, l));
    case Kind::Until: return until_q(n, t, l);
    case Kind::Aggregate: return aggregate_q(n, t, l);
    case Kind::Count: return counting_q(n, t, l);
    default: throw std::invalid_argument("formula must be desugared before monitoring");
  }
}

double Monitor::until_q(const Node& n, std::size_t t, Loc l) {
  const auto w = sample_window(n.interval, signal_.grid().step);
  if (w.empty()) return -kInf;
  check_window(t, t + w.last);
  double best = -kInf;
  double prefix = kInf;  // inf of lhs over [t, s]
  for (std::size_t s = t; s <= t + w.last; ++s) {
    prefix = std::min(prefix, eval_q(*n.lhs, s, l));
    if (s >= t + w.first) best = std::max(best, std::min(eval_q(*n.rhs, s, l), prefix));
    // Every later candidate is bounded by the running prefix.
    if (prefix <= best) break;
  }
  return best;
}

double Monitor::aggregate_q(const Node& n, std::size_t t, Loc l) {
  const auto values = alpha(n, t, l);
  if (values.empty()) return kInf;
  const double v = fold(n.op, values);
  const double r = n.op == SpatialOp::Sum ? (v - n.threshold) / static_cast<double>(values.size()) : v - n.threshold;
  return is_upper_bound(n.cmp) ? -r : r;
}

double Monitor::counting_q(const Node& n, std::size_t t, Loc l) {
  const auto locs = scan(l, n.domain);
  if (locs.empty()) return kInf;
  counters_.spatial_tasks.fetch_add(locs.size(), std::memory_order_relaxed);

  const bool negate = is_upper_bound(n.cmp);
  const Cmp lower = negate ? complement(n.cmp) : n.cmp;
  const auto k = required_count(n.op, lower, n.threshold, locs.size());
  double value = 0.0;

  if (n.op == SpatialOp::Max || n.op == SpatialOp::Min) {
    // min/max commute, so workers fold locally and the reducer combines lanes.
    const bool is_max = n.op == SpatialOp::Max;
    std::vector<double> lanes(options_.pool ? options_.pool->size() : 1, is_max ? -kInf : kInf);
    for_each_location(locs, [&](std::size_t i, std::size_t worker) {
      const double r = eval_q(*n.lhs, t, locs[i]);
      lanes[worker] = is_max ? std::max(lanes[worker], r) : std::min(lanes[worker], r);
    });
    const double folded = is_max ? *std::max_element(lanes.begin(), lanes.end())
                                 : *std::min_element(lanes.begin(), lanes.end());
    if (!k)
      value = -kInf;
    else if (*k == 0)
      value = kInf;
    else
      value = folded;  // k is 1 for max and |L| for min
  } else {
    // Selection needs every per-location value; reduce centrally.
    std::vector<double> rho(locs.size());
    for_each_location(locs, [&](std::size_t i, std::size_t) { rho[i] = eval_q(*n.lhs, t, locs[i]); });
    value = counting_robustness(n.op, lower, n.threshold, rho);
  }
  return negate ? -value : value;
}

// --- cost model -----------------------------------------------------------------------

double Monitor::cost(const Node& n, Loc l) {
  const auto key = std::make_pair(&n, l.value);
  {
    std::shared_lock lk(cost_mu_);
    if (auto it = cost_memo_.find(key); it != cost_memo_.end()) return it->second;
  }
  auto domain_size = [&](const SpatialDomain& d) {
    const auto& mask = psi_mask(d.psi);
    double count = 0;
    for (const auto& nb : index_.band(l, d.d1, d.d2)) count += mask[nb.location.value] ? 1 : 0;
    return count;
  };
  double c = 1.0;
  switch (n.kind) {
    case Kind::True:
    case Kind::Atom: c = 1.0; break;
    case Kind::Not: c = 1.0 + cost(*n.lhs, l); break;
    case Kind::And:
    case Kind::Or:
    case Kind::Until: c = cost(*n.lhs, l) + cost(*n.rhs, l); break;
    case Kind::Always:
    case Kind::Eventually: c = 1.0 + cost(*n.lhs, l); break;
    case Kind::Aggregate: c = domain_size(n.domain); break;
    case Kind::Count:
    case Kind::Everywhere:
    case Kind::Somewhere: c = domain_size(n.domain) * cost(*n.lhs, l); break;
  }
  c = std::max(1.0, c);
  std::unique_lock lk(cost_mu_);
  cost_memo_.try_emplace(key, c);
  return c;
}

// --- one-shot helpers ---------------------------------------------------------------

Verdict monitor_b(const Formula& f, const SpatioTemporalSignal& signal, std::size_t t, Loc l,
                  const DistanceIndex& index, const Labeling& labeling, MonitorOptions options) {
  Monitor m(signal, index, labeling, std::move(options));
  return m.boolean(desugar(f), t, l);
}

double monitor_q(const Formula& f, const SpatioTemporalSignal& signal, std::size_t t, Loc l,
                 const DistanceIndex& index, const Labeling& labeling, MonitorOptions options) {
  Monitor m(signal, index, labeling, std::move(options));
  return m.robustness(desugar(f), t, l);
}

namespace {

MonitorOptions parallel_options(const ParallelConfig& cfg) {
  MonitorOptions o;
  o.parallel = cfg;
  return o;
}

void expect_kind(const Node& n, Kind k) {
  if (n.kind != k) throw std::invalid_argument("expected a " + std::string(to_string(k)) + " node");
}

}  // namespace

Verdict counting_parallel_b(const Node& node, const SpatioTemporalSignal& signal, std::size_t t, Loc l,
                            const DistanceIndex& index, const Labeling& labeling, const ParallelConfig& cfg) {
  expect_kind(node, Kind::Count);
  Monitor m(signal, index, labeling, parallel_options(cfg));
  return m.counting_b(node, t, l);
}

double counting_parallel_q(const Node& node, const SpatioTemporalSignal& signal, std::size_t t, Loc l,
                           const DistanceIndex& index, const Labeling& labeling, const ParallelConfig& cfg) {
  expect_kind(node, Kind::Count);
  Monitor m(signal, index, labeling, parallel_options(cfg));
  return m.counting_q(node, t, l);
}

Verdict aggregate_parallel_b(const Node& node, const SpatioTemporalSignal& signal, std::size_t t, Loc l,
                             const DistanceIndex& index, const Labeling& labeling, const ParallelConfig& cfg) {
  expect_kind(node, Kind::Aggregate);
  Monitor m(signal, index, labeling, parallel_options(cfg));
  return m.aggregate_b(node, t, l);
}

double aggregate_parallel_q(const Node& node, const SpatioTemporalSignal& signal, std::size_t t, Loc l,
                            const DistanceIndex& index, const Labeling& labeling, const ParallelConfig& cfg) {
  expect_kind(node, Kind::Aggregate);
  Monitor m(signal, index, labeling, parallel_options(cfg));
  return m.aggregate_q(node, t, l);
}

}  // namespace sastl

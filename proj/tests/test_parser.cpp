#include "doctest.h"
#include "sastl/parser.hpp"
#include "support/random.hpp"

using namespace sastl;

namespace {
const SpatialDomain kNear{0, 1, psi_true()};
}

TEST_CASE("school noise example parses to the expected shape") {
  const auto f = parse_sastl(
      "everywhere[0,inf; School]( G[0,3]( A{avg}[0,1; true](Noise < 50) & A{max}[0,1; true](Noise < 80) ) )");
  const auto want = everywhere({0, kInf, psi_prop("School")},
                               always({0, 3}, conjunction(aggregate(SpatialOp::Avg, kNear, "Noise", Cmp::Less, 50),
                                                          aggregate(SpatialOp::Max, kNear, "Noise", Cmp::Less, 80))));
  CHECK(equal(f, want));
  CHECK(equal(parse_sastl(format_formula(f)), f));
}

TEST_CASE("street PMx example parses to a counting average") {
  const auto f = parse_sastl("C{avg}[0,inf; Street]( G[0,2]( PMx < 3 ) ) > 0.9");
  const auto want = count(SpatialOp::Avg, {0, kInf, psi_prop("Street")}, always({0, 2}, atom("PMx", Cmp::Less, 3)),
                          Cmp::Greater, 0.9);
  CHECK(equal(f, want));
}

TEST_CASE("formatting") {
  CHECK(format_formula(atom("x", Cmp::Less, 5)) == "x < 5");
  CHECK(format_formula(negation(negation(atom("x", Cmp::Less, 5)))) == "!(!(x < 5))");
  const auto nn = parse_sastl("!!(x < 5)");
  REQUIRE(nn->kind == Kind::Not);
  CHECK(nn->lhs->kind == Kind::Not);
  CHECK(format_number(kInf) == "inf");
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-0.0) == "-0");
  CHECK(format_psi(psi_and(psi_prop("A"), psi_not(psi_prop("B")))).find("A") != std::string::npos);
}

TEST_CASE("precedence and associativity") {
  const auto a = atom("a", Cmp::Less, 1), b = atom("b", Cmp::Less, 1), c = atom("c", Cmp::Less, 1);
  CHECK(equal(parse_sastl("a < 1 | b < 1 & c < 1"), disjunction(a, conjunction(b, c))));
  CHECK(equal(parse_sastl("a < 1 & b < 1 | c < 1"), disjunction(conjunction(a, b), c)));
  CHECK(equal(parse_sastl("a < 1 U[0,1] b < 1 U[0,2] c < 1"), until({0, 1}, a, until({0, 2}, b, c))));
  CHECK(equal(parse_sastl("!a < 1 & b < 1"), conjunction(negation(a), b)));
  CHECK(equal(parse_sastl("G[0,1] a < 1 U[0,1] b < 1"), until({0, 1}, always({0, 1}, a), b)));
  CHECK(equal(parse_sastl("a < 1 & b < 1 & c < 1"), conjunction(conjunction(a, b), c)));
}

TEST_CASE("keywords are contextual") {
  // G, F, A, C and U are ordinary names unless a bracket follows.
  CHECK(equal(parse_sastl("G < 1 & U >= 2"), conjunction(atom("G", Cmp::Less, 1), atom("U", Cmp::GreaterEqual, 2))));
  CHECK(equal(parse_sastl("everywhere > 0"), atom("everywhere", Cmp::Greater, 0)));
  CHECK(equal(parse_sastl("true"), truth()));
  CHECK(equal(parse_sastl("x <= 1e3"), atom("x", Cmp::LessEqual, 1000)));
}

TEST_CASE("constants stand in for numbers") {
  const Constants k = {{"GOOD", 50}, {"FAR", 2}};
  ParseOptions o;
  o.constants = &k;
  CHECK(equal(parse_sastl("air > GOOD", o), atom("air", Cmp::Greater, 50)));
  CHECK(equal(parse_sastl("A{avg}[0, FAR; true](air < GOOD)", o),
              aggregate(SpatialOp::Avg, {0, 2, psi_true()}, "air", Cmp::Less, 50)));
  CHECK_THROWS_WITH_AS(parse_sastl("air > BAD", o), doctest::Contains("BAD"), ParseError);
}

TEST_CASE("errors carry line and column") {
  try {
    parse_sastl("x < 1 &\n  y <");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.span().line == 2);
    CHECK(std::string(e.what()).rfind("2:", 0) == 0);
  }
  CHECK_THROWS_AS(parse_sastl("x < 1 )"), ParseError);
  CHECK_THROWS_AS(parse_sastl("G[3,1](x < 1)"), ParseError);
  CHECK_THROWS_AS(parse_sastl("C{avg}[0,inf; true](x < 1) > 1.5"), ParseError);
  CHECK_THROWS_AS(parse_sastl("A{median}[0,1; true](x < 1)"), ParseError);
  CHECK_THROWS_AS(parse_sastl(""), ParseError);
  CHECK_THROWS_AS(parse_sastl("x < inf"), ParseError);
  try {
    parse_sastl("G[0, 1](x < 1) & G[2, 1](y < 1)");
  } catch (const ParseError& e) {
    CHECK(e.span().column == 18);
  }
}

TEST_CASE("unknown propositions are rejected when a labeling is supplied") {
  Labeling lab(1);
  lab.add(Loc{0}, "School");
  ParseOptions o;
  o.validation.labeling = &lab;
  CHECK_NOTHROW(parse_sastl("everywhere[0,inf; School](x < 1)", o));
  CHECK_THROWS_WITH_AS(parse_sastl("everywhere[0,inf; Hospital](x < 1)", o), doctest::Contains("Hospital"),
                       ParseError);
}

TEST_CASE("psi syntax") {
  CHECK(format_psi(parse_psi("!School | Park")) == format_psi(psi_or(psi_not(psi_prop("School")), psi_prop("Park"))));
  CHECK_THROWS_AS(parse_psi("School |"), ParseError);
}

TEST_CASE("parse inverts format on random formulas") {
  gen::Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const auto f = gen::random_syntax(rng);
    const auto text = format_formula(f);
    CAPTURE(text);
    CHECK(equal(parse_sastl(text), f));
    CHECK(format_formula(parse_sastl(text)) == text);
  }
}

#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sastl {

class Labeling;

/// Byte offsets plus 1-based line/column of the first byte.
struct SourceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t line = 1;
  std::size_t column = 1;
};

enum class Cmp : std::uint8_t { Less, LessEqual, Greater, GreaterEqual };
enum class SpatialOp : std::uint8_t { Max, Min, Sum, Avg };

std::string_view to_string(Cmp c);
std::string_view to_string(SpatialOp op);

/// True for < and <=.
constexpr bool is_upper_bound(Cmp c) { return c == Cmp::Less || c == Cmp::LessEqual; }
bool compare(double lhs, Cmp c, double rhs);

constexpr double kInf = std::numeric_limits<double>::infinity();

// --- location predicate psi := true | p | !psi | psi | psi -------------------

struct PsiNode;
using Psi = std::shared_ptr<const PsiNode>;

struct PsiNode {
  enum class Kind : std::uint8_t { True, Prop, Not, Or };
  Kind kind = Kind::True;
  std::string name;  // Prop
  Psi lhs, rhs;      // Not uses lhs
  SourceSpan span;
};

Psi psi_true();
Psi psi_prop(std::string name);
Psi psi_not(Psi p);
Psi psi_or(Psi a, Psi b);
/// Derived: !(!a | !b).
Psi psi_and(Psi a, Psi b);

bool equal(const Psi& a, const Psi& b);

/// Spatial domain D = ([d1, d2], psi), a distance annulus filtered by psi.
struct SpatialDomain {
  double d1 = 0.0;
  double d2 = kInf;
  Psi psi = psi_true();
};

/// Closed time interval [lo, hi] in time units.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

// --- formulas -----------------------------------------------------------------

struct Node;
using Formula = std::shared_ptr<const Node>;

enum class Kind : std::uint8_t {
  True,
  Atom,        // x cmp c
  Not,
  And,
  Or,
  Until,       // lhs U_I rhs
  Always,      // G_I lhs
  Eventually,  // F_I lhs
  Aggregate,   // A^op_D (x cmp c)
  Count,       // C^op_D (lhs) cmp c
  Everywhere,  // C^min_D lhs > 0
  Somewhere,   // C^max_D lhs > 0
};

std::string_view to_string(Kind k);

/// Immutable AST node. Fields are meaningful only for the kinds noted.
struct Node {
  Kind kind = Kind::True;
  std::string variable;             // Atom, Aggregate
  Cmp cmp = Cmp::Less;              // Atom, Aggregate, Count
  double threshold = 0.0;           // Atom, Aggregate, Count
  SpatialOp op = SpatialOp::Max;    // Aggregate, Count
  Interval interval;                // Until, Always, Eventually
  SpatialDomain domain;             // Aggregate, Count, Everywhere, Somewhere
  Formula lhs, rhs;                 // unary operators use lhs
  SourceSpan span;
};

Formula truth();
Formula atom(std::string variable, Cmp cmp, double c);
Formula negation(Formula f);
Formula conjunction(Formula a, Formula b);
Formula disjunction(Formula a, Formula b);
Formula until(Interval i, Formula a, Formula b);
Formula always(Interval i, Formula f);
Formula eventually(Interval i, Formula f);
Formula aggregate(SpatialOp op, SpatialDomain d, std::string variable, Cmp cmp, double c);
Formula count(SpatialOp op, SpatialDomain d, Formula f, Cmp cmp, double c);
Formula everywhere(SpatialDomain d, Formula f);
Formula somewhere(SpatialDomain d, Formula f);

/// Copy of `f` with `span` attached.
Formula with_span(Formula f, SourceSpan span);

/// Structural equality; spans are ignored.
bool equal(const Formula& a, const Formula& b);

/// Rewrites derived operators into Atom/True/Not/And/Until/Aggregate/Count.
Formula desugar(const Formula& f);

/// True if `f` contains only core constructors.
bool is_core(const Formula& f);

/// Maximum future time (time units) the verdict at an anchor depends on.
double horizon(const Formula& f);

/// Horizon in grid samples for a given step; matches the sample windows the monitors scan.
std::size_t horizon_samples(const Formula& f, double step);

/// Sample offsets [first, last] covered by interval `i` on a grid with `step`.
/// Returns first > last when no tick falls inside the interval.
struct SampleWindow {
  std::size_t first = 0;
  std::size_t last = 0;
  [[nodiscard]] bool empty() const { return first > last; }
};
SampleWindow sample_window(Interval i, double step);

/// Number of nodes in the syntax tree.
std::size_t size(const Formula& f);

/// Variables read by the formula, sorted and unique.
std::vector<std::string> variables(const Formula& f);
/// Propositions used in spatial domains, sorted and unique.
std::vector<std::string> propositions(const Formula& f);

/// Tagged-union JSON dump of the AST, for debugging.
std::string dump_json(const Formula& f, int indent = -1);

class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& what, SourceSpan span) : std::runtime_error(what), span_(span) {}
  [[nodiscard]] const SourceSpan& span() const { return span_; }

 private:
  SourceSpan span_;
};

struct ValidationOptions {
  /// When set, sum-counting thresholds must not exceed this many locations.
  std::optional<std::size_t> location_count;
  /// When set, every proposition must be known to it.
  const Labeling* labeling = nullptr;
};

/// Rejects malformed intervals, domains and counting thresholds (never clamps).
void validate(const Formula& f, const ValidationOptions& opts = {});

}  // namespace sastl

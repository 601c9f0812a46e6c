#include "sastl/formula.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "sastl/signal.hpp"

namespace sastl {

std::string_view to_string(Cmp c) {
  switch (c) {
    case Cmp::Less: return "<";
    case Cmp::LessEqual: return "<=";
    case Cmp::Greater: return ">";
    case Cmp::GreaterEqual: return ">=";
  }
  return "?";
}

std::string_view to_string(SpatialOp op) {
  switch (op) {
    case SpatialOp::Max: return "max";
    case SpatialOp::Min: return "min";
    case SpatialOp::Sum: return "sum";
    case SpatialOp::Avg: return "avg";
  }
  return "?";
}

std::string_view to_string(Kind k) {
  switch (k) {
    case Kind::True: return "True";
    case Kind::Atom: return "Atom";
    case Kind::Not: return "Not";
    case Kind::And: return "And";
    case Kind::Or: return "Or";
    case Kind::Until: return "Until";
    case Kind::Always: return "Always";
    case Kind::Eventually: return "Eventually";
    case Kind::Aggregate: return "Agg";
    case Kind::Count: return "Count";
    case Kind::Everywhere: return "Everywhere";
    case Kind::Somewhere: return "Somewhere";
  }
  return "?";
}

bool compare(double lhs, Cmp c, double rhs) {
  switch (c) {
    case Cmp::Less: return lhs < rhs;
    case Cmp::LessEqual: return lhs <= rhs;
    case Cmp::Greater: return lhs > rhs;
    case Cmp::GreaterEqual: return lhs >= rhs;
  }
  return false;
}

// --- psi ----------------------------------------------------------------------

Psi psi_true() {
  static const Psi top = std::make_shared<const PsiNode>();
  return top;
}

Psi psi_prop(std::string name) {
  PsiNode n;
  n.kind = PsiNode::Kind::Prop;
  n.name = std::move(name);
  return std::make_shared<const PsiNode>(std::move(n));
}

Psi psi_not(Psi p) {
  PsiNode n;
  n.kind = PsiNode::Kind::Not;
  n.lhs = std::move(p);
  return std::make_shared<const PsiNode>(std::move(n));
}

Psi psi_or(Psi a, Psi b) {
  PsiNode n;
  n.kind = PsiNode::Kind::Or;
  n.lhs = std::move(a);
  n.rhs = std::move(b);
  return std::make_shared<const PsiNode>(std::move(n));
}

Psi psi_and(Psi a, Psi b) { return psi_not(psi_or(psi_not(std::move(a)), psi_not(std::move(b)))); }

bool equal(const Psi& a, const Psi& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case PsiNode::Kind::True: return true;
    case PsiNode::Kind::Prop: return a->name == b->name;
    case PsiNode::Kind::Not: return equal(a->lhs, b->lhs);
    case PsiNode::Kind::Or: return equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
  }
  return false;
}

// --- builders -------------------------------------------------------------------

namespace {

Formula make(Node n) { return std::make_shared<const Node>(std::move(n)); }

Node unary(Kind k, Formula f) {
  Node n;
  n.kind = k;
  n.lhs = std::move(f);
  return n;
}

Node binary(Kind k, Formula a, Formula b) {
  Node n;
  n.kind = k;
  n.lhs = std::move(a);
  n.rhs = std::move(b);
  return n;
}

bool equal(const SpatialDomain& a, const SpatialDomain& b) {
  return a.d1 == b.d1 && a.d2 == b.d2 && equal(a.psi, b.psi);
}

}  // namespace

Formula truth() {
  static const Formula t = make(Node{});
  return t;
}

Formula atom(std::string variable, Cmp cmp, double c) {
  Node n;
  n.kind = Kind::Atom;
  n.variable = std::move(variable);
  n.cmp = cmp;
  n.threshold = c;
  return make(std::move(n));
}

Formula negation(Formula f) { return make(unary(Kind::Not, std::move(f))); }
Formula conjunction(Formula a, Formula b) { return make(binary(Kind::And, std::move(a), std::move(b))); }
Formula disjunction(Formula a, Formula b) { return make(binary(Kind::Or, std::move(a), std::move(b))); }

Formula until(Interval i, Formula a, Formula b) {
  Node n = binary(Kind::Until, std::move(a), std::move(b));
  n.interval = i;
  return make(std::move(n));
}

Formula always(Interval i, Formula f) {
  Node n = unary(Kind::Always, std::move(f));
  n.interval = i;
  return make(std::move(n));
}

Formula eventually(Interval i, Formula f) {
  Node n = unary(Kind::Eventually, std::move(f));
  n.interval = i;
  return make(std::move(n));
}

Formula aggregate(SpatialOp op, SpatialDomain d, std::string variable, Cmp cmp, double c) {
  Node n;
  n.kind = Kind::Aggregate;
  n.op = op;
  n.domain = std::move(d);
  n.variable = std::move(variable);
  n.cmp = cmp;
  n.threshold = c;
  return make(std::move(n));
}

Formula count(SpatialOp op, SpatialDomain d, Formula f, Cmp cmp, double c) {
  Node n = unary(Kind::Count, std::move(f));
  n.op = op;
  n.domain = std::move(d);
  n.cmp = cmp;
  n.threshold = c;
  return make(std::move(n));
}

Formula everywhere(SpatialDomain d, Formula f) {
  Node n = unary(Kind::Everywhere, std::move(f));
  n.domain = std::move(d);
  return make(std::move(n));
}

Formula somewhere(SpatialDomain d, Formula f) {
  Node n = unary(Kind::Somewhere, std::move(f));
  n.domain = std::move(d);
  return make(std::move(n));
}

Formula with_span(Formula f, SourceSpan span) {
  Node n = *f;
  n.span = span;
  return make(std::move(n));
}

bool equal(const Formula& a, const Formula& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case Kind::True: return true;
    case Kind::Atom:
      return a->variable == b->variable && a->cmp == b->cmp && a->threshold == b->threshold;
    case Kind::Not: return equal(a->lhs, b->lhs);
    case Kind::And:
    case Kind::Or: return equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
    case Kind::Until:
      return a->interval == b->interval && equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs);
    case Kind::Always:
    case Kind::Eventually: return a->interval == b->interval && equal(a->lhs, b->lhs);
    case Kind::Aggregate:
      return a->op == b->op && equal(a->domain, b->domain) && a->variable == b->variable && a->cmp == b->cmp &&
             a->threshold == b->threshold;
    case Kind::Count:
      return a->op == b->op && equal(a->domain, b->domain) && a->cmp == b->cmp && a->threshold == b->threshold &&
             equal(a->lhs, b->lhs);
    case Kind::Everywhere:
    case Kind::Somewhere: return equal(a->domain, b->domain) && equal(a->lhs, b->lhs);
  }
  return false;
}

// --- desugaring -----------------------------------------------------------------

Formula desugar(const Formula& f) {
  auto keep_span = [&](Formula g) {
    Node n = *g;
    n.span = f->span;
    return make(std::move(n));
  };
  switch (f->kind) {
    case Kind::True:
    case Kind::Atom:
    case Kind::Aggregate: return f;
    case Kind::Not: return keep_span(negation(desugar(f->lhs)));
    case Kind::And: return keep_span(conjunction(desugar(f->lhs), desugar(f->rhs)));
    case Kind::Or:
      return keep_span(negation(conjunction(negation(desugar(f->lhs)), negation(desugar(f->rhs)))));
    case Kind::Until: return keep_span(until(f->interval, desugar(f->lhs), desugar(f->rhs)));
    case Kind::Eventually: return keep_span(until(f->interval, truth(), desugar(f->lhs)));
    case Kind::Always: return keep_span(negation(until(f->interval, truth(), negation(desugar(f->lhs)))));
    case Kind::Count: return keep_span(count(f->op, f->domain, desugar(f->lhs), f->cmp, f->threshold));
    case Kind::Everywhere: return keep_span(count(SpatialOp::Min, f->domain, desugar(f->lhs), Cmp::Greater, 0.0));
    case Kind::Somewhere: return keep_span(count(SpatialOp::Max, f->domain, desugar(f->lhs), Cmp::Greater, 0.0));
  }
  return f;
}

bool is_core(const Formula& f) {
  switch (f->kind) {
    case Kind::True:
    case Kind::Atom:
    case Kind::Aggregate: return true;
    case Kind::Not:
    case Kind::Count: return is_core(f->lhs);
    case Kind::And:
    case Kind::Until: return is_core(f->lhs) && is_core(f->rhs);
    default: return false;
  }
}

// --- structure ------------------------------------------------------------------

double horizon(const Formula& f) {
  switch (f->kind) {
    case Kind::True:
    case Kind::Atom:
    case Kind::Aggregate: return 0.0;
    case Kind::Not:
    case Kind::Count:
    case Kind::Everywhere:
    case Kind::Somewhere: return horizon(f->lhs);
    case Kind::And:
    case Kind::Or: return std::max(horizon(f->lhs), horizon(f->rhs));
    case Kind::Until: return f->interval.hi + std::max(horizon(f->lhs), horizon(f->rhs));
    case Kind::Always:
    case Kind::Eventually: return f->interval.hi + horizon(f->lhs);
  }
  return 0.0;
}

SampleWindow sample_window(Interval i, double step) {
  const double eps = 1e-9;
  const double first = std::ceil(i.lo / step - eps);
  const double last = std::floor(i.hi / step + eps);
  SampleWindow w;
  w.first = static_cast<std::size_t>(std::max(0.0, first));
  if (last < first) {
    w.last = 0;
    w.first = 1;  // empty
    return w;
  }
  w.last = static_cast<std::size_t>(last);
  return w;
}

std::size_t horizon_samples(const Formula& f, double step) {
  switch (f->kind) {
    case Kind::True:
    case Kind::Atom:
    case Kind::Aggregate: return 0;
    case Kind::Not:
    case Kind::Count:
    case Kind::Everywhere:
    case Kind::Somewhere: return horizon_samples(f->lhs, step);
    case Kind::And:
    case Kind::Or: return std::max(horizon_samples(f->lhs, step), horizon_samples(f->rhs, step));
    case Kind::Until: {
      // An empty window never reads past the anchor's own prefix.
      const auto w = sample_window(f->interval, step);
      const std::size_t reach = w.empty() ? 0 : w.last;
      return reach + std::max(horizon_samples(f->lhs, step), horizon_samples(f->rhs, step));
    }
    case Kind::Always:
    case Kind::Eventually: {
      const auto w = sample_window(f->interval, step);
      return (w.empty() ? 0 : w.last) + horizon_samples(f->lhs, step);
    }
  }
  return 0;
}

std::size_t size(const Formula& f) {
  if (!f) return 0;
  return 1 + size(f->lhs) + size(f->rhs);
}

namespace {

void collect_props(const Psi& p, std::set<std::string>& out) {
  if (!p) return;
  if (p->kind == PsiNode::Kind::Prop) out.insert(p->name);
  collect_props(p->lhs, out);
  collect_props(p->rhs, out);
}

template <typename Fn>
void walk(const Formula& f, Fn&& fn) {
  if (!f) return;
  fn(*f);
  walk(f->lhs, fn);
  walk(f->rhs, fn);
}

bool has_domain(Kind k) {
  return k == Kind::Aggregate || k == Kind::Count || k == Kind::Everywhere || k == Kind::Somewhere;
}

}  // namespace

std::vector<std::string> variables(const Formula& f) {
  std::set<std::string> out;
  walk(f, [&](const Node& n) {
    if (n.kind == Kind::Atom || n.kind == Kind::Aggregate) out.insert(n.variable);
  });
  return {out.begin(), out.end()};
}

std::vector<std::string> propositions(const Formula& f) {
  std::set<std::string> out;
  walk(f, [&](const Node& n) {
    if (has_domain(n.kind)) collect_props(n.domain.psi, out);
  });
  return {out.begin(), out.end()};
}

// --- validation -----------------------------------------------------------------

namespace {

void validate_psi(const Psi& p, const ValidationOptions& opts) {
  if (!p) throw ValidationError("missing location predicate", {});
  switch (p->kind) {
    case PsiNode::Kind::True: return;
    case PsiNode::Kind::Prop:
      if (opts.labeling && !opts.labeling->knows(p->name))
        throw ValidationError("unknown proposition '" + p->name + "'", p->span);
      return;
    case PsiNode::Kind::Not: validate_psi(p->lhs, opts); return;
    case PsiNode::Kind::Or:
      validate_psi(p->lhs, opts);
      validate_psi(p->rhs, opts);
      return;
  }
}

}  // namespace

void validate(const Formula& f, const ValidationOptions& opts) {
  if (!f) throw ValidationError("missing subformula", {});
  const auto& n = *f;
  switch (n.kind) {
    case Kind::Until:
    case Kind::Always:
    case Kind::Eventually:
      if (!std::isfinite(n.interval.lo) || !std::isfinite(n.interval.hi))
        throw ValidationError("temporal interval bounds must be finite", n.span);
      if (n.interval.lo < 0.0) throw ValidationError("temporal interval must start at or after 0", n.span);
      if (n.interval.lo > n.interval.hi)
        throw ValidationError("temporal interval [a,b] requires a <= b", n.span);
      break;
    case Kind::Atom:
      if (!std::isfinite(n.threshold)) throw ValidationError("atom threshold must be finite", n.span);
      break;
    default: break;
  }
  if (has_domain(n.kind)) {
    if (!std::isfinite(n.domain.d1) || n.domain.d1 < 0.0)
      throw ValidationError("spatial domain must start at a finite d1 >= 0", n.span);
    if (std::isnan(n.domain.d2) || n.domain.d1 > n.domain.d2)
      throw ValidationError("spatial domain [d1,d2] requires d1 <= d2", n.span);
    validate_psi(n.domain.psi, opts);
  }
  if (n.kind == Kind::Aggregate && !std::isfinite(n.threshold))
    throw ValidationError("aggregation threshold must be finite", n.span);
  if (n.kind == Kind::Count) {
    const double c = n.threshold;
    if (!std::isfinite(c) || c < 0.0) throw ValidationError("counting threshold must be >= 0", n.span);
    if (n.op == SpatialOp::Sum) {
      if (opts.location_count && c > static_cast<double>(*opts.location_count))
        throw ValidationError("sum-counting threshold exceeds the number of locations (" +
                                  std::to_string(*opts.location_count) + ")",
                              n.span);
    } else if (c >= 1.0) {
      throw ValidationError("counting threshold for " + std::string(to_string(n.op)) + " must lie in [0,1)",
                            n.span);
    }
  }
  if (n.lhs) validate(n.lhs, opts);
  if (n.rhs) validate(n.rhs, opts);
}

// --- JSON dump ------------------------------------------------------------------

namespace {

using nlohmann::json;

json bound(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json psi_json(const Psi& p) {
  switch (p->kind) {
    case PsiNode::Kind::True: return {{"kind", "True"}};
    case PsiNode::Kind::Prop: return {{"kind", "Prop"}, {"name", p->name}};
    case PsiNode::Kind::Not: return {{"kind", "Not"}, {"psi", psi_json(p->lhs)}};
    case PsiNode::Kind::Or: return {{"kind", "Or"}, {"lhs", psi_json(p->lhs)}, {"rhs", psi_json(p->rhs)}};
  }
  return nullptr;
}

json formula_json(const Formula& f) {
  json j = {{"kind", to_string(f->kind)}};
  switch (f->kind) {
    case Kind::True: break;
    case Kind::Atom:
      j["variable"] = f->variable;
      j["cmp"] = to_string(f->cmp);
      j["c"] = f->threshold;
      break;
    case Kind::Not: j["f"] = formula_json(f->lhs); break;
    case Kind::And:
    case Kind::Or:
      j["lhs"] = formula_json(f->lhs);
      j["rhs"] = formula_json(f->rhs);
      break;
    case Kind::Until:
      j["I"] = {f->interval.lo, f->interval.hi};
      j["lhs"] = formula_json(f->lhs);
      j["rhs"] = formula_json(f->rhs);
      break;
    case Kind::Always:
    case Kind::Eventually:
      j["I"] = {f->interval.lo, f->interval.hi};
      j["f"] = formula_json(f->lhs);
      break;
    case Kind::Aggregate:
    case Kind::Count:
    case Kind::Everywhere:
    case Kind::Somewhere:
      j["D"] = {{"d1", bound(f->domain.d1)}, {"d2", bound(f->domain.d2)}, {"psi", psi_json(f->domain.psi)}};
      if (f->kind == Kind::Aggregate || f->kind == Kind::Count) {
        j["op"] = to_string(f->op);
        j["cmp"] = to_string(f->cmp);
        j["c"] = f->threshold;
      }
      if (f->kind == Kind::Aggregate)
        j["variable"] = f->variable;
      else
        j["f"] = formula_json(f->lhs);
      break;
  }
  return j;
}

}  // namespace

std::string dump_json(const Formula& f, int indent) { return formula_json(f).dump(indent); }

}  // namespace sastl

#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace oracle {

using namespace sastl;

namespace {
constexpr double inf = std::numeric_limits<double>::infinity();

bool holds(double v, Cmp cmp, double c) {
  switch (cmp) {
    case Cmp::Less: return v < c;
    case Cmp::LessEqual: return v <= c;
    case Cmp::Greater: return v > c;
    case Cmp::GreaterEqual: return v >= c;
  }
  return false;
}

// Margin of `v cmp c`: positive iff it holds strictly.
double margin(double v, Cmp cmp, double c) { return (cmp == Cmp::Less || cmp == Cmp::LessEqual) ? c - v : v - c; }
}  // namespace

std::vector<std::vector<double>> all_pairs(const SpatialGraph& g) {
  const std::size_t n = g.size();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0.0;
  for (const auto& e : g.edges()) {
    d[e.a.value][e.b.value] = std::min(d[e.a.value][e.b.value], e.weight);
    d[e.b.value][e.a.value] = std::min(d[e.b.value][e.a.value], e.weight);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
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

double counting_robustness(SpatialOp op, Cmp cmp, double c, std::vector<double> s) {
  const std::size_t n = s.size();
  if (n == 0) return inf;
  std::sort(s.begin(), s.end(), std::greater<>());
  double best = -inf;
  const bool lower_bound = cmp == Cmp::Greater || cmp == Cmp::GreaterEqual;
  for (std::size_t k = 0; k <= n; ++k) {
    if (!holds(counting_value(op, k, n), cmp, c)) continue;
    double r;
    if (lower_bound)
      r = k == 0 ? inf : s[k - 1];  // k children must hold: the k-th best
    else
      r = k == n ? inf : -s[k];  // at most k may hold: the (k+1)-th best must fail
    best = std::max(best, r);
  }
  return best;
}

Oracle::Oracle(const SpatioTemporalSignal& signal, const SpatialGraph& graph, const Labeling& labeling)
    : signal_(signal), labeling_(labeling), dist_(all_pairs(graph)) {}

std::vector<std::size_t> Oracle::offsets(const Interval& i) const {
  const double step = signal_.grid().step;
  std::vector<std::size_t> out;
  for (std::size_t k = 0; static_cast<double>(k) * step <= i.hi + 1e-9 * std::max(1.0, step); ++k)
    if (static_cast<double>(k) * step >= i.lo - 1e-9 * std::max(1.0, step)) out.push_back(k);
  return out;
}

bool Oracle::psi(const Psi& p, Loc l) const {
  switch (p->kind) {
    case PsiNode::Kind::True: return true;
    case PsiNode::Kind::Prop: {
      const auto& ls = labeling_.labels(l);
      return std::find(ls.begin(), ls.end(), p->name) != ls.end();
    }
    case PsiNode::Kind::Not: return !psi(p->lhs, l);
    case PsiNode::Kind::Or: return psi(p->lhs, l) || psi(p->rhs, l);
  }
  return false;
}

std::vector<Loc> Oracle::domain(Loc l, const SpatialDomain& d) const {
  std::vector<std::pair<double, std::uint32_t>> hits;
  for (std::uint32_t j = 0; j < dist_.size(); ++j) {
    const double dj = dist_[l.value][j];
    if (std::isinf(dj)) continue;
    if (dj >= d.d1 && dj <= d.d2 && psi(d.psi, Loc{j})) hits.emplace_back(dj, j);
  }
  std::sort(hits.begin(), hits.end());
  std::vector<Loc> out;
  for (const auto& h : hits) out.push_back(Loc{h.second});
  return out;
}

double Oracle::value(std::size_t t, Loc l, const std::string& x) const {
  if (t >= signal_.sample_count()) throw std::out_of_range("oracle: sample past the trace");
  const auto v = signal_.value_at(t, signal_.locations()[l.value], x);
  return v ? *v : std::numeric_limits<double>::quiet_NaN();
}

Outcome Oracle::boolean(const Formula& f, std::size_t t, Loc l) const {
  switch (f->kind) {
    case Kind::True: return {true, true};
    case Kind::Atom: {
      const double v = value(t, l, f->variable);
      if (std::isnan(v)) return {true, true};
      return {holds(v, f->cmp, f->threshold), false};
    }
    case Kind::Not: {
      const auto o = boolean(f->lhs, t, l);
      return {!o.value, o.vacuous};
    }
    case Kind::And: {
      const auto a = boolean(f->lhs, t, l), b = boolean(f->rhs, t, l);
      if (a.value && b.value) return {true, a.vacuous && b.vacuous};
      return {false, false};
    }
    case Kind::Or: {
      const auto a = boolean(f->lhs, t, l), b = boolean(f->rhs, t, l);
      if (a.value || b.value) return {true, false};
      return {false, a.vacuous && b.vacuous};
    }
    case Kind::Until:
    case Kind::Eventually:
    case Kind::Always: {
      const auto offs = offsets(f->interval);
      if (offs.empty()) return f->kind == Kind::Always ? Outcome{true, false} : Outcome{false, false};
      // Evaluate everything on [t, t + last offset] first.
      const std::size_t last = offs.back();
      std::vector<Outcome> lhs, rhs;
      for (std::size_t s = 0; s <= last; ++s) {
        if (f->kind == Kind::Until) {
          lhs.push_back(boolean(f->lhs, t + s, l));
          rhs.push_back(boolean(f->rhs, t + s, l));
        } else {
          lhs.push_back({true, true});
          const auto o = boolean(f->lhs, t + s, l);
          rhs.push_back(f->kind == Kind::Always ? Outcome{!o.value, o.vacuous} : o);
        }
      }
      // The verdict is decided at the first offset with a witness or a broken lhs.
      bool result = false;
      std::size_t decided = last;
      for (std::size_t s = 0; s <= last; ++s) {
        const bool in = s >= offs.front();
        if (in && rhs[s].value && lhs[s].value) {
          result = true;
          decided = s;
          break;
        }
        if (!lhs[s].value) {
          decided = s;
          break;
        }
      }
      bool vac = true;
      for (std::size_t s = 0; s <= decided; ++s) {
        vac = vac && lhs[s].vacuous;
        if (s >= offs.front()) vac = vac && rhs[s].vacuous;
      }
      if (f->kind == Kind::Always) return {!result, vac};
      return {result, vac};
    }
    case Kind::Aggregate: {
      std::vector<double> alpha;
      for (const auto j : domain(l, f->domain)) {
        const double v = value(t, j, f->variable);
        if (!std::isnan(v)) alpha.push_back(v);
      }
      if (alpha.empty()) return {true, true};
      double agg = 0.0;
      switch (f->op) {
        case SpatialOp::Max: agg = *std::max_element(alpha.begin(), alpha.end()); break;
        case SpatialOp::Min: agg = *std::min_element(alpha.begin(), alpha.end()); break;
        case SpatialOp::Sum:
        case SpatialOp::Avg:
          for (double v : alpha) agg += v;
          if (f->op == SpatialOp::Avg) agg /= static_cast<double>(alpha.size());
          break;
      }
      return {holds(agg, f->cmp, f->threshold), false};
    }
    case Kind::Count:
    case Kind::Everywhere:
    case Kind::Somewhere: {
      const auto locs = domain(l, f->domain);
      if (locs.empty()) return {true, true};
      std::size_t k = 0;
      bool vac = true;
      for (const auto j : locs) {
        const auto o = boolean(f->lhs, t, j);
        k += o.value ? 1 : 0;
        vac = vac && o.vacuous;
      }
      bool value;
      if (f->kind == Kind::Everywhere)
        value = k == locs.size();
      else if (f->kind == Kind::Somewhere)
        value = k > 0;
      else
        value = holds(counting_value(f->op, k, locs.size()), f->cmp, f->threshold);
      return {value, vac};
    }
  }
  throw std::logic_error("oracle: unknown node");
}

double Oracle::robustness(const Formula& f, std::size_t t, Loc l) const {
  switch (f->kind) {
    case Kind::True: return inf;
    case Kind::Atom: {
      const double v = value(t, l, f->variable);
      if (std::isnan(v)) return inf;
      return margin(v, f->cmp, f->threshold);
    }
    case Kind::Not: return -robustness(f->lhs, t, l);
    case Kind::And: return std::min(robustness(f->lhs, t, l), robustness(f->rhs, t, l));
    case Kind::Or: return std::max(robustness(f->lhs, t, l), robustness(f->rhs, t, l));
    case Kind::Until: {
      double best = -inf;
      for (const auto s : offsets(f->interval)) {
        double r = robustness(f->rhs, t + s, l);
        for (std::size_t u = 0; u <= s; ++u) r = std::min(r, robustness(f->lhs, t + u, l));
        best = std::max(best, r);
      }
      return best;
    }
    case Kind::Eventually: {
      double best = -inf;
      for (const auto s : offsets(f->interval)) best = std::max(best, robustness(f->lhs, t + s, l));
      return best;
    }
    case Kind::Always: {
      double worst = inf;
      for (const auto s : offsets(f->interval)) worst = std::min(worst, robustness(f->lhs, t + s, l));
      return worst;
    }
    case Kind::Aggregate: {
      std::vector<double> alpha;
      for (const auto j : domain(l, f->domain)) {
        const double v = value(t, j, f->variable);
        if (!std::isnan(v)) alpha.push_back(v);
      }
      if (alpha.empty()) return inf;
      switch (f->op) {
        case SpatialOp::Max: return margin(*std::max_element(alpha.begin(), alpha.end()), f->cmp, f->threshold);
        case SpatialOp::Min: return margin(*std::min_element(alpha.begin(), alpha.end()), f->cmp, f->threshold);
        case SpatialOp::Sum: {
          double sum = 0.0;
          for (double v : alpha) sum += v;
          return margin(sum, f->cmp, f->threshold) / static_cast<double>(alpha.size());
        }
        case SpatialOp::Avg: {
          double sum = 0.0;
          for (double v : alpha) sum += v;
          return margin(sum / static_cast<double>(alpha.size()), f->cmp, f->threshold);
        }
      }
      return 0.0;
    }
    case Kind::Count:
    case Kind::Everywhere:
    case Kind::Somewhere: {
      const auto locs = domain(l, f->domain);
      std::vector<double> s;
      for (const auto j : locs) s.push_back(robustness(f->lhs, t, j));
      if (s.empty()) return inf;
      if (f->kind == Kind::Everywhere) return *std::min_element(s.begin(), s.end());
      if (f->kind == Kind::Somewhere) return *std::max_element(s.begin(), s.end());
      return counting_robustness(f->op, f->cmp, f->threshold, s);
    }
  }
  throw std::logic_error("oracle: unknown node");
}

}  // namespace oracle

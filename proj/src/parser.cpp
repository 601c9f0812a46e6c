#include "sastl/parser.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <system_error>

namespace sastl {

ParseError::ParseError(const std::string& what, SourceSpan span)
    : std::runtime_error(std::to_string(span.line) + ":" + std::to_string(span.column) + ": " + what),
      detail_(what),
      span_(span) {}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Parser {
 public:
  Parser(std::string_view text, const Constants* constants) : text_(text), constants_(constants) {}

  Formula formula_entry() {
    auto f = parse_or();
    expect_end();
    return f;
  }

  Psi psi_entry() {
    auto p = psi_or();
    expect_end();
    return p;
  }

 private:
  std::string_view text_;
  const Constants* constants_;
  std::size_t pos_ = 0;

  SourceSpan span(std::size_t begin, std::size_t end) const {
    SourceSpan s{begin, end, 1, 1};
    for (std::size_t i = 0; i < begin && i < text_.size(); ++i) {
      if (text_[i] == '\n') {
        ++s.line;
        s.column = 1;
      } else {
        ++s.column;
      }
    }
    return s;
  }

  [[noreturn]] void fail(const std::string& msg, std::size_t begin, std::size_t end) const {
    throw ParseError(msg, span(begin, std::max(begin, end)));
  }
  [[noreturn]] void fail(const std::string& msg) const {
    fail(msg, pos_, std::min(pos_ + 1, text_.size()));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool at_end() {
    skip_ws();
    return pos_ >= text_.size();
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  bool accept(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (at_end()) fail(std::string("expected '") + c + "' but input ended");
      fail(std::string("expected '") + c + "'");
    }
  }

  void expect_end() {
    if (!at_end()) fail("unexpected trailing input");
  }

  /// Identifier at the cursor without consuming it.
  std::string_view peek_ident() {
    skip_ws();
    std::size_t e = pos_;
    if (e >= text_.size() || !ident_start(text_[e])) return {};
    while (e < text_.size() && ident_char(text_[e])) ++e;
    return text_.substr(pos_, e - pos_);
  }

  /// Non-space character after the identifier at the cursor.
  char after_ident(std::string_view id) const {
    std::size_t e = pos_ + id.size();
    while (e < text_.size() && std::isspace(static_cast<unsigned char>(text_[e]))) ++e;
    return e < text_.size() ? text_[e] : '\0';
  }

  bool keyword(std::string_view kw, char next) {
    const auto id = peek_ident();
    return id == kw && after_ident(id) == next;
  }

  std::string ident(const char* what) {
    const auto id = peek_ident();
    if (id.empty()) fail(std::string("expected ") + what);
    pos_ += id.size();
    return std::string(id);
  }

  double number(const char* what, bool allow_inf) {
    skip_ws();
    const std::size_t begin = pos_;
    if (allow_inf && peek_ident() == "inf") {
      pos_ += 3;
      return kInf;
    }
    const char* first = text_.data() + pos_;
    const char* last = text_.data() + text_.size();
    const bool numeric = pos_ < text_.size() &&
                         (std::isdigit(static_cast<unsigned char>(*first)) || *first == '.' ||
                          (*first == '-' && first + 1 < last &&
                           (std::isdigit(static_cast<unsigned char>(first[1])) || first[1] == '.')));
    if (!numeric) fail(std::string("expected ") + what);
    double v = 0.0;
    const auto res = std::from_chars(first, last, v);
    if (res.ec == std::errc::result_out_of_range) {
      // Underflow into the subnormal range is still an exact decimal round-trip.
      v = std::strtod(std::string(first, res.ptr).c_str(), nullptr);
      if (!std::isfinite(v)) fail("number out of range", begin, begin + static_cast<std::size_t>(res.ptr - first));
      pos_ += static_cast<std::size_t>(res.ptr - first);
      return v;
    }
    if (res.ec != std::errc()) fail(std::string("expected ") + what);
    pos_ += static_cast<std::size_t>(res.ptr - first);
    return v;
  }

  /// Interval or distance bound: a number, `inf` where allowed, or a named constant.
  double bound(const char* what, bool allow_inf) {
    const auto id = peek_ident();
    if (id.empty() || id == "inf") return number(what, allow_inf);
    return threshold();
  }

  /// A number or a named constant.
  double threshold() {
    const auto id = peek_ident();
    if (id.empty()) return number("a number or constant name", false);
    const std::size_t begin = pos_;
    if (!constants_) fail("unknown constant '" + std::string(id) + "' (no constants table)", begin, begin + id.size());
    const auto it = constants_->find(id);
    if (it == constants_->end()) fail("unknown constant '" + std::string(id) + "'", begin, begin + id.size());
    pos_ += id.size();
    return it->second;
  }

  Cmp cmp() {
    skip_ws();
    if (text_.substr(pos_, 2) == "<=") return pos_ += 2, Cmp::LessEqual;
    if (text_.substr(pos_, 2) == ">=") return pos_ += 2, Cmp::GreaterEqual;
    if (accept('<')) return Cmp::Less;
    if (accept('>')) return Cmp::Greater;
    fail("expected a comparison (<, <=, >, >=)");
  }

  SpatialOp spatial_op() {
    const std::size_t begin = (skip_ws(), pos_);
    const auto id = ident("an operator (max, min, sum, avg)");
    if (id == "max") return SpatialOp::Max;
    if (id == "min") return SpatialOp::Min;
    if (id == "sum") return SpatialOp::Sum;
    if (id == "avg") return SpatialOp::Avg;
    fail("unknown operator '" + id + "'", begin, pos_);
  }

  Interval interval() {
    expect('[');
    Interval i;
    i.lo = bound("an interval bound", false);
    expect(',');
    i.hi = bound("an interval bound", true);
    expect(']');
    return i;
  }

  SpatialDomain domain() {
    expect('[');
    SpatialDomain d;
    d.d1 = bound("a distance bound", true);
    expect(',');
    d.d2 = bound("a distance bound", true);
    expect(';');
    d.psi = psi_or();
    expect(']');
    return d;
  }

  Formula finish(Formula f, std::size_t begin) { return with_span(std::move(f), span(begin, pos_)); }

  Formula parse_or() {
    const std::size_t begin = (skip_ws(), pos_);
    auto f = parse_and();
    while (accept('|')) f = finish(disjunction(f, parse_and()), begin);
    return f;
  }

  Formula parse_and() {
    const std::size_t begin = (skip_ws(), pos_);
    auto f = parse_until();
    while (accept('&')) f = finish(conjunction(f, parse_until()), begin);
    return f;
  }

  Formula parse_until() {
    const std::size_t begin = (skip_ws(), pos_);
    auto f = parse_unary();
    if (keyword("U", '[')) {
      pos_ += 1;
      const auto i = interval();
      auto rhs = parse_until();
      return finish(until(i, f, rhs), begin);
    }
    return f;
  }

  Formula parse_unary() {
    const std::size_t begin = (skip_ws(), pos_);
    if (accept('!')) return finish(negation(parse_unary()), begin);
    if (keyword("G", '[')) {
      pos_ += 1;
      const auto i = interval();
      return finish(always(i, parse_unary()), begin);
    }
    if (keyword("F", '[')) {
      pos_ += 1;
      const auto i = interval();
      return finish(eventually(i, parse_unary()), begin);
    }
    return parse_primary();
  }

  Formula parse_primary() {
    const std::size_t begin = (skip_ws(), pos_);
    if (accept('(')) {
      auto f = parse_or();
      expect(')');
      return f;
    }
    const auto id = peek_ident();
    if (id.empty()) {
      if (at_end()) fail("expected a formula but input ended");
      fail("expected a formula");
    }
    if (id == "true") {
      pos_ += id.size();
      return finish(truth(), begin);
    }
    if (keyword("A", '{')) {
      pos_ += 1;
      expect('{');
      const auto op = spatial_op();
      expect('}');
      auto d = domain();
      expect('(');
      auto var = ident("a variable name");
      const auto c = cmp();
      const double v = threshold();
      expect(')');
      return finish(aggregate(op, std::move(d), std::move(var), c, v), begin);
    }
    if (keyword("C", '{')) {
      pos_ += 1;
      expect('{');
      const auto op = spatial_op();
      expect('}');
      auto d = domain();
      expect('(');
      auto inner = parse_or();
      expect(')');
      const auto c = cmp();
      const double v = threshold();
      return finish(count(op, std::move(d), std::move(inner), c, v), begin);
    }
    if (keyword("everywhere", '[') || keyword("somewhere", '[')) {
      const bool every = id == "everywhere";
      pos_ += id.size();
      auto d = domain();
      expect('(');
      auto inner = parse_or();
      expect(')');
      return finish(every ? everywhere(std::move(d), std::move(inner)) : somewhere(std::move(d), std::move(inner)),
                    begin);
    }
    pos_ += id.size();
    const auto c = cmp();
    const double v = threshold();
    return finish(atom(std::string(id), c, v), begin);
  }

  Psi psi_span(Psi p, std::size_t begin) {
    auto copy = std::make_shared<PsiNode>(*p);
    copy->span = span(begin, pos_);
    return copy;
  }

  Psi psi_or() {
    const std::size_t begin = (skip_ws(), pos_);
    auto p = psi_and();
    while (accept('|')) p = psi_span(psi_or_node(p, psi_and()), begin);
    return p;
  }

  static Psi psi_or_node(Psi a, Psi b) { return sastl::psi_or(std::move(a), std::move(b)); }

  Psi psi_and() {
    const std::size_t begin = (skip_ws(), pos_);
    auto p = psi_unary();
    while (accept('&')) p = psi_span(sastl::psi_and(p, psi_unary()), begin);
    return p;
  }

  Psi psi_unary() {
    const std::size_t begin = (skip_ws(), pos_);
    if (accept('!')) return psi_span(psi_not(psi_unary()), begin);
    if (accept('(')) {
      auto p = psi_or();
      expect(')');
      return p;
    }
    const auto id = ident("a proposition name");
    if (id == "true") return psi_span(psi_true(), begin);
    return psi_span(psi_prop(id), begin);
  }
};

bool binary(const Formula& f) { return f->kind == Kind::And || f->kind == Kind::Or || f->kind == Kind::Until; }

void emit(std::string& out, const Formula& f);

void emit_operand(std::string& out, const Formula& f) {
  if (binary(f)) {
    out += '(';
    emit(out, f);
    out += ')';
  } else {
    emit(out, f);
  }
}

void emit_interval(std::string& out, const Interval& i) {
  out += '[';
  out += format_number(i.lo);
  out += ", ";
  out += format_number(i.hi);
  out += ']';
}

void emit_domain(std::string& out, const SpatialDomain& d) {
  out += '[';
  out += format_number(d.d1);
  out += ", ";
  out += format_number(d.d2);
  out += "; ";
  out += format_psi(d.psi);
  out += ']';
}

void emit(std::string& out, const Formula& f) {
  switch (f->kind) {
    case Kind::True: out += "true"; return;
    case Kind::Atom:
      out += f->variable;
      out += ' ';
      out += to_string(f->cmp);
      out += ' ';
      out += format_number(f->threshold);
      return;
    case Kind::Not:
      out += "!(";
      emit(out, f->lhs);
      out += ')';
      return;
    case Kind::And:
    case Kind::Or:
      emit_operand(out, f->lhs);
      out += f->kind == Kind::And ? " & " : " | ";
      emit_operand(out, f->rhs);
      return;
    case Kind::Until:
      emit_operand(out, f->lhs);
      out += " U";
      emit_interval(out, f->interval);
      out += ' ';
      emit_operand(out, f->rhs);
      return;
    case Kind::Always:
    case Kind::Eventually:
      out += f->kind == Kind::Always ? 'G' : 'F';
      emit_interval(out, f->interval);
      out += '(';
      emit(out, f->lhs);
      out += ')';
      return;
    case Kind::Aggregate:
      out += "A{";
      out += to_string(f->op);
      out += '}';
      emit_domain(out, f->domain);
      out += '(';
      out += f->variable;
      out += ' ';
      out += to_string(f->cmp);
      out += ' ';
      out += format_number(f->threshold);
      out += ')';
      return;
    case Kind::Count:
      out += "C{";
      out += to_string(f->op);
      out += '}';
      emit_domain(out, f->domain);
      out += '(';
      emit(out, f->lhs);
      out += ") ";
      out += to_string(f->cmp);
      out += ' ';
      out += format_number(f->threshold);
      return;
    case Kind::Everywhere:
    case Kind::Somewhere:
      out += f->kind == Kind::Everywhere ? "everywhere" : "somewhere";
      emit_domain(out, f->domain);
      out += '(';
      emit(out, f->lhs);
      out += ')';
      return;
  }
}

void emit_psi(std::string& out, const Psi& p) {
  switch (p->kind) {
    case PsiNode::Kind::True: out += "true"; return;
    case PsiNode::Kind::Prop: out += p->name; return;
    case PsiNode::Kind::Not:
      out += '!';
      if (p->lhs->kind == PsiNode::Kind::Or) {
        out += '(';
        emit_psi(out, p->lhs);
        out += ')';
      } else {
        emit_psi(out, p->lhs);
      }
      return;
    case PsiNode::Kind::Or:
      for (const auto* side : {&p->lhs, &p->rhs}) {
        if (side == &p->rhs) out += " | ";
        if ((*side)->kind == PsiNode::Kind::Or) {
          out += '(';
          emit_psi(out, *side);
          out += ')';
        } else {
          emit_psi(out, *side);
        }
      }
      return;
  }
}

}  // namespace

Formula parse_sastl(std::string_view text, const ParseOptions& opts) {
  auto f = Parser(text, opts.constants).formula_entry();
  try {
    validate(f, opts.validation);
  } catch (const ValidationError& e) {
    throw ParseError(e.what(), e.span());
  }
  return f;
}

Psi parse_psi(std::string_view text) { return Parser(text, nullptr).psi_entry(); }

std::string format_formula(const Formula& f) {
  std::string out;
  emit(out, f);
  return out;
}

std::string format_psi(const Psi& p) {
  std::string out;
  emit_psi(out, p);
  return out;
}

}  // namespace sastl

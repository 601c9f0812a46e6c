#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "sastl/formula.hpp"

namespace sastl {

/// Named threshold constants (GOOD, Moderate, ...) usable wherever a number is expected.
using Constants = std::map<std::string, double, std::less<>>;

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, SourceSpan span);
  [[nodiscard]] const SourceSpan& span() const { return span_; }
  /// Message without the line:column prefix.
  [[nodiscard]] const std::string& detail() const { return detail_; }

 private:
  std::string detail_;
  SourceSpan span_;
};

struct ParseOptions {
  const Constants* constants = nullptr;
  ValidationOptions validation;
};

/// Parses the text syntax and validates the result.
///
///   phi  := phi '|' phi | phi '&' phi | phi 'U[a,b]' phi | '!' phi
///         | 'G[a,b]' phi | 'F[a,b]' phi | '(' phi ')' | 'true' | x cmp c
///         | 'A{op}[d1,d2; psi](' x cmp c ')' | 'C{op}[d1,d2; psi](' phi ')' cmp c
///         | 'everywhere[d1,d2; psi](' phi ')' | 'somewhere[d1,d2; psi](' phi ')'
///
/// Binding from loosest: '|', '&', 'U' (right associative), prefix operators.
Formula parse_sastl(std::string_view text, const ParseOptions& opts = {});

/// psi := 'true' | name | '!' psi | psi '|' psi | psi '&' psi | '(' psi ')'
Psi parse_psi(std::string_view text);

/// Canonical text; parse_sastl(format_formula(f)) is structurally equal to f.
std::string format_formula(const Formula& f);
std::string format_psi(const Psi& p);

/// Shortest decimal text that reads back to the same double; `inf` for +infinity.
std::string format_number(double v);

}  // namespace sastl

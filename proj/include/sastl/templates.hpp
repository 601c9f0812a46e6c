#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sastl/formula.hpp"
#include "sastl/parser.hpp"

namespace sastl {

/// Slot problem in a requirement template; `field` is a dotted path such as `then.radius`.
class TemplateError : public std::runtime_error {
 public:
  TemplateError(std::string field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class SpatialQuantifier { All, Some, AtLeastPercent };
enum class TemporalOp { Always, Eventually };

/// "The <aggregation> <entity> within <radius> of <spatial> <pois> should <temporal>
///  be <comparison> <parameter> [for <duration> | during <window>]"
struct TemplateForm {
  std::optional<SpatialOp> aggregation;
  std::string entity;
  /// Distance band in template units; a single radius d is [0, d].
  std::optional<std::pair<double, double>> radius;
  std::optional<SpatialQuantifier> spatial;
  double percent = 0.0;  // AtLeastPercent
  std::optional<std::string> pois;  // psi text over labels
  std::optional<TemporalOp> temporal;
  std::optional<Cmp> comparison;
  /// Number or constant name.
  std::variant<std::monostate, double, std::string> parameter;
  std::optional<double> duration;                  // hours
  std::optional<std::pair<double, double>> window;  // hours
};

/// Recursive composition: T := form | if T then T | prohibited T | T and T | T until T | T except T.
struct TemplateExpr {
  enum class Kind { Form, If, Prohibited, And, Until, Except };
  Kind kind = Kind::Form;
  TemplateForm form;
  std::vector<std::shared_ptr<const TemplateExpr>> parts;
  std::optional<std::pair<double, double>> interval;  // Until, hours
};

struct TranslationConfig {
  Constants constants;
  /// Template entity phrase -> signal variable. Identifiers not listed map to themselves.
  std::map<std::string, std::string> entities;
  /// Graph distance units per template distance unit (e.g. per mile).
  double distance_scale = 1.0;
  /// Time units per hour.
  double hour = 3600.0;
  /// H for templates without a duration; translation fails without one.
  std::optional<double> default_horizon;
};

/// Builds a template from its JSON object form; throws TemplateError naming the field.
TemplateExpr template_from_json(std::string_view json_text);

/// Deterministic slot-to-operator mapping. The result always passes validate().
Formula translate_template(const TemplateExpr& t, const TranslationConfig& cfg);

}  // namespace sastl

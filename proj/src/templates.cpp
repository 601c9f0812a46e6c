#include "sastl/templates.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "json.hpp"

namespace sastl {

namespace {

using json = nlohmann::json;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

double number_at(const json& j, const std::string& field) {
  if (!j.is_number()) throw TemplateError(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw TemplateError(field, "must be finite");
  return v;
}

std::pair<double, double> band_at(const json& j, const std::string& field, bool allow_scalar) {
  if (allow_scalar && j.is_number()) return {0.0, number_at(j, field)};
  if (!j.is_array() || j.size() != 2) throw TemplateError(field, allow_scalar ? "expected a number or [a, b]" : "expected [a, b]");
  const double a = number_at(j[0], field + "[0]");
  const double b = number_at(j[1], field + "[1]");
  if (a < 0 || a > b) throw TemplateError(field, "bounds must satisfy 0 <= a <= b");
  return {a, b};
}

std::string string_at(const json& j, const std::string& field) {
  if (!j.is_string()) throw TemplateError(field, "expected a string");
  return j.get<std::string>();
}

SpatialOp aggregation_from(const json& j, const std::string& field) {
  const auto s = lower(string_at(j, field));
  if (s == "average" || s == "avg" || s == "mean") return SpatialOp::Avg;
  if (s == "max" || s == "maximum" || s == "highest") return SpatialOp::Max;
  if (s == "min" || s == "minimum" || s == "lowest") return SpatialOp::Min;
  if (s == "sum" || s == "total") return SpatialOp::Sum;
  throw TemplateError(field, "unknown aggregation '" + s + "'");
}

Cmp comparison_from(const json& j, const std::string& field) {
  const auto s = lower(string_at(j, field));
  if (s == "above" || s == "higher than" || s == "more than" || s == ">") return Cmp::Greater;
  if (s == "below" || s == "lower than" || s == "less than" || s == "<") return Cmp::Less;
  if (s == "at least" || s == ">=") return Cmp::GreaterEqual;
  if (s == "at most" || s == "<=") return Cmp::LessEqual;
  throw TemplateError(field, "unknown comparison '" + s + "'");
}

std::shared_ptr<const TemplateExpr> expr_from(const json& j, const std::string& path);

TemplateForm form_from(const json& j, const std::string& path) {
  TemplateForm t;
  for (const auto& [key, v] : j.items()) {
    const auto field = join(path, key);
    if (key == "aggregation") {
      t.aggregation = aggregation_from(v, field);
    } else if (key == "entity") {
      t.entity = string_at(v, field);
    } else if (key == "radius") {
      t.radius = band_at(v, field, true);
    } else if (key == "spatial") {
      if (v.is_object()) {
        if (v.size() != 1 || !v.contains("at_least_percent"))
          throw TemplateError(field, "expected {\"at_least_percent\": P}");
        t.spatial = SpatialQuantifier::AtLeastPercent;
        t.percent = number_at(v["at_least_percent"], field + ".at_least_percent");
      } else {
        const auto s = lower(string_at(v, field));
        if (s == "all" || s == "every" || s == "everywhere")
          t.spatial = SpatialQuantifier::All;
        else if (s == "some" || s == "any" || s == "somewhere")
          t.spatial = SpatialQuantifier::Some;
        else
          throw TemplateError(field, "unknown spatial operator '" + s + "'");
      }
    } else if (key == "pois") {
      t.pois = string_at(v, field);
    } else if (key == "temporal") {
      const auto s = lower(string_at(v, field));
      if (s == "always")
        t.temporal = TemporalOp::Always;
      else if (s == "eventually")
        t.temporal = TemporalOp::Eventually;
      else
        throw TemplateError(field, "unknown temporal operator '" + s + "'");
    } else if (key == "comparison") {
      t.comparison = comparison_from(v, field);
    } else if (key == "parameter") {
      if (v.is_string())
        t.parameter = v.get<std::string>();
      else
        t.parameter = number_at(v, field);
    } else if (key == "duration") {
      t.duration = number_at(v, field);
      if (*t.duration < 0) throw TemplateError(field, "must be non-negative");
    } else if (key == "window") {
      t.window = band_at(v, field, false);
    } else {
      throw TemplateError(field, "unknown slot");
    }
  }
  return t;
}

std::vector<std::shared_ptr<const TemplateExpr>> list_from(const json& j, const std::string& field, std::size_t min) {
  if (!j.is_array() || j.size() < min)
    throw TemplateError(field, "expected a list of at least " + std::to_string(min) + " templates");
  std::vector<std::shared_ptr<const TemplateExpr>> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(expr_from(j[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

std::shared_ptr<const TemplateExpr> expr_from(const json& j, const std::string& path) {
  if (!j.is_object()) throw TemplateError(path.empty() ? "template" : path, "expected an object");
  auto e = std::make_shared<TemplateExpr>();
  if (j.contains("if") || j.contains("then")) {
    if (j.size() != 2 || !j.contains("if") || !j.contains("then"))
      throw TemplateError(join(path, "if"), "a conditional needs exactly 'if' and 'then'");
    e->kind = TemplateExpr::Kind::If;
    e->parts = {expr_from(j["if"], join(path, "if")), expr_from(j["then"], join(path, "then"))};
  } else if (j.contains("prohibited")) {
    if (j.size() != 1) throw TemplateError(join(path, "prohibited"), "no other slots allowed beside 'prohibited'");
    e->kind = TemplateExpr::Kind::Prohibited;
    e->parts = {expr_from(j["prohibited"], join(path, "prohibited"))};
  } else if (j.contains("and")) {
    if (j.size() != 1) throw TemplateError(join(path, "and"), "no other slots allowed beside 'and'");
    e->kind = TemplateExpr::Kind::And;
    e->parts = list_from(j["and"], join(path, "and"), 2);
  } else if (j.contains("until")) {
    for (const auto& [key, v] : j.items())
      if (key != "until" && key != "interval") throw TemplateError(join(path, key), "unknown slot");
    e->kind = TemplateExpr::Kind::Until;
    e->parts = list_from(j["until"], join(path, "until"), 2);
    if (e->parts.size() != 2) throw TemplateError(join(path, "until"), "expected exactly two templates");
    if (j.contains("interval")) e->interval = band_at(j["interval"], join(path, "interval"), false);
  } else if (j.contains("except")) {
    if (j.size() != 1) throw TemplateError(join(path, "except"), "no other slots allowed beside 'except'");
    e->kind = TemplateExpr::Kind::Except;
    e->parts = list_from(j["except"], join(path, "except"), 2);
    if (e->parts.size() != 2) throw TemplateError(join(path, "except"), "expected exactly two templates");
  } else {
    e->form = form_from(j, path);
  }
  return e;
}

bool identifier(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '_'; });
}

double horizon_for(const TranslationConfig& cfg, const std::string& field) {
  if (!cfg.default_horizon) throw TemplateError(field, "no duration given and no default horizon configured");
  return *cfg.default_horizon;
}

Formula translate_form(const TemplateForm& t, const TranslationConfig& cfg, const std::string& path) {
  if (t.entity.empty()) throw TemplateError(join(path, "entity"), "missing mandatory slot");
  if (!t.comparison) throw TemplateError(join(path, "comparison"), "missing mandatory slot");
  if (std::holds_alternative<std::monostate>(t.parameter))
    throw TemplateError(join(path, "parameter"), "missing mandatory slot");

  std::string variable;
  if (auto it = cfg.entities.find(t.entity); it != cfg.entities.end())
    variable = it->second;
  else if (identifier(t.entity))
    variable = t.entity;
  else
    throw TemplateError(join(path, "entity"), "'" + t.entity + "' has no variable mapping");

  double c = 0.0;
  if (const auto* v = std::get_if<double>(&t.parameter)) {
    c = *v;
  } else {
    const auto& name = std::get<std::string>(t.parameter);
    const auto it = cfg.constants.find(name);
    if (it == cfg.constants.end()) throw TemplateError(join(path, "parameter"), "unknown constant '" + name + "'");
    c = it->second;
  }

  Formula f = atom(variable, *t.comparison, c);
  if (t.aggregation) {
    if (!t.radius) throw TemplateError(join(path, "radius"), "an aggregation needs a radius");
    SpatialDomain d{t.radius->first * cfg.distance_scale, t.radius->second * cfg.distance_scale, psi_true()};
    f = aggregate(*t.aggregation, d, variable, *t.comparison, c);
  } else if (t.radius) {
    SpatialDomain d{t.radius->first * cfg.distance_scale, t.radius->second * cfg.distance_scale, psi_true()};
    f = everywhere(d, f);
  }

  if (t.duration && t.window) throw TemplateError(join(path, "window"), "contradicts 'duration'; give only one");
  if (t.temporal || t.duration || t.window) {
    Interval i;
    if (t.window)
      i = {t.window->first * cfg.hour, t.window->second * cfg.hour};
    else if (t.duration)
      i = {0.0, *t.duration * cfg.hour};
    else
      i = {0.0, horizon_for(cfg, join(path, "duration"))};
    f = t.temporal.value_or(TemporalOp::Always) == TemporalOp::Always ? always(i, f) : eventually(i, f);
  }

  if (t.spatial || t.pois) {
    Psi psi = psi_true();
    if (t.pois) {
      try {
        psi = parse_psi(*t.pois);
      } catch (const ParseError& e) {
        throw TemplateError(join(path, "pois"), e.what());
      }
    }
    const SpatialDomain d{0.0, kInf, psi};
    switch (t.spatial.value_or(SpatialQuantifier::All)) {
      case SpatialQuantifier::All: f = everywhere(d, f); break;
      case SpatialQuantifier::Some: f = somewhere(d, f); break;
      case SpatialQuantifier::AtLeastPercent:
        if (!(t.percent >= 0.0 && t.percent < 100.0))
          throw TemplateError(join(path, "spatial.at_least_percent"), "must lie in [0, 100)");
        f = count(SpatialOp::Avg, d, f, Cmp::Greater, t.percent / 100.0);
        break;
    }
  }
  return f;
}

Formula translate_expr(const TemplateExpr& t, const TranslationConfig& cfg, const std::string& path) {
  using K = TemplateExpr::Kind;
  switch (t.kind) {
    case K::Form: return translate_form(t.form, cfg, path);
    case K::If:
      return disjunction(negation(translate_expr(*t.parts[0], cfg, join(path, "if"))),
                         translate_expr(*t.parts[1], cfg, join(path, "then")));
    case K::Prohibited: return negation(translate_expr(*t.parts[0], cfg, join(path, "prohibited")));
    case K::And: {
      Formula f = translate_expr(*t.parts[0], cfg, join(path, "and[0]"));
      for (std::size_t i = 1; i < t.parts.size(); ++i)
        f = conjunction(f, translate_expr(*t.parts[i], cfg, join(path, "and[" + std::to_string(i) + "]")));
      return f;
    }
    case K::Until: {
      Interval i;
      if (t.interval)
        i = {t.interval->first * cfg.hour, t.interval->second * cfg.hour};
      else
        i = {0.0, horizon_for(cfg, join(path, "interval"))};
      return until(i, translate_expr(*t.parts[0], cfg, join(path, "until[0]")),
                   translate_expr(*t.parts[1], cfg, join(path, "until[1]")));
    }
    case K::Except:
      return disjunction(translate_expr(*t.parts[0], cfg, join(path, "except[0]")),
                         translate_expr(*t.parts[1], cfg, join(path, "except[1]")));
  }
  throw TemplateError(path, "unknown template kind");
}

}  // namespace

TemplateExpr template_from_json(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw TemplateError("template", std::string("invalid JSON: ") + e.what());
  }
  return *expr_from(j, "");
}

Formula translate_template(const TemplateExpr& t, const TranslationConfig& cfg) {
  Formula f = translate_expr(t, cfg, "");
  try {
    validate(f);
  } catch (const ValidationError& e) {
    throw TemplateError("template", e.what());
  }
  return f;
}

}  // namespace sastl

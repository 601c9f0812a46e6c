#include "sastl/requirements.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "sastl/io.hpp"

namespace sastl {

using json = nlohmann::json;

std::vector<std::string> RequirementSet::variables() const {
  std::set<std::string> all;
  for (const auto& r : requirements)
    for (auto& v : sastl::variables(r.core)) all.insert(v);
  return {all.begin(), all.end()};
}

std::size_t RequirementSet::max_horizon_samples(double step) const {
  std::size_t h = 0;
  for (const auto& r : requirements) h = std::max(h, horizon_samples(r.core, step));
  return h;
}

namespace {

[[noreturn]] void fail(std::string_view source, const std::string& where, const std::string& what) {
  throw FormatError(std::string(source) + ": " + (where.empty() ? "" : where + ": ") + what);
}

double positive(const json& j, std::string_view source, const char* key) {
  if (!j.is_number() || !(j.get<double>() > 0) || !std::isfinite(j.get<double>()))
    fail(source, key, "expected a positive number");
  return j.get<double>();
}

AnchorSpec anchors_from(const json* j, const RequirementContext& ctx, std::string_view source,
                        const std::string& where) {
  const auto& graph = *ctx.graph;
  AnchorSpec a;
  auto all = [&] {
    a.locations.clear();
    for (std::uint32_t l = 0; l < graph.size(); ++l) a.locations.push_back(Loc{l});
  };
  if (!j) {
    all();
    return a;
  }
  if (!j->is_object()) fail(source, where + ".anchors", "expected an object");
  for (const auto& [key, v] : j->items())
    if (key != "locations" && key != "times") fail(source, where + ".anchors." + key, "unknown field");

  const json locs = j->value("locations", json("all"));
  if (locs.is_string() && locs.get<std::string>() == "all") {
    all();
  } else if (locs.is_object()) {
    if (locs.size() != 1 || !locs.contains("label") || !locs["label"].is_string())
      fail(source, where + ".anchors.locations", "expected {\"label\": \"psi\"}");
    Psi psi;
    try {
      psi = parse_psi(locs["label"].get<std::string>());
    } catch (const ParseError& e) {
      fail(source, where + ".anchors.locations.label", e.what());
    }
    for (std::uint32_t l = 0; l < graph.size(); ++l)
      if (ctx.labeling && eval_psi(*ctx.labeling, Loc{l}, psi)) a.locations.push_back(Loc{l});
  } else if (locs.is_array()) {
    for (const auto& id : locs) {
      if (!id.is_string()) fail(source, where + ".anchors.locations", "expected location ids");
      const auto l = graph.find(id.get<std::string>());
      if (!l) fail(source, where + ".anchors.locations", "unknown location '" + id.get<std::string>() + "'");
      if (std::find(a.locations.begin(), a.locations.end(), *l) == a.locations.end()) a.locations.push_back(*l);
    }
  } else {
    fail(source, where + ".anchors.locations", "expected \"all\", {\"label\": ...} or a list of ids");
  }

  if (j->contains("times")) {
    const auto& t = (*j)["times"];
    if (t.is_string() && t.get<std::string>() == "all") {
    } else if (t.is_array()) {
      std::vector<double> times;
      for (const auto& x : t) {
        if (!x.is_number() || !std::isfinite(x.get<double>()))
          fail(source, where + ".anchors.times", "expected numbers");
        times.push_back(x.get<double>());
      }
      std::sort(times.begin(), times.end());
      times.erase(std::unique(times.begin(), times.end()), times.end());
      a.times = std::move(times);
    } else {
      fail(source, where + ".anchors.times", "expected \"all\" or a list of times");
    }
  }
  return a;
}

}  // namespace

RequirementSet read_requirements(std::string_view text, const RequirementContext& ctx, std::string_view source) {
  if (ctx.labeling && !ctx.graph) throw std::invalid_argument("a labeling needs its graph");
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(source, "", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(source, "", "expected a JSON object");

  RequirementSet set;
  for (const auto& [key, v] : j.items()) {
    if (key == "constants") {
      if (!v.is_object()) fail(source, key, "expected an object");
      for (const auto& [name, c] : v.items()) {
        if (!c.is_number() || !std::isfinite(c.get<double>())) fail(source, "constants." + name, "expected a number");
        set.constants[name] = c.get<double>();
      }
    } else if (key == "entities") {
      if (!v.is_object()) fail(source, key, "expected an object");
      for (const auto& [name, var] : v.items()) {
        if (!var.is_string()) fail(source, "entities." + name, "expected a variable name");
        set.translation.entities[name] = var.get<std::string>();
      }
    } else if (key == "distance_units") {
      set.translation.distance_scale = positive(v, source, "distance_units");
    } else if (key == "hour") {
      set.translation.hour = positive(v, source, "hour");
    } else if (key == "default_horizon") {
      if (!v.is_number() || !(v.get<double>() >= 0) || !std::isfinite(v.get<double>()))
        fail(source, key, "expected a non-negative number");
      set.translation.default_horizon = v.get<double>();
    } else if (key != "requirements") {
      fail(source, key, "unknown field");
    }
  }
  set.translation.constants = set.constants;
  if (!set.translation.default_horizon) set.translation.default_horizon = ctx.trace_horizon;

  if (!j.contains("requirements") || !j["requirements"].is_array())
    fail(source, "requirements", "expected a list of requirements");

  ParseOptions popts;
  popts.constants = &set.constants;
  if (ctx.graph) popts.validation.location_count = ctx.graph->size();
  popts.validation.labeling = ctx.labeling;

  std::set<std::string> names;
  const auto& list = j["requirements"];
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto& r = list[i];
    std::string where = "requirements[" + std::to_string(i) + "]";
    if (!r.is_object()) fail(source, where, "expected an object");
    for (const auto& [key, v] : r.items())
      if (key != "name" && key != "formula" && key != "template" && key != "anchors")
        fail(source, where + "." + key, "unknown field");
    if (!r.contains("name") || !r["name"].is_string() || r["name"].get<std::string>().empty())
      fail(source, where + ".name", "missing requirement name");
    Requirement req;
    req.name = r["name"].get<std::string>();
    where += " (" + req.name + ")";
    if (!names.insert(req.name).second) fail(source, where, "duplicate requirement name");

    const bool has_formula = r.contains("formula"), has_template = r.contains("template");
    if (has_formula == has_template) fail(source, where, "give exactly one of 'formula' or 'template'");
    if (has_formula) {
      if (!r["formula"].is_string()) fail(source, where + ".formula", "expected formula text");
      try {
        req.formula = parse_sastl(r["formula"].get<std::string>(), popts);
      } catch (const ParseError& e) {
        fail(source, where + ".formula", e.what());
      }
    } else {
      try {
        req.formula = translate_template(template_from_json(r["template"].dump()), set.translation);
        validate(req.formula, popts.validation);
      } catch (const TemplateError& e) {
        fail(source, where + ".template" + (e.field() == "template" ? "" : "." + e.field()),
             std::string(e.what()).substr(e.field().size() + 2));
      } catch (const ValidationError& e) {
        fail(source, where + ".template", e.what());
      }
    }
    req.core = desugar(req.formula);
    if (ctx.graph) req.anchors = anchors_from(r.contains("anchors") ? &r["anchors"] : nullptr, ctx, source, where);
    set.requirements.push_back(std::move(req));
  }
  return set;
}

RequirementSet load_requirements(const std::filesystem::path& path, const RequirementContext& ctx) {
  return read_requirements(read_file(path), ctx, path.string());
}

bool Report::same_verdict(const Report& o) const {
  auto same = [](const std::optional<double>& a, const std::optional<double>& b) {
    if (a.has_value() != b.has_value()) return false;
    return !a || *a == *b || (std::isnan(*a) && std::isnan(*b));
  };
  return requirement == o.requirement && anchor_sample == o.anchor_sample && anchor_time == o.anchor_time &&
         anchor_location == o.anchor_location && satisfied == o.satisfied && vacuous == o.vacuous &&
         same(robustness, o.robustness);
}

namespace {
json number_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}
}  // namespace

std::string to_json_line(const Report& r) {
  json j = json::object();
  j["v"] = 1;
  j["requirement"] = r.requirement;
  j["anchor_time"] = r.anchor_time;
  j["anchor_location"] = r.anchor_location;
  j["satisfied"] = r.satisfied;
  j["vacuous"] = r.vacuous;
  if (r.robustness) {
    j["robustness"] = number_json(*r.robustness);
    j["verdict_sign"] = *r.robustness > 0 ? 1 : *r.robustness < 0 ? -1 : 0;
  }
  if (r.estimate) j["estimate"] = number_json(*r.estimate);
  if (r.cumulative_satisfied) j["cumulative_satisfied"] = *r.cumulative_satisfied;
  if (r.counters) {
    const auto& c = *r.counters;
    j["eval_counters"] = {{"atom_evals", c.atom_evals},
                          {"descan_calls", c.descan_calls},
                          {"spatial_tasks", c.spatial_tasks},
                          {"parallel_fanouts", c.parallel_fanouts},
                          {"sequential_spatial", c.sequential_spatial},
                          {"skipped_conjuncts", c.skipped_conjuncts}};
  }
  return j.dump();
}

Report evaluate_anchor(Monitor& monitor, const Requirement& req, std::size_t t, Loc l, const SpatialGraph& graph,
                       std::size_t anchor_sample, double anchor_time, const EvalOptions& opts) {
  Report r;
  r.requirement = req.name;
  r.anchor_sample = anchor_sample;
  r.anchor_time = anchor_time;
  r.anchor_location = graph.name(l);
  const auto before = monitor.counters();
  const auto v = monitor.boolean(req.core, t, l);
  r.satisfied = v.satisfied;
  r.vacuous = v.vacuous;
  if (!opts.boolean_only) r.robustness = monitor.robustness(req.core, t, l);
  if (opts.counters) r.counters = monitor.counters() - before;
  return r;
}

std::vector<std::size_t> anchor_samples(const Requirement& req, const SampleGrid& grid) {
  std::vector<std::size_t> out;
  if (!req.anchors.times) {
    const auto h = horizon_samples(req.core, grid.step);
    for (std::size_t t = 0; t + h < grid.count; ++t) out.push_back(t);
    return out;
  }
  const auto h = horizon_samples(req.core, grid.step);
  for (double time : *req.anchors.times) {
    const auto k = grid.index_of(time);
    if (!k)
      throw FormatError("requirement '" + req.name + "': anchor time " + format_number(time) +
                        " is not a sample of the trace");
    if (*k + h >= grid.count)
      throw FormatError("requirement '" + req.name + "': anchor time " + format_number(time) +
                        " needs samples past the end of the trace");
    out.push_back(*k);
  }
  return out;
}

std::vector<Report> check_offline(const RequirementSet& set, const SpatioTemporalSignal& signal,
                                  const SpatialGraph& graph, const DistanceIndex& index, const Labeling& labeling,
                                  const EvalOptions& opts) {
  Monitor monitor(signal, index, labeling, opts.monitor);
  std::vector<Report> out;
  for (const auto& req : set.requirements)
    for (const auto t : anchor_samples(req, signal.grid()))
      for (const auto l : req.anchors.locations)
        out.push_back(evaluate_anchor(monitor, req, t, l, graph, t, signal.grid().time_of(t), opts));
  return out;
}

}  // namespace sastl

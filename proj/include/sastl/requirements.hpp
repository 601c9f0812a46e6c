#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sastl/formula.hpp"
#include "sastl/io.hpp"
#include "sastl/monitor.hpp"
#include "sastl/parser.hpp"
#include "sastl/signal.hpp"
#include "sastl/spatial_index.hpp"
#include "sastl/templates.hpp"

namespace sastl {

/// Where and when a requirement is checked.
struct AnchorSpec {
  /// Resolved anchor locations, in the order they are reported.
  std::vector<Loc> locations;
  /// Anchor times in time units; nullopt means every sample whose horizon fits the trace.
  std::optional<std::vector<double>> times;
};

struct Requirement {
  std::string name;
  Formula formula;  // as written or translated
  Formula core;     // desugared
  AnchorSpec anchors;
};

struct RequirementSet {
  Constants constants;
  TranslationConfig translation;
  std::vector<Requirement> requirements;

  /// Union of all variables the requirements read, sorted.
  [[nodiscard]] std::vector<std::string> variables() const;
  /// Largest horizon in samples over all requirements.
  [[nodiscard]] std::size_t max_horizon_samples(double step) const;
};

struct RequirementContext {
  /// Without a graph, anchors stay unresolved and only syntax is checked.
  const SpatialGraph* graph = nullptr;
  const Labeling* labeling = nullptr;
  /// Fallback default horizon (the whole trace) when the file sets none.
  std::optional<double> trace_horizon;
};

/// Requirements JSON:
///
///   { "constants": {"GOOD": 50}, "entities": {"air quality": "AQI"},
///     "distance_units": 1.0, "hour": 3600, "default_horizon": 7200,
///     "requirements": [ { "name": "...", "formula": "..." | "template": {...},
///                         "anchors": { "locations": "all" | {"label": "psi"} | ["id", ...],
///                                      "times": "all" | [t, ...] } } ] }
///
/// Errors are FormatError naming the source, the requirement and, for formula
/// text, the line:column inside it.
RequirementSet read_requirements(std::string_view text, const RequirementContext& ctx,
                                 std::string_view source = "<requirements>");
RequirementSet load_requirements(const std::filesystem::path& path, const RequirementContext& ctx);

/// One finalized verdict for (requirement, anchor time, anchor location).
struct Report {
  std::string requirement;
  std::size_t anchor_sample = 0;
  double anchor_time = 0.0;
  std::string anchor_location;
  bool satisfied = false;
  bool vacuous = false;
  std::optional<double> robustness;  // absent in boolean-only mode
  std::optional<CounterSnapshot> counters;
  // Online only: running estimate since the last reset.
  std::optional<double> estimate;
  std::optional<bool> cumulative_satisfied;

  /// Equality on the verdict fields, ignoring counters and online extras.
  [[nodiscard]] bool same_verdict(const Report& o) const;
};

/// One JSON line (no trailing newline), schema version "v":1. Infinite robustness is "inf" / "-inf".
std::string to_json_line(const Report& r);

struct EvalOptions {
  MonitorOptions monitor;
  bool boolean_only = false;
  bool counters = false;
};

/// Evaluates one anchor on an existing monitor. `t` indexes the monitor's signal;
/// `anchor_sample` and `anchor_time` are what the report carries.
Report evaluate_anchor(Monitor& monitor, const Requirement& req, std::size_t t, Loc l, const SpatialGraph& graph,
                       std::size_t anchor_sample, double anchor_time, const EvalOptions& opts);

/// Every requirement at every anchor, ordered by requirement, anchor time, then anchor location.
std::vector<Report> check_offline(const RequirementSet& set, const SpatioTemporalSignal& signal,
                                  const SpatialGraph& graph, const DistanceIndex& index, const Labeling& labeling,
                                  const EvalOptions& opts = {});

/// Anchor samples for `req` on a grid; explicit times off the grid are rejected.
std::vector<std::size_t> anchor_samples(const Requirement& req, const SampleGrid& grid);

}  // namespace sastl

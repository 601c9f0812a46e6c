#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sastl {

/// Dense index of a location inside a SpatialGraph (graph JSON node order).
struct Loc {
  std::uint32_t value = 0;
  friend auto operator<=>(const Loc&, const Loc&) = default;
};

class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class SignalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Uniform discretization of continuous time. Sample k sits at start_time + k*step.
struct SampleGrid {
  double start_time = 0.0;
  double step = 1.0;
  std::size_t count = 1;

  SampleGrid() = default;
  SampleGrid(double start, double step_, std::size_t count_);

  [[nodiscard]] double time_of(std::size_t k) const { return start_time + static_cast<double>(k) * step; }
  /// Index of the sample at exactly `t` (within a small relative tolerance), if any.
  [[nodiscard]] std::optional<std::size_t> index_of(double t) const;
};

/// One raw observation: (time, location, variable, value). nullopt value is an explicit dropout.
struct Record {
  double time = 0.0;
  std::string location;
  std::string variable;
  std::optional<double> value;
};

/// Weighted undirected location graph G = (L, E, eta).
class SpatialGraph {
 public:
  struct Edge {
    Loc a, b;
    double weight;
  };

  SpatialGraph() = default;

  Loc add_node(std::string id);
  void add_edge(std::string_view a, std::string_view b, double weight);
  void add_edge(Loc a, Loc b, double weight);

  [[nodiscard]] std::size_t size() const { return names_.size(); }
  [[nodiscard]] const std::string& name(Loc l) const { return names_.at(l.value); }
  [[nodiscard]] const std::vector<std::string>& names() const { return names_; }
  [[nodiscard]] std::optional<Loc> find(std::string_view id) const;
  [[nodiscard]] Loc at(std::string_view id) const;
  [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
  /// Adjacency as (neighbor, weight) lists.
  [[nodiscard]] const std::vector<std::vector<std::pair<Loc, double>>>& adjacency() const { return adj_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, Loc> ids_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::pair<Loc, double>>> adj_;
};

/// Labeling function L -> 2^P.
class Labeling {
 public:
  Labeling() = default;
  explicit Labeling(std::size_t location_count) : labels_(location_count) {}

  void resize(std::size_t location_count) { labels_.resize(location_count); }
  void add(Loc l, std::string proposition);

  [[nodiscard]] bool has(Loc l, std::string_view proposition) const;
  [[nodiscard]] const std::vector<std::string>& labels(Loc l) const { return labels_.at(l.value); }
  [[nodiscard]] bool knows(std::string_view proposition) const;
  [[nodiscard]] std::size_t size() const { return labels_.size(); }

 private:
  std::vector<std::vector<std::string>> labels_;  // each sorted, unique
  std::vector<std::string> propositions_;         // sorted, unique
};

/// The trace omega: sample x location x variable -> real or UNDEFINED.
///
/// Values live in one flat row-major buffer (sample, location, variable) with a
/// quiet NaN standing for UNDEFINED. The online monitor is the only writer
/// after construction (append_sample / drop_front); evaluators treat it as read-only.
class SpatioTemporalSignal {
 public:
  SpatioTemporalSignal(SampleGrid grid, std::vector<std::string> locations, std::vector<std::string> variables);

  [[nodiscard]] const SampleGrid& grid() const { return grid_; }
  [[nodiscard]] std::size_t sample_count() const { return grid_.count; }
  [[nodiscard]] const std::vector<std::string>& locations() const { return locations_; }
  [[nodiscard]] const std::vector<std::string>& variables() const { return variables_; }

  [[nodiscard]] std::optional<std::size_t> variable_index(std::string_view name) const;
  [[nodiscard]] std::optional<Loc> location_index(std::string_view name) const;

  /// Checked lookup by name. Throws LookupError on bad sample, location or variable.
  [[nodiscard]] std::optional<double> value_at(std::size_t t, std::string_view location, std::string_view variable) const;

  /// Unchecked hot-path lookup; returns NaN for UNDEFINED.
  [[nodiscard]] double raw(std::size_t t, Loc l, std::size_t var) const {
    return values_[(t * locations_.size() + l.value) * variables_.size() + var];
  }

  void set(std::size_t t, Loc l, std::size_t var, std::optional<double> v);

  /// Appends one sample row laid out as [location][variable].
  void append_sample(std::span<const double> row);
  /// Drops the first n samples, shifting start_time forward.
  void drop_front(std::size_t n);

  static constexpr double undefined() { return std::numeric_limits<double>::quiet_NaN(); }

 private:
  SampleGrid grid_;
  std::vector<std::string> locations_;
  std::vector<std::string> variables_;
  std::unordered_map<std::string, Loc> location_ids_;
  std::unordered_map<std::string, std::size_t> variable_ids_;
  std::vector<double> values_;
};

/// Zero-order-hold resampler shared by offline normalization and the online stream.
///
/// A grid sample at time t_k takes the latest record with time <= t_k for its
/// (location, variable); before the first such record the cell is UNDEFINED.
class HoldResampler {
 public:
  HoldResampler(std::size_t location_count, std::size_t variable_count);

  void apply(Loc l, std::size_t var, std::optional<double> v);
  [[nodiscard]] std::span<const double> row() const { return held_; }

 private:
  std::size_t variable_count_;
  std::vector<double> held_;
};

/// Tolerance used when comparing record times against grid ticks.
double time_epsilon(double step);

/// Resample irregular records onto a uniform grid with zero-order hold.
///
/// The grid starts at the earliest record and ends at the last tick not after
/// the latest record. Locations and variables are taken from the records in
/// first-seen order unless given explicitly; records naming locations outside
/// an explicit list are rejected.
SpatioTemporalSignal normalize_frequency(std::span<const Record> records, double target_step,
                                         std::optional<std::vector<std::string>> locations = std::nullopt,
                                         std::optional<std::vector<std::string>> variables = std::nullopt);

}  // namespace sastl

#include "sastl/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sastl {

SampleGrid::SampleGrid(double start, double step_, std::size_t count_)
    : start_time(start), step(step_), count(count_) {
  if (!(step > 0.0) || !std::isfinite(step)) throw SignalError("sample grid step must be positive");
  if (count == 0) throw SignalError("sample grid needs at least one sample");
}

double time_epsilon(double step) { return 1e-9 * std::max(1.0, std::abs(step)); }

std::optional<std::size_t> SampleGrid::index_of(double t) const {
  const double k = std::round((t - start_time) / step);
  if (k < 0.0 || k >= static_cast<double>(count)) return std::nullopt;
  const auto idx = static_cast<std::size_t>(k);
  if (std::abs(time_of(idx) - t) > time_epsilon(step)) return std::nullopt;
  return idx;
}

// ---------------------------------------------------------------------------

Loc SpatialGraph::add_node(std::string id) {
  if (ids_.contains(id)) throw SignalError("duplicate graph node '" + id + "'");
  const Loc l{static_cast<std::uint32_t>(names_.size())};
  ids_.emplace(id, l);
  names_.push_back(std::move(id));
  adj_.emplace_back();
  return l;
}

void SpatialGraph::add_edge(std::string_view a, std::string_view b, double weight) {
  add_edge(at(a), at(b), weight);
}

void SpatialGraph::add_edge(Loc a, Loc b, double weight) {
  if (a.value >= size() || b.value >= size()) throw LookupError("edge endpoint out of range");
  if (a == b) throw SignalError("self-loop on node '" + names_[a.value] + "'");
  if (!(weight >= 0.0) || !std::isfinite(weight))
    throw SignalError("edge weight must be finite and non-negative");
  edges_.push_back({a, b, weight});
  adj_[a.value].emplace_back(b, weight);
  adj_[b.value].emplace_back(a, weight);
}

std::optional<Loc> SpatialGraph::find(std::string_view id) const {
  if (auto it = ids_.find(std::string(id)); it != ids_.end()) return it->second;
  return std::nullopt;
}

Loc SpatialGraph::at(std::string_view id) const {
  if (auto l = find(id)) return *l;
  throw LookupError("unknown location '" + std::string(id) + "'");
}

// ---------------------------------------------------------------------------

void Labeling::add(Loc l, std::string proposition) {
  if (l.value >= labels_.size()) throw LookupError("label for location out of range");
  auto& set = labels_[l.value];
  if (auto it = std::lower_bound(set.begin(), set.end(), proposition); it == set.end() || *it != proposition)
    set.insert(it, proposition);
  if (auto it = std::lower_bound(propositions_.begin(), propositions_.end(), proposition);
      it == propositions_.end() || *it != proposition)
    propositions_.insert(it, std::move(proposition));
}

bool Labeling::has(Loc l, std::string_view proposition) const {
  if (l.value >= labels_.size()) return false;
  const auto& set = labels_[l.value];
  return std::binary_search(set.begin(), set.end(), proposition, std::less<>{});
}

bool Labeling::knows(std::string_view proposition) const {
  return std::binary_search(propositions_.begin(), propositions_.end(), proposition, std::less<>{});
}

// ---------------------------------------------------------------------------

SpatioTemporalSignal::SpatioTemporalSignal(SampleGrid grid, std::vector<std::string> locations,
                                           std::vector<std::string> variables)
    : grid_(grid), locations_(std::move(locations)), variables_(std::move(variables)) {
  for (std::size_t i = 0; i < locations_.size(); ++i)
    if (!location_ids_.emplace(locations_[i], Loc{static_cast<std::uint32_t>(i)}).second)
      throw SignalError("duplicate location '" + locations_[i] + "'");
  for (std::size_t i = 0; i < variables_.size(); ++i)
    if (!variable_ids_.emplace(variables_[i], i).second)
      throw SignalError("duplicate variable '" + variables_[i] + "'");
  values_.assign(grid_.count * locations_.size() * variables_.size(), undefined());
}

std::optional<std::size_t> SpatioTemporalSignal::variable_index(std::string_view name) const {
  if (auto it = variable_ids_.find(std::string(name)); it != variable_ids_.end()) return it->second;
  return std::nullopt;
}

std::optional<Loc> SpatioTemporalSignal::location_index(std::string_view name) const {
  if (auto it = location_ids_.find(std::string(name)); it != location_ids_.end()) return it->second;
  return std::nullopt;
}

std::optional<double> SpatioTemporalSignal::value_at(std::size_t t, std::string_view location,
                                                     std::string_view variable) const {
  if (t >= grid_.count) throw LookupError("sample index " + std::to_string(t) + " outside grid");
  const auto l = location_index(location);
  if (!l) throw LookupError("unknown location '" + std::string(location) + "'");
  const auto x = variable_index(variable);
  if (!x) throw LookupError("unknown variable '" + std::string(variable) + "'");
  const double v = raw(t, *l, *x);
  if (std::isnan(v)) return std::nullopt;
  return v;
}

void SpatioTemporalSignal::set(std::size_t t, Loc l, std::size_t var, std::optional<double> v) {
  if (t >= grid_.count || l.value >= locations_.size() || var >= variables_.size())
    throw LookupError("signal cell out of range");
  if (v && std::isnan(*v)) throw SignalError("NaN is not a valid signal value");
  values_[(t * locations_.size() + l.value) * variables_.size() + var] = v.value_or(undefined());
}

void SpatioTemporalSignal::append_sample(std::span<const double> row) {
  if (row.size() != locations_.size() * variables_.size()) throw SignalError("sample row has wrong width");
  values_.insert(values_.end(), row.begin(), row.end());
  ++grid_.count;
}

void SpatioTemporalSignal::drop_front(std::size_t n) {
  n = std::min(n, grid_.count);
  const auto width = locations_.size() * variables_.size();
  values_.erase(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(n * width));
  grid_.start_time += static_cast<double>(n) * grid_.step;
  grid_.count -= n;
}

// ---------------------------------------------------------------------------

HoldResampler::HoldResampler(std::size_t location_count, std::size_t variable_count)
    : variable_count_(variable_count),
      held_(location_count * variable_count, SpatioTemporalSignal::undefined()) {}

void HoldResampler::apply(Loc l, std::size_t var, std::optional<double> v) {
  held_[l.value * variable_count_ + var] = v.value_or(SpatioTemporalSignal::undefined());
}

SpatioTemporalSignal normalize_frequency(std::span<const Record> records, double target_step,
                                         std::optional<std::vector<std::string>> locations,
                                         std::optional<std::vector<std::string>> variables) {
  if (!(target_step > 0.0)) throw SignalError("target step must be positive");
  if (records.empty()) throw SignalError("empty signal: no records to normalize");

  const bool strict_locations = locations.has_value();
  std::vector<std::string> locs = locations.value_or(std::vector<std::string>{});
  std::vector<std::string> vars = variables.value_or(std::vector<std::string>{});
  auto note = [](std::vector<std::string>& list, const std::string& s) {
    if (std::find(list.begin(), list.end(), s) == list.end()) list.push_back(s);
  };
  for (const auto& r : records) {
    if (!std::isfinite(r.time)) throw SignalError("record time must be finite");
    if (strict_locations) {
      if (std::find(locs.begin(), locs.end(), r.location) == locs.end())
        throw LookupError("record names unknown location '" + r.location + "'");
    } else {
      note(locs, r.location);
    }
    note(vars, r.variable);
  }

  // Stable sort keeps file order among equal timestamps, so the later record wins.
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return records[a].time < records[b].time; });

  const double start = records[order.front()].time;
  const double end = records[order.back()].time;
  const double eps = time_epsilon(target_step);
  const auto count = static_cast<std::size_t>(std::floor((end - start + eps) / target_step)) + 1;

  SpatioTemporalSignal signal(SampleGrid(start, target_step, count), locs, vars);
  HoldResampler hold(locs.size(), vars.size());
  std::size_t next = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const double tick = signal.grid().time_of(k);
    while (next < order.size() && records[order[next]].time <= tick + eps) {
      const auto& r = records[order[next]];
      hold.apply(*signal.location_index(r.location), *signal.variable_index(r.variable), r.value);
      ++next;
    }
    const auto row = hold.row();
    for (std::size_t l = 0; l < locs.size(); ++l)
      for (std::size_t x = 0; x < vars.size(); ++x) {
        const double v = row[l * vars.size() + x];
        signal.set(k, Loc{static_cast<std::uint32_t>(l)}, x, std::isnan(v) ? std::nullopt : std::optional(v));
      }
  }
  return signal;
}

}  // namespace sastl

#include "sastl/online.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sastl {

ResetPolicy ResetPolicy::parse(std::string_view text) {
  if (text == "keep") return {};
  if (text == "reset_on_violation") return {Kind::OnViolation, 0.0};
  constexpr std::string_view prefix = "reset_at:";
  if (text.starts_with(prefix)) {
    const std::string rest(text.substr(prefix.size()));
    std::size_t used = 0;
    double at = 0.0;
    try {
      at = std::stod(rest, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == rest.size() && !rest.empty() && std::isfinite(at)) return {Kind::At, at};
  }
  throw std::invalid_argument("unknown reset policy '" + std::string(text) +
                              "' (expected keep, reset_on_violation or reset_at:T)");
}

StreamOrderError::StreamOrderError(double offending, double last)
    : std::runtime_error("record at t=" + std::to_string(offending) + " arrived after t=" + std::to_string(last)),
      offending_(offending) {}

StreamState::StreamState(const RequirementSet& set, const SpatialGraph& graph, const DistanceIndex& index,
                         const Labeling& labeling, StreamConfig cfg)
    : set_(set),
      graph_(graph),
      index_(index),
      labeling_(labeling),
      cfg_(std::move(cfg)),
      variables_(set.variables()),
      hold_(graph.size(), variables_.size()) {
  if (!(cfg_.step > 0.0) || !std::isfinite(cfg_.step)) throw StreamConfigError("stream step must be positive");
  if (index.size() != graph.size()) throw StreamConfigError("distance index does not match the graph");
  for (const auto& req : set_.requirements) {
    Track t;
    t.horizon = horizon_samples(req.core, cfg_.step);
    window_ = std::max(window_, t.horizon + 1);
    tracks_.push_back(t);
  }
  if (cfg_.max_window && *cfg_.max_window < window_)
    throw StreamConfigError("stream window of " + std::to_string(*cfg_.max_window) + " samples is too small; " +
                            "the longest requirement horizon needs " + std::to_string(window_));
}

std::vector<Report> StreamState::feed(std::span<const Record> chunk) {
  if (finished_) throw std::logic_error("stream already finished");
  std::optional<double> last = last_time_;
  for (const auto& r : chunk) {
    if (!std::isfinite(r.time)) throw SignalError("record time must be finite");
    if (last && r.time < *last) throw StreamOrderError(r.time, *last);
    if (!graph_.find(r.location)) throw LookupError("record names unknown location '" + r.location + "'");
    last = r.time;
  }

  std::vector<Report> out;
  const double eps = time_epsilon(cfg_.step);
  for (const auto& r : chunk) {
    if (!start_) {
      start_ = r.time;
      signal_ = std::make_unique<SpatioTemporalSignal>(SampleGrid(r.time, cfg_.step, 1), graph_.names(), variables_);
      signal_->drop_front(1);
      monitor_ = std::make_unique<Monitor>(*signal_, index_, labeling_, cfg_.eval.monitor);
    }
    while (tick_time(closed_) + eps < r.time) close_sample(out);
    last_time_ = r.time;
    const auto var = std::lower_bound(variables_.begin(), variables_.end(), r.variable);
    if (var == variables_.end() || *var != r.variable) {
      ++ignored_;
      continue;
    }
    hold_.apply(*graph_.find(r.location), static_cast<std::size_t>(var - variables_.begin()), r.value);
  }
  return out;
}

std::vector<Report> StreamState::finish() {
  if (finished_) return {};
  finished_ = true;
  std::vector<Report> out;
  if (!start_) return out;
  const double eps = time_epsilon(cfg_.step);
  const auto count = static_cast<std::size_t>(std::floor((*last_time_ - *start_ + eps) / cfg_.step)) + 1;
  while (closed_ < count) close_sample(out);
  return out;
}

void StreamState::close_sample(std::vector<Report>& out) {
  signal_->append_sample(hold_.row());
  ++closed_;
  finalize(out);
}

void StreamState::finalize(std::vector<Report>& out) {
  const double eps = time_epsilon(cfg_.step);
  for (std::size_t i = 0; i < tracks_.size(); ++i) {
    auto& track = tracks_[i];
    const auto& req = set_.requirements[i];
    for (; track.next_anchor + track.horizon < closed_; ++track.next_anchor) {
      const std::size_t a = track.next_anchor;
      const double time = tick_time(a);
      if (req.anchors.times &&
          std::none_of(req.anchors.times->begin(), req.anchors.times->end(),
                       [&](double x) { return std::abs(x - time) <= eps; }))
        continue;
      for (const auto l : req.anchors.locations) {
        auto r = evaluate_anchor(*monitor_, req, a - base_, l, graph_, a, time, cfg_.eval);
        account(track, r);
        out.push_back(std::move(r));
      }
    }
  }
  std::size_t keep_from = closed_;
  for (const auto& t : tracks_) keep_from = std::min(keep_from, t.next_anchor);
  signal_->drop_front(keep_from - base_);
  base_ = keep_from;
}

void StreamState::account(Track& track, Report& r) {
  const auto& policy = cfg_.policy;
  if (policy.kind == ResetPolicy::Kind::At && !track.reset_done && r.anchor_time >= policy.at - time_epsilon(cfg_.step)) {
    track.estimate.reset();
    track.all_satisfied = true;
    track.reset_done = true;
  }
  if (policy.kind == ResetPolicy::Kind::OnViolation && r.anchor_sample < track.skip_until) return;

  if (r.robustness) track.estimate = track.estimate ? std::min(*track.estimate, *r.robustness) : *r.robustness;
  track.all_satisfied = track.all_satisfied && r.satisfied;
  r.estimate = track.estimate;
  r.cumulative_satisfied = track.all_satisfied;

  if (policy.kind == ResetPolicy::Kind::OnViolation && !r.satisfied) {
    track.estimate.reset();
    track.all_satisfied = true;
    track.skip_until = r.anchor_sample + 1;
  }
}

std::optional<double> StreamState::current_estimate(std::string_view requirement) const {
  for (std::size_t i = 0; i < set_.requirements.size(); ++i)
    if (set_.requirements[i].name == requirement) return tracks_[i].estimate;
  throw LookupError("unknown requirement '" + std::string(requirement) + "'");
}

}  // namespace sastl

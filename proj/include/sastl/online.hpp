#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sastl/monitor.hpp"
#include "sastl/requirements.hpp"
#include "sastl/signal.hpp"
#include "sastl/spatial_index.hpp"

namespace sastl {

/// Reset behaviour for the running estimate.
struct ResetPolicy {
  enum class Kind { Keep, OnViolation, At };
  Kind kind = Kind::Keep;
  double at = 0.0;  // Kind::At: reset once at the first anchor with time >= at

  /// "keep", "reset_on_violation" or "reset_at:T".
  static ResetPolicy parse(std::string_view text);
};

class StreamOrderError : public std::runtime_error {
 public:
  StreamOrderError(double offending, double last);
  [[nodiscard]] double offending_time() const { return offending_; }

 private:
  double offending_;
};

class StreamConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StreamConfig {
  double step = 1.0;
  ResetPolicy policy;
  EvalOptions eval;
  /// Upper bound on buffered samples; setup fails if a requirement needs more.
  std::optional<std::size_t> max_window;
};

/// Online monitor. Records arrive in non-decreasing time order; a grid sample is
/// closed once a strictly later record arrives (or on finish()), and an anchor is
/// finalized as soon as every sample of its horizon is closed. Each
/// (requirement, anchor sample, anchor location) is reported exactly once.
///
/// The grid starts at the first record's time, so any complete trace fed in any
/// chunking yields the same reports as check_offline on that trace.
/// One feeder at a time.
class StreamState {
 public:
  StreamState(const RequirementSet& set, const SpatialGraph& graph, const DistanceIndex& index,
              const Labeling& labeling, StreamConfig cfg);

  /// Appends records and returns reports finalized by them. An out-of-order
  /// record rejects the whole chunk before anything is applied.
  std::vector<Report> feed(std::span<const Record> chunk);
  /// Closes the last sample and returns the remaining finalizable reports.
  std::vector<Report> finish();

  /// Minimum robustness over anchors finalized since the last reset; nullopt before any.
  [[nodiscard]] std::optional<double> current_estimate(std::string_view requirement) const;

  /// Samples closed so far.
  [[nodiscard]] std::size_t closed_samples() const { return closed_; }
  /// Samples currently held in the rolling buffer.
  [[nodiscard]] std::size_t buffered_samples() const { return signal_ ? signal_->sample_count() : 0; }
  [[nodiscard]] std::size_t window() const { return window_; }
  /// Records whose variable no requirement reads.
  [[nodiscard]] std::size_t ignored_records() const { return ignored_; }

 private:
  struct Track {
    std::size_t next_anchor = 0;   // global sample index
    std::size_t horizon = 0;       // samples
    std::optional<double> estimate;
    bool all_satisfied = true;
    bool reset_done = false;       // ResetPolicy::At
    std::size_t skip_until = 0;    // estimate restarts at this anchor after a violation
  };

  void close_sample(std::vector<Report>& out);
  void finalize(std::vector<Report>& out);
  void account(Track& track, Report& r);
  double tick_time(std::size_t k) const { return *start_ + static_cast<double>(k) * cfg_.step; }

  const RequirementSet& set_;
  const SpatialGraph& graph_;
  const DistanceIndex& index_;
  const Labeling& labeling_;
  StreamConfig cfg_;
  std::vector<std::string> variables_;
  std::size_t window_ = 1;
  std::vector<Track> tracks_;

  std::optional<double> start_;  // first record time
  std::optional<double> last_time_;
  std::size_t closed_ = 0;  // global index of the next sample to close
  std::size_t base_ = 0;    // global index of the buffer's first sample
  HoldResampler hold_;
  std::unique_ptr<SpatioTemporalSignal> signal_;
  std::unique_ptr<Monitor> monitor_;
  std::size_t ignored_ = 0;
  bool finished_ = false;
};

}  // namespace sastl

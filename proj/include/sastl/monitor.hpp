#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "sastl/formula.hpp"
#include "sastl/parallel.hpp"
#include "sastl/signal.hpp"
#include "sastl/spatial_index.hpp"

namespace sastl {

/// Boolean outcome. `vacuous` marks satisfaction that rests only on the
/// undefined-value and empty-domain rules; it implies `satisfied`.
struct Verdict {
  bool satisfied = false;
  bool vacuous = false;
  friend bool operator==(const Verdict&, const Verdict&) = default;
};

class EvaluationError : public std::runtime_error {
 public:
  explicit EvaluationError(const std::string& what, std::optional<std::string> location = std::nullopt)
      : std::runtime_error(what), location_(std::move(location)) {}
  [[nodiscard]] const std::optional<std::string>& location() const { return location_; }

 private:
  std::optional<std::string> location_;
};

/// A verdict would need samples past the end of the trace.
class IncompleteTraceError : public EvaluationError {
 public:
  IncompleteTraceError(std::size_t first_missing, std::size_t sample_count)
      : EvaluationError("trace ends at sample " + std::to_string(sample_count) + " but sample " +
                        std::to_string(first_missing) + " is required"),
        first_missing_(first_missing) {}
  [[nodiscard]] std::size_t first_missing_sample() const { return first_missing_; }

 private:
  std::size_t first_missing_;
};

struct CounterSnapshot {
  std::uint64_t atom_evals = 0;
  std::uint64_t descan_calls = 0;
  std::uint64_t spatial_tasks = 0;       // per-location subformula evaluations under counting
  std::uint64_t parallel_fanouts = 0;    // spatial operators evaluated on the pool
  std::uint64_t sequential_spatial = 0;  // spatial operators evaluated inline
  std::uint64_t skipped_conjuncts = 0;   // conjuncts never evaluated thanks to short-circuit

  friend bool operator==(const CounterSnapshot&, const CounterSnapshot&) = default;
  CounterSnapshot operator-(const CounterSnapshot& o) const;
};

struct MonitorOptions {
  /// Evaluate the cheaper conjunct first.
  bool reorder = true;
  ParallelConfig parallel;
  /// Shared pool; created on demand when parallel.worker_count > 1 and this is empty.
  std::shared_ptr<WorkerPool> pool;
};

/// Selection delta: the k-th largest element (1-based). k > |S| gives -inf.
double kth_largest(std::span<const double> values, std::size_t k);

/// Smallest k in [0, n] such that op over a 0/1 pattern with k ones satisfies
/// `cmp c`, for cmp in {>, >=}. nullopt when no k works.
std::optional<std::size_t> required_count(SpatialOp op, Cmp cmp, double c, std::size_t n);

/// Boolean value of op applied to a 0/1 pattern with `k` ones out of `n`.
double counting_value(SpatialOp op, std::size_t k, std::size_t n);

/// Recursive Boolean and quantitative evaluator over one signal, graph index and labeling.
///
/// Formulas must be desugared (see desugar()). All inputs are borrowed and must
/// outlive the monitor. Evaluation is thread-safe; counters are shared.
class Monitor {
 public:
  Monitor(const SpatioTemporalSignal& signal, const DistanceIndex& index, const Labeling& labeling,
          MonitorOptions options = {});

  /// Satisfaction at (t, l). Throws IncompleteTraceError if the horizon runs past the trace.
  Verdict boolean(const Formula& f, std::size_t t, Loc l);
  /// Robustness at (t, l); +inf / -inf mark vacuity and infeasible thresholds.
  double robustness(const Formula& f, std::size_t t, Loc l);

  // Operator-level entry points. `n` must be a node of the matching kind.
  Verdict until_b(const Node& n, std::size_t t, Loc l);
  Verdict aggregate_b(const Node& n, std::size_t t, Loc l);
  Verdict counting_b(const Node& n, std::size_t t, Loc l);
  Verdict and_reordered(const Node& n, std::size_t t, Loc l);
  double until_q(const Node& n, std::size_t t, Loc l);
  double aggregate_q(const Node& n, std::size_t t, Loc l);
  double counting_q(const Node& n, std::size_t t, Loc l);

  /// Monitoring cost of `n` anchored at `l`; memoized per (node, location), so
  /// `n` must outlive the monitor.
  double cost(const Node& n, Loc l);

  /// L^l_D with the labeling predicate cached per psi.
  std::vector<Loc> scan(Loc l, const SpatialDomain& d);

  [[nodiscard]] CounterSnapshot counters() const;
  void reset_counters();

  [[nodiscard]] const SpatioTemporalSignal& signal() const { return signal_; }
  [[nodiscard]] const DistanceIndex& index() const { return index_; }
  [[nodiscard]] const Labeling& labeling() const { return labeling_; }
  [[nodiscard]] const MonitorOptions& options() const { return options_; }

 private:
  struct Outcome {
    bool value;
    bool vacuous;  // decided by vacuity rules only
  };

  Outcome eval_b(const Node& n, std::size_t t, Loc l);
  double eval_q(const Node& n, std::size_t t, Loc l);
  Outcome until_outcome(const Node& n, std::size_t t, Loc l);
  Outcome and_outcome(const Node& n, std::size_t t, Loc l);
  Outcome aggregate_outcome(const Node& n, std::size_t t, Loc l);
  Outcome counting_outcome(const Node& n, std::size_t t, Loc l);

  std::size_t variable(const Node& n) const;
  const std::vector<char>& psi_mask(const Psi& psi);
  bool fan_out(std::size_t tasks);
  void check_window(std::size_t t, std::size_t last) const;

  /// Defined values of x over L^l_D at t, in scan order.
  std::vector<double> alpha(const Node& n, std::size_t t, Loc l);

  template <typename Fn>
  void for_each_location(std::span<const Loc> locs, Fn&& fn);

  const SpatioTemporalSignal& signal_;
  const DistanceIndex& index_;
  const Labeling& labeling_;
  MonitorOptions options_;

  // Caches are keyed by node address; roots stay alive as long as the monitor.
  void retain(const Formula& f);
  std::mutex roots_mu_;
  std::unordered_map<const Node*, Formula> roots_;

  std::shared_mutex psi_mu_;
  std::unordered_map<const PsiNode*, std::vector<char>> psi_masks_;
  std::shared_mutex cost_mu_;
  std::map<std::pair<const Node*, std::uint32_t>, double> cost_memo_;

  struct Counters {
    std::atomic<std::uint64_t> atom_evals{0}, descan_calls{0}, spatial_tasks{0}, parallel_fanouts{0},
        sequential_spatial{0}, skipped_conjuncts{0};
  } counters_;
};

/// One-shot helpers over a fresh Monitor; `f` may contain derived operators.
Verdict monitor_b(const Formula& f, const SpatioTemporalSignal& signal, std::size_t t, Loc l,
                  const DistanceIndex& index, const Labeling& labeling, MonitorOptions options = {});
double monitor_q(const Formula& f, const SpatioTemporalSignal& signal, std::size_t t, Loc l,
                 const DistanceIndex& index, const Labeling& labeling, MonitorOptions options = {});

/// Spatial operators on an explicit worker configuration. `node` must be a
/// Count (counting_*) or Aggregate (aggregate_*) node whose subformula is desugared.
Verdict counting_parallel_b(const Node& node, const SpatioTemporalSignal& signal, std::size_t t, Loc l,
                            const DistanceIndex& index, const Labeling& labeling, const ParallelConfig& cfg);
double counting_parallel_q(const Node& node, const SpatioTemporalSignal& signal, std::size_t t, Loc l,
                           const DistanceIndex& index, const Labeling& labeling, const ParallelConfig& cfg);
Verdict aggregate_parallel_b(const Node& node, const SpatioTemporalSignal& signal, std::size_t t, Loc l,
                             const DistanceIndex& index, const Labeling& labeling, const ParallelConfig& cfg);
double aggregate_parallel_q(const Node& node, const SpatioTemporalSignal& signal, std::size_t t, Loc l,
                            const DistanceIndex& index, const Labeling& labeling, const ParallelConfig& cfg);

}  // namespace sastl

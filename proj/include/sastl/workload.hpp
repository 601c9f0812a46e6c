#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sastl/monitor.hpp"
#include "sastl/signal.hpp"
#include "sastl/spatial_index.hpp"

namespace sastl {

/// Synthetic city for benchmarks and smoke tests.
struct WorkloadSpec {
  enum class Topology { Lattice, RandomGeometric };
  Topology topology = Topology::Lattice;
  std::size_t rows = 40;  // lattice shape; node count is rows * cols
  std::size_t cols = 50;
  std::size_t nodes = 2000;  // random-geometric only
  double radius = 0.04;      // random-geometric connection radius in the unit square
  /// Label -> fraction of locations carrying it, each in [0, 1].
  std::vector<std::pair<std::string, double>> poi_densities = {{"School", 0.05}};
  std::size_t samples = 100;
  double step = 1.0;
  /// Probability that an Alert sample is raised (value 1); otherwise it stays below 0.9.
  double alert_rate = 0.002;
  std::uint64_t seed = 1;

  [[nodiscard]] std::size_t node_count() const { return topology == Topology::Lattice ? rows * cols : nodes; }
};

/// Throws std::invalid_argument on an invalid spec.
void check(const WorkloadSpec& spec);

struct Workload {
  SpatialGraph graph;
  Labeling labeling;
  std::unique_ptr<SpatioTemporalSignal> signal;  // variables Noise and Alert
  DistanceIndex index;
};

/// Deterministic for a given spec (including seed).
Workload generate_workload(const WorkloadSpec& spec);

struct BenchCase {
  std::string name;
  std::string formula;
  Loc anchor{0};
  std::vector<std::size_t> anchor_samples;
};

/// The PoI-guarded conjunction and the spatial-heavy requirement.
std::vector<BenchCase> default_bench_cases(const Workload& w);

struct BenchMode {
  std::string name;  // standard, reordered, parallelN
  bool reorder = true;
  std::size_t workers = 1;

  /// Parses a comma-separated list such as "standard,reordered,parallel4".
  static std::vector<BenchMode> parse_list(std::string_view text);
};

class BenchDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BenchRow {
  std::string case_name;
  std::string mode;
  double median_seconds = 0.0;
  std::vector<double> runs;
  std::size_t satisfied = 0;  // anchors satisfied
  std::size_t anchors = 0;
  CounterSnapshot counters;   // from one run
};

/// Times every case under every mode (median of `runs` runs, Boolean verdicts).
/// Throws BenchDivergence, before reporting any timing, if modes disagree.
std::vector<BenchRow> run_bench(const Workload& w, const std::vector<BenchCase>& cases,
                                const std::vector<BenchMode>& modes, std::size_t runs = 3);

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);
/// Columns per mode with speedup relative to the first mode.
void write_bench_table(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace sastl

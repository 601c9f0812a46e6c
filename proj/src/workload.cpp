#include "sastl/workload.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include "sastl/parser.hpp"

namespace sastl {

void check(const WorkloadSpec& spec) {
  if (spec.node_count() == 0) throw std::invalid_argument("workload needs at least one location");
  if (spec.samples == 0) throw std::invalid_argument("workload needs at least one sample");
  if (!(spec.step > 0.0)) throw std::invalid_argument("workload step must be positive");
  if (!(spec.alert_rate >= 0.0 && spec.alert_rate <= 1.0)) throw std::invalid_argument("alert rate must lie in [0, 1]");
  if (spec.topology == WorkloadSpec::Topology::RandomGeometric && !(spec.radius > 0.0))
    throw std::invalid_argument("random-geometric radius must be positive");
  for (const auto& [label, d] : spec.poi_densities)
    if (!(d >= 0.0 && d <= 1.0)) throw std::invalid_argument("density of '" + label + "' must lie in [0, 1]");
}

Workload generate_workload(const WorkloadSpec& spec) {
  check(spec);
  std::mt19937_64 rng(spec.seed);
  Workload w;
  const std::size_t n = spec.node_count();

  if (spec.topology == WorkloadSpec::Topology::Lattice) {
    for (std::size_t r = 0; r < spec.rows; ++r)
      for (std::size_t c = 0; c < spec.cols; ++c) w.graph.add_node("n" + std::to_string(r) + "_" + std::to_string(c));
    for (std::size_t r = 0; r < spec.rows; ++r)
      for (std::size_t c = 0; c < spec.cols; ++c) {
        const auto id = static_cast<std::uint32_t>(r * spec.cols + c);
        if (c + 1 < spec.cols) w.graph.add_edge(Loc{id}, Loc{id + 1}, 1.0);
        if (r + 1 < spec.rows) w.graph.add_edge(Loc{id}, Loc{static_cast<std::uint32_t>(id + spec.cols)}, 1.0);
      }
  } else {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::pair<double, double>> pts(n);
    for (std::size_t i = 0; i < n; ++i) {
      w.graph.add_node("n" + std::to_string(i));
      pts[i] = {unit(rng), unit(rng)};
    }
    // Scale so typical neighbour distances are around one unit.
    const double scale = std::sqrt(static_cast<double>(n));
    for (std::uint32_t i = 0; i < n; ++i)
      for (std::uint32_t j = i + 1; j < n; ++j) {
        const double d = std::hypot(pts[i].first - pts[j].first, pts[i].second - pts[j].second);
        if (d <= spec.radius) w.graph.add_edge(Loc{i}, Loc{j}, d * scale);
      }
  }

  w.labeling.resize(n);
  std::vector<std::uint32_t> order(n);
  for (const auto& [label, density] : spec.poi_densities) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const auto k = static_cast<std::size_t>(std::llround(density * static_cast<double>(n)));
    for (std::size_t i = 0; i < k; ++i) w.labeling.add(Loc{order[i]}, label);
  }

  w.signal = std::make_unique<SpatioTemporalSignal>(SampleGrid(0.0, spec.step, spec.samples), w.graph.names(),
                                                    std::vector<std::string>{"Noise", "Alert"});
  std::uniform_real_distribution<double> base_noise(45.0, 60.0);
  std::normal_distribution<double> jitter(0.0, 4.0);
  std::bernoulli_distribution alert(spec.alert_rate);
  std::uniform_real_distribution<double> calm(0.0, 0.9);
  std::vector<double> base(n);
  for (auto& b : base) b = base_noise(rng);
  for (std::size_t t = 0; t < spec.samples; ++t)
    for (std::uint32_t l = 0; l < n; ++l) {
      w.signal->set(t, Loc{l}, 0, base[l] + jitter(rng));
      w.signal->set(t, Loc{l}, 1, alert(rng) ? 1.0 : calm(rng));
    }

  w.index = build_index(w.graph);
  return w;
}

std::vector<BenchCase> default_bench_cases(const Workload& w) {
  const std::size_t count = w.signal->sample_count();
  constexpr std::size_t kHorizon = 20;
  std::vector<std::size_t> all, sparse;
  for (std::size_t t = 0; t + kHorizon < count; ++t) {
    all.push_back(t);
    if (t % 10 == 0) sparse.push_back(t);
  }
  return {
      {"poi_guarded_conjunction",
       "C{avg}[0, inf; School](F[0, 20](A{max}[0, 4; true](Noise > 60) & Alert > 0.95)) > 0.5", Loc{0}, all},
      {"spatial_heavy", "C{avg}[0, inf; true](G[0, 20](A{avg}[0, 3; true](Noise < 75))) > 0.5", Loc{0}, sparse},
  };
}

std::vector<BenchMode> BenchMode::parse_list(std::string_view text) {
  std::vector<BenchMode> out;
  std::stringstream ss{std::string(text)};
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "standard") {
      out.push_back({item, false, 1});
    } else if (item == "reordered") {
      out.push_back({item, true, 1});
    } else if (item.starts_with("parallel")) {
      const auto digits = item.substr(8);
      if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit) || std::stoul(digits) == 0)
        throw std::invalid_argument("bad mode '" + item + "' (expected parallelN with N >= 1)");
      out.push_back({item, true, std::stoul(digits)});
    } else {
      throw std::invalid_argument("unknown mode '" + item + "' (expected standard, reordered or parallelN)");
    }
  }
  if (out.empty()) throw std::invalid_argument("no bench modes given");
  return out;
}

std::vector<BenchRow> run_bench(const Workload& w, const std::vector<BenchCase>& cases,
                                const std::vector<BenchMode>& modes, std::size_t runs) {
  if (runs == 0) throw std::invalid_argument("bench needs at least one run");
  std::vector<BenchRow> rows;
  for (const auto& c : cases) {
    ParseOptions popts;
    popts.validation.labeling = &w.labeling;
    popts.validation.location_count = w.graph.size();
    const auto core = desugar(parse_sastl(c.formula, popts));
    std::optional<std::vector<Verdict>> reference;
    for (const auto& mode : modes) {
      MonitorOptions mo;
      mo.reorder = mode.reorder;
      mo.parallel.worker_count = mode.workers;
      if (mode.workers > 1) mo.pool = std::make_shared<WorkerPool>(mode.workers);
      BenchRow row{c.name, mode.name, 0.0, {}, 0, c.anchor_samples.size(), {}};
      std::vector<Verdict> verdicts;
      for (std::size_t r = 0; r < runs; ++r) {
        Monitor m(*w.signal, w.index, w.labeling, mo);
        verdicts.clear();
        const auto t0 = std::chrono::steady_clock::now();
        for (const auto t : c.anchor_samples) verdicts.push_back(m.boolean(core, t, c.anchor));
        const auto t1 = std::chrono::steady_clock::now();
        row.runs.push_back(std::chrono::duration<double>(t1 - t0).count());
        if (r == 0) row.counters = m.counters();
      }
      if (!reference) {
        reference = verdicts;
      } else if (*reference != verdicts) {
        throw BenchDivergence("bench case '" + c.name + "': mode '" + mode.name + "' disagrees with mode '" +
                              modes.front().name + "'");
      }
      auto sorted = row.runs;
      std::sort(sorted.begin(), sorted.end());
      row.median_seconds = sorted[sorted.size() / 2];
      row.satisfied = static_cast<std::size_t>(
          std::count_if(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.satisfied; }));
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "case,mode,median_seconds,runs,satisfied,anchors,atom_evals,descan_calls,skipped_conjuncts,parallel_fanouts\n";
  for (const auto& r : rows) {
    out << r.case_name << ',' << r.mode << ',' << std::setprecision(6) << r.median_seconds << ',' << r.runs.size()
        << ',' << r.satisfied << ',' << r.anchors << ',' << r.counters.atom_evals << ',' << r.counters.descan_calls
        << ',' << r.counters.skipped_conjuncts << ',' << r.counters.parallel_fanouts << '\n';
  }
}

void write_bench_table(std::ostream& out, const std::vector<BenchRow>& rows) {
  std::vector<std::string> modes, cases;
  std::map<std::pair<std::string, std::string>, double> cell;
  for (const auto& r : rows) {
    if (std::find(modes.begin(), modes.end(), r.mode) == modes.end()) modes.push_back(r.mode);
    if (std::find(cases.begin(), cases.end(), r.case_name) == cases.end()) cases.push_back(r.case_name);
    cell[{r.case_name, r.mode}] = r.median_seconds;
  }
  std::size_t name_w = 4;
  for (const auto& c : cases) name_w = std::max(name_w, c.size());
  out << std::left << std::setw(static_cast<int>(name_w)) << "case";
  for (const auto& m : modes) out << " | " << std::setw(22) << m;
  out << '\n' << std::string(name_w, '-');
  for (std::size_t i = 0; i < modes.size(); ++i) out << "-+-" << std::string(22, '-');
  out << '\n';
  for (const auto& c : cases) {
    out << std::left << std::setw(static_cast<int>(name_w)) << c;
    const double base = cell[{c, modes.front()}];
    for (const auto& m : modes) {
      const double s = cell[{c, m}];
      std::ostringstream txt;
      txt << std::fixed << std::setprecision(4) << s << " s";
      if (m != modes.front() && s > 0) txt << " (" << std::setprecision(2) << base / s << "x)";
      out << " | " << std::setw(22) << txt.str();
    }
    out << '\n';
  }
}

}  // namespace sastl

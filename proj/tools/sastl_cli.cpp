// sastl: offline checking, streaming, template translation and benchmarks.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "sastl/io.hpp"
#include "sastl/online.hpp"
#include "sastl/parser.hpp"
#include "sastl/requirements.hpp"
#include "sastl/spatial_index.hpp"
#include "sastl/templates.hpp"
#include "sastl/workload.hpp"

namespace {

using namespace sastl;

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kError = 2;

struct EngineFlags {
  std::optional<std::size_t> workers;
  std::size_t threshold = 32;
  bool no_reorder = false;
  bool boolean_only = false;
  bool counters = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--workers", workers, "Worker threads for spatial operators (default: $SASTL_WORKERS or 1)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--parallel-threshold", threshold, "Minimum |L| before a spatial operator fans out")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--no-reorder", no_reorder, "Evaluate conjunctions left to right");
    cmd->add_flag("--boolean-only", boolean_only, "Skip robustness");
    cmd->add_flag("--counters", counters, "Attach evaluation counters to each report");
  }

  EvalOptions options() const {
    EvalOptions o;
    o.monitor.reorder = !no_reorder;
    o.monitor.parallel.worker_count = workers.value_or(workers_from_env().value_or(1));
    o.monitor.parallel.parallel_threshold = threshold;
    o.boolean_only = boolean_only;
    o.counters = counters;
    return o;
  }
};

struct Inputs {
  std::string requirements, graph, labels, index_cache;
};

/// Report sink: stdout or a file.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw FormatError(path + ": cannot open for writing");
    }
  }
  void write(const Report& r) {
    out() << to_json_line(r) << '\n';
    out().flush();
  }

 private:
  std::ostream& out() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }
  std::ofstream file_;
};

DistanceIndex index_for(const SpatialGraph& g, const std::string& graph_path, const std::string& cache) {
  if (cache.empty()) return build_index(g);
  const auto key = content_hash(read_file(graph_path));
  if (auto idx = load_index(key, cache); idx && idx->size() == g.size()) return std::move(*idx);
  auto idx = build_index(g);
  save_index(idx, key, cache);
  return idx;
}

double infer_step(const std::vector<Record>& records) {
  std::vector<double> times;
  for (const auto& r : records) times.push_back(r.time);
  std::sort(times.begin(), times.end());
  double step = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double d = times[i] - times[i - 1];
    if (d > time_epsilon(1.0) && (step == 0.0 || d < step)) step = d;
  }
  return step > 0.0 ? step : 1.0;
}

int cmd_check(const Inputs& in, const std::string& signal_path, std::optional<double> step, const EngineFlags& flags,
              const std::string& output) {
  const auto graph = load_graph_json(in.graph);
  const auto labeling = load_labels_json(in.labels, graph);
  const auto records = load_signal_csv(signal_path);
  if (records.empty()) throw FormatError(signal_path + ": no records");
  std::set<std::string> seen_vars;
  for (const auto& r : records) {
    if (!graph.find(r.location))
      throw FormatError(signal_path + ": location '" + r.location + "' is not a node of " + in.graph);
    seen_vars.insert(r.variable);
  }
  const auto [lo, hi] = std::minmax_element(records.begin(), records.end(),
                                            [](const Record& a, const Record& b) { return a.time < b.time; });

  RequirementContext ctx{&graph, &labeling, hi->time - lo->time};
  const auto set = load_requirements(in.requirements, ctx);
  for (const auto& req : set.requirements)
    for (const auto& v : variables(req.core))
      if (!seen_vars.contains(v))
        throw FormatError(in.requirements + ": requirement '" + req.name + "' reads variable '" + v +
                          "' which " + signal_path + " never records");

  const double dt = step.value_or(infer_step(records));
  const auto signal = normalize_frequency(records, dt, graph.names(), set.variables());
  const auto index = index_for(graph, in.graph, in.index_cache);

  const auto reports = check_offline(set, signal, graph, index, labeling, flags.options());
  Sink sink(output);
  bool all = true;
  for (const auto& r : reports) {
    sink.write(r);
    all = all && r.satisfied;
  }
  return all ? kOk : kViolation;
}

/// Reads lines from a TCP client connected to `port`; one connection, until it closes.
class TcpLines {
 public:
  explicit TcpLines(int port) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw std::runtime_error("socket: " + std::string(std::strerror(errno)));
    int yes = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = htons(static_cast<std::uint16_t>(port));
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0 || ::listen(listen_fd_, 1) < 0)
      throw std::runtime_error("cannot listen on port " + std::to_string(port) + ": " + std::strerror(errno));
    std::cerr << "sastl: listening on 127.0.0.1:" << port << '\n';
    fd_ = ::accept(listen_fd_, nullptr, nullptr);
    if (fd_ < 0) throw std::runtime_error("accept: " + std::string(std::strerror(errno)));
  }
  ~TcpLines() {
    if (fd_ >= 0) ::close(fd_);
    if (listen_fd_ >= 0) ::close(listen_fd_);
  }

  bool getline(std::string& line) {
    while (true) {
      if (const auto nl = buf_.find('\n'); nl != std::string::npos) {
        line = buf_.substr(0, nl);
        buf_.erase(0, nl + 1);
        return true;
      }
      char chunk[4096];
      const auto n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n <= 0) {
        if (buf_.empty()) return false;
        line = std::move(buf_);
        buf_.clear();
        return true;
      }
      buf_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 private:
  int listen_fd_ = -1;
  int fd_ = -1;
  std::string buf_;
};

int cmd_stream(const Inputs& in, double step, const std::string& input, const std::string& policy,
               const EngineFlags& flags, const std::string& output) {
  const auto graph = load_graph_json(in.graph);
  const auto labeling = load_labels_json(in.labels, graph);
  const auto set = load_requirements(in.requirements, RequirementContext{&graph, &labeling, std::nullopt});
  const auto index = index_for(graph, in.graph, in.index_cache);

  StreamConfig cfg;
  cfg.step = step;
  cfg.policy = ResetPolicy::parse(policy);
  cfg.eval = flags.options();
  StreamState state(set, graph, index, labeling, cfg);
  Sink sink(output);

  std::unique_ptr<std::ifstream> file;
  std::unique_ptr<TcpLines> tcp;
  if (input.starts_with("tcp:")) {
    tcp = std::make_unique<TcpLines>(std::stoi(input.substr(4)));
  } else if (input != "-") {
    file = std::make_unique<std::ifstream>(input);
    if (!*file) throw FormatError(input + ": cannot open");
  }
  auto next_line = [&](std::string& line) -> bool {
    if (tcp) return tcp->getline(line);
    return static_cast<bool>(std::getline(file ? *file : std::cin, line));
  };

  bool all = true;
  auto emit = [&](const std::vector<Report>& reports) {
    for (const auto& r : reports) {
      sink.write(r);
      all = all && r.satisfied;
    }
  };

  std::size_t line_no = 0, records = 0, skipped = 0;
  std::string line;
  while (next_line(line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      std::optional<Record> rec;
      if (line[line.find_first_not_of(" \t")] == '{')
        rec = parse_json_record(line);
      else
        rec = parse_csv_record(line);
      if (!rec) continue;  // CSV header
      const Record one[] = {*rec};
      emit(state.feed(one));
      ++records;
    } catch (const std::exception& e) {
      ++skipped;
      std::cerr << "sastl: " << (input == "-" ? "<stdin>" : input) << ":" << line_no << ": skipped: " << e.what()
                << '\n';
    }
  }
  emit(state.finish());
  std::cerr << "sastl: " << records << " records, " << skipped << " skipped, " << state.ignored_records()
            << " ignored\n";
  return all ? kOk : kViolation;
}

int cmd_translate(const std::string& path, std::optional<double> horizon, bool check, const std::string& graph_path,
                  const std::string& labels_path) {
  using json = nlohmann::json;
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) throw FormatError(path + ": expected a JSON object");

  // A bare template or {config..., "template": {...}} becomes a one-requirement file.
  json file = j;
  const bool single = !j.contains("requirements");
  if (single) {
    file = json::object();
    json tmpl = j;
    if (j.contains("template")) {
      tmpl = j["template"];
      for (const auto& [k, v] : j.items())
        if (k != "template") file[k] = v;
    }
    file["requirements"] = json::array({{{"name", "template"}, {"template", tmpl}}});
  }
  if (horizon) file["default_horizon"] = *horizon;

  std::optional<SpatialGraph> graph;
  std::optional<Labeling> labeling;
  if (check) {
    if (graph_path.empty() || labels_path.empty()) throw FormatError("--check needs --graph and --labels");
    graph = load_graph_json(graph_path);
    labeling = load_labels_json(labels_path, *graph);
  }
  RequirementContext ctx{graph ? &*graph : nullptr, labeling ? &*labeling : nullptr, std::nullopt};
  const auto set = read_requirements(file.dump(), ctx, path);
  for (const auto& req : set.requirements) {
    if (!single) std::cout << req.name << ": ";
    std::cout << format_formula(req.formula) << '\n';
  }
  return kOk;
}

struct BenchArgs {
  std::string topology = "lattice";
  std::size_t rows = 40, cols = 50, nodes = 2000, samples = 100, runs = 3;
  double school = 0.05, radius = 0.04, alert_rate = 0.002;
  std::uint64_t seed = 1;
  std::string modes = "standard,reordered,parallel2,parallel4";
  std::string csv;
};

int cmd_bench(const BenchArgs& a) {
  WorkloadSpec spec;
  if (a.topology == "lattice")
    spec.topology = WorkloadSpec::Topology::Lattice;
  else if (a.topology == "geometric")
    spec.topology = WorkloadSpec::Topology::RandomGeometric;
  else
    throw std::invalid_argument("unknown topology '" + a.topology + "' (expected lattice or geometric)");
  spec.rows = a.rows;
  spec.cols = a.cols;
  spec.nodes = a.nodes;
  spec.radius = a.radius;
  spec.samples = a.samples;
  spec.poi_densities = {{"School", a.school}};
  spec.alert_rate = a.alert_rate;
  spec.seed = a.seed;
  const auto modes = BenchMode::parse_list(a.modes);

  const auto w = generate_workload(spec);
  std::cerr << "sastl: workload " << w.graph.size() << " locations, " << w.signal->sample_count() << " samples\n";
  const auto rows = run_bench(w, default_bench_cases(w), modes, a.runs);
  write_bench_table(std::cout, rows);
  if (a.csv.empty()) {
    std::cout << '\n';
    write_bench_csv(std::cout, rows);
  } else {
    std::ofstream out(a.csv);
    if (!out) throw FormatError(a.csv + ": cannot open for writing");
    write_bench_csv(out, rows);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SaSTL runtime monitor"};
  app.require_subcommand(1);

  Inputs in;
  EngineFlags flags;
  std::string output;

  auto* check = app.add_subcommand("check", "Evaluate requirements over a recorded trace");
  std::string signal_path;
  std::optional<double> check_step;
  check->add_option("--requirements,-r", in.requirements, "Requirements JSON")->required()->check(CLI::ExistingFile);
  check->add_option("--signal,-s", signal_path, "Signal CSV")->required()->check(CLI::ExistingFile);
  check->add_option("--graph,-g", in.graph, "Graph JSON")->required()->check(CLI::ExistingFile);
  check->add_option("--labels,-l", in.labels, "Labels JSON")->required()->check(CLI::ExistingFile);
  check->add_option("--step", check_step, "Sample step (default: smallest gap between record times)")
      ->check(CLI::PositiveNumber);
  check->add_option("--output,-o", output, "Report file (default: stdout)");
  check->add_option("--index-cache", in.index_cache, "Distance index cache file");
  flags.add_to(check);

  auto* stream = app.add_subcommand("stream", "Evaluate requirements over a live record stream");
  double stream_step = 1.0;
  std::string input = "-", policy = "keep";
  stream->add_option("--requirements,-r", in.requirements, "Requirements JSON")->required()->check(CLI::ExistingFile);
  stream->add_option("--graph,-g", in.graph, "Graph JSON")->required()->check(CLI::ExistingFile);
  stream->add_option("--labels,-l", in.labels, "Labels JSON")->required()->check(CLI::ExistingFile);
  stream->add_option("--step", stream_step, "Sample step")->required()->check(CLI::PositiveNumber);
  stream->add_option("--input,-i", input, "- (stdin), a file, or tcp:PORT");
  stream->add_option("--policy", policy, "keep | reset_on_violation | reset_at:T");
  stream->add_option("--output,-o", output, "Report file (default: stdout)");
  stream->add_option("--index-cache", in.index_cache, "Distance index cache file");
  flags.add_to(stream);

  auto* translate = app.add_subcommand("translate", "Print the formula for a requirement template");
  std::string template_path, graph_path, labels_path;
  std::optional<double> horizon;
  bool do_check = false;
  translate->add_option("file", template_path, "Template or requirements JSON")->required()->check(CLI::ExistingFile);
  translate->add_option("--horizon", horizon, "Default horizon H in time units")->check(CLI::NonNegativeNumber);
  translate->add_flag("--check", do_check, "Validate propositions against --graph/--labels");
  translate->add_option("--graph,-g", graph_path, "Graph JSON (with --check)");
  translate->add_option("--labels,-l", labels_path, "Labels JSON (with --check)");

  auto* bench = app.add_subcommand("bench", "Time evaluation modes on a synthetic city");
  BenchArgs b;
  bench->add_option("--topology", b.topology, "lattice or geometric");
  bench->add_option("--rows", b.rows, "Lattice rows")->check(CLI::PositiveNumber);
  bench->add_option("--cols", b.cols, "Lattice columns")->check(CLI::PositiveNumber);
  bench->add_option("--nodes", b.nodes, "Random-geometric node count")->check(CLI::PositiveNumber);
  bench->add_option("--radius", b.radius, "Random-geometric connection radius");
  bench->add_option("--school", b.school, "Fraction of School locations")->check(CLI::Range(0.0, 1.0));
  bench->add_option("--samples,-T", b.samples, "Samples")->check(CLI::PositiveNumber);
  bench->add_option("--alert-rate", b.alert_rate, "Probability of a raised Alert")->check(CLI::Range(0.0, 1.0));
  bench->add_option("--seed", b.seed, "Generator seed");
  bench->add_option("--modes", b.modes, "Comma-separated: standard, reordered, parallelN");
  bench->add_option("--runs", b.runs, "Runs per mode (median reported)")->check(CLI::PositiveNumber);
  bench->add_option("--csv", b.csv, "CSV output file (default: after the table)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }

  try {
    if (*check) return cmd_check(in, signal_path, check_step, flags, output);
    if (*stream) return cmd_stream(in, stream_step, input, policy, flags, output);
    if (*translate) return cmd_translate(template_path, horizon, do_check, graph_path, labels_path);
    if (*bench) return cmd_bench(b);
  } catch (const std::exception& e) {
    std::cerr << "sastl: error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}

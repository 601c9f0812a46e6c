#include "sastl/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace sastl {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty() || std::isnan(v)) return std::nullopt;
  return v;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::optional<Record> parse_csv_record(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    cells.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (cells.size() != 4) throw FormatError("expected 4 columns, got " + std::to_string(cells.size()));
  if (cells[0] == "time") return std::nullopt;
  Record r;
  const auto t = parse_real(cells[0]);
  if (!t || !std::isfinite(*t)) throw FormatError("bad time '" + std::string(cells[0]) + "'");
  r.time = *t;
  if (cells[1].empty()) throw FormatError("empty location");
  if (cells[2].empty()) throw FormatError("empty variable");
  r.location = cells[1];
  r.variable = cells[2];
  if (!cells[3].empty()) {
    const auto v = parse_real(cells[3]);
    if (!v) throw FormatError("bad value '" + std::string(cells[3]) + "'");
    r.value = *v;
  }
  return r;
}

std::vector<Record> read_signal_csv(std::istream& in, std::string_view source) {
  std::vector<Record> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      if (auto r = parse_csv_record(line)) records.push_back(std::move(*r));
    } catch (const FormatError& e) {
      throw FormatError(std::string(source) + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

std::vector<Record> load_signal_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string() + ": cannot open file");
  return read_signal_csv(in, path.string());
}

Record parse_json_record(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("malformed JSON record: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("record must be a JSON object");
  Record r;
  try {
    r.time = j.at("t").get<double>();
    r.location = j.at("location").get<std::string>();
    r.variable = j.at("variable").get<std::string>();
    if (j.contains("value") && !j["value"].is_null()) r.value = j["value"].get<double>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad record field: ") + e.what());
  }
  if (!std::isfinite(r.time)) throw FormatError("record time must be finite");
  return r;
}

SpatialGraph read_graph_json(std::string_view text, std::string_view source) {
  const std::string src(source);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(src + ": " + e.what());
  }
  SpatialGraph g;
  try {
    for (const auto& n : j.at("nodes")) g.add_node(n.get<std::string>());
    if (g.size() == 0) throw FormatError(src + ": graph needs at least one node");
    std::size_t i = 0;
    for (const auto& e : j.value("edges", json::array())) {
      try {
        g.add_edge(e.at("a").get<std::string>(), e.at("b").get<std::string>(), e.at("w").get<double>());
      } catch (const std::exception& ex) {
        throw FormatError(src + ": edges[" + std::to_string(i) + "]: " + ex.what());
      }
      ++i;
    }
  } catch (const json::exception& e) {
    throw FormatError(src + ": " + e.what());
  } catch (const SignalError& e) {
    throw FormatError(src + ": " + e.what());
  }
  return g;
}

SpatialGraph load_graph_json(const std::filesystem::path& path) {
  return read_graph_json(read_file(path), path.string());
}

Labeling read_labels_json(std::string_view text, const SpatialGraph& graph, std::string_view source) {
  const std::string src(source);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(src + ": " + e.what());
  }
  if (!j.is_object()) throw FormatError(src + ": labels must be a JSON object");
  Labeling lab(graph.size());
  for (const auto& [id, props] : j.items()) {
    const auto l = graph.find(id);
    if (!l) throw FormatError(src + ": label entry for unknown location '" + id + "'");
    if (!props.is_array()) throw FormatError(src + ": labels of '" + id + "' must be an array");
    for (const auto& p : props) {
      if (!p.is_string()) throw FormatError(src + ": labels of '" + id + "' must be strings");
      lab.add(*l, p.get<std::string>());
    }
  }
  return lab;
}

Labeling load_labels_json(const std::filesystem::path& path, const SpatialGraph& graph) {
  return read_labels_json(read_file(path), graph, path.string());
}

}  // namespace sastl

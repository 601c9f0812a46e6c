#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sastl/signal.hpp"

namespace sastl {

/// Input-file problem; the message names the file and, where known, the line.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Signal CSV with header `time,location,variable,value`; an empty value cell is UNDEFINED.
std::vector<Record> read_signal_csv(std::istream& in, std::string_view source = "<csv>");
std::vector<Record> load_signal_csv(const std::filesystem::path& path);

/// Parses one CSV data row. Returns nullopt for the header row.
std::optional<Record> parse_csv_record(std::string_view line);

/// Parses one line-delimited JSON record `{t, location, variable, value}`.
Record parse_json_record(std::string_view line);

/// `{ "nodes": [...], "edges": [{"a":..,"b":..,"w":..}, ...] }`
SpatialGraph read_graph_json(std::string_view text, std::string_view source = "<graph>");
SpatialGraph load_graph_json(const std::filesystem::path& path);

/// `{ "location_id": ["School", ...], ... }`; locations absent from the file get no labels.
Labeling read_labels_json(std::string_view text, const SpatialGraph& graph, std::string_view source = "<labels>");
Labeling load_labels_json(const std::filesystem::path& path, const SpatialGraph& graph);

std::string read_file(const std::filesystem::path& path);

}  // namespace sastl

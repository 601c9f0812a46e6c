#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "sastl/io.hpp"
#include "sastl/signal.hpp"

using namespace sastl;

namespace {
SpatioTemporalSignal one_cell(double v) {
  SpatioTemporalSignal s(SampleGrid(0.0, 1.0, 2), {"l0"}, {"x"});
  s.set(0, Loc{0}, 0, v);
  return s;
}
}  // namespace

TEST_CASE("value_at returns stored value and UNDEFINED for unset cells") {
  const auto s = one_cell(3.0);
  CHECK(s.value_at(0, "l0", "x") == 3.0);
  CHECK_FALSE(s.value_at(1, "l0", "x").has_value());
}

TEST_CASE("value_at lookup errors") {
  const auto s = one_cell(3.0);
  CHECK_THROWS_AS((void)s.value_at(2, "l0", "x"), LookupError);
  CHECK_THROWS_WITH_AS((void)s.value_at(0, "nowhere", "x"), doctest::Contains("location"), LookupError);
  CHECK_THROWS_WITH_AS((void)s.value_at(0, "l0", "y"), doctest::Contains("variable"), LookupError);
}

TEST_CASE("sample grid invariants") {
  CHECK_THROWS_AS(SampleGrid(0.0, 0.0, 1), SignalError);
  CHECK_THROWS_AS(SampleGrid(0.0, -1.0, 1), SignalError);
  CHECK_THROWS_AS(SampleGrid(0.0, 1.0, 0), SignalError);
  const SampleGrid g(10.0, 0.5, 4);
  CHECK(g.time_of(3) == 11.5);
  CHECK(g.index_of(11.0) == 2u);
  CHECK_FALSE(g.index_of(11.2).has_value());
  CHECK_FALSE(g.index_of(12.0).has_value());
}

TEST_CASE("set rejects NaN; UNDEFINED is written with nullopt") {
  auto s = one_cell(1.0);
  CHECK_THROWS_AS(s.set(0, Loc{0}, 0, std::nan("")), SignalError);
  s.set(0, Loc{0}, 0, std::nullopt);
  CHECK_FALSE(s.value_at(0, "l0", "x").has_value());
}

TEST_CASE("CSV ingestion round-trips through value_at") {
  std::istringstream csv("time,location,variable,value\n0,s1,AQI,51\n0,s2,AQI,\n");
  const auto records = read_signal_csv(csv);
  REQUIRE(records.size() == 2);
  const auto s = normalize_frequency(records, 60.0);
  CHECK(s.value_at(0, "s1", "AQI") == 51.0);
  CHECK_FALSE(s.value_at(0, "s2", "AQI").has_value());
}

TEST_CASE("CSV errors name the line") {
  std::istringstream bad("time,location,variable,value\n0,s1,AQI,51\nx,s1,AQI,3\n");
  CHECK_THROWS_WITH_AS(read_signal_csv(bad, "trace.csv"), doctest::Contains("trace.csv:3"), FormatError);
  std::istringstream short_row("time,location,variable,value\n0,s1\n");
  CHECK_THROWS_AS(read_signal_csv(short_row), FormatError);
}

TEST_CASE("JSON record lines") {
  const auto r = parse_json_record(R"({"t": 5, "location": "a", "variable": "x", "value": 2.5})");
  CHECK(r.time == 5.0);
  CHECK(r.location == "a");
  CHECK(r.value == 2.5);
  CHECK_FALSE(parse_json_record(R"({"t": 5, "location": "a", "variable": "x", "value": null})").value.has_value());
  CHECK_THROWS_AS(parse_json_record("{"), FormatError);
  CHECK_THROWS_AS(parse_json_record(R"({"t": "x", "location": "a", "variable": "x"})"), FormatError);
}

TEST_CASE("normalize_frequency: already uniform records map one to one") {
  const std::vector<Record> rs = {{0, "a", "x", 1.0}, {60, "a", "x", 2.0}, {120, "a", "x", 3.0}};
  const auto s = normalize_frequency(rs, 60.0);
  REQUIRE(s.sample_count() == 3);
  for (std::size_t k = 0; k < 3; ++k) CHECK(s.value_at(k, "a", "x") == static_cast<double>(k + 1));
}

TEST_CASE("normalize_frequency: zero-order hold across a gap") {
  const std::vector<Record> rs = {{0, "a", "x", 7.0}, {130, "a", "x", 9.0}};
  const auto s = normalize_frequency(rs, 60.0);
  REQUIRE(s.sample_count() == 3);  // ticks 0, 60, 120; t=130 lies past the last tick
  CHECK(s.value_at(0, "a", "x") == 7.0);
  CHECK(s.value_at(1, "a", "x") == 7.0);
  CHECK(s.value_at(2, "a", "x") == 7.0);
}

TEST_CASE("normalize_frequency: single record gives a one-sample signal") {
  const std::vector<Record> rs = {{5, "a", "x", 1.0}};
  const auto s = normalize_frequency(rs, 60.0);
  CHECK(s.sample_count() == 1);
  CHECK(s.grid().start_time == 5.0);
}

TEST_CASE("normalize_frequency: cells before the first record are UNDEFINED; later duplicate wins") {
  const std::vector<Record> rs = {{0, "a", "x", 1.0}, {10, "b", "x", 4.0}, {10, "b", "x", 5.0}, {20, "a", "x", 2.0}};
  const auto s = normalize_frequency(rs, 10.0);
  CHECK_FALSE(s.value_at(0, "b", "x").has_value());
  CHECK(s.value_at(1, "b", "x") == 5.0);
  CHECK(s.value_at(2, "b", "x") == 5.0);
  CHECK(s.value_at(1, "a", "x") == 1.0);
}

TEST_CASE("normalize_frequency: explicit dropout record clears the held value") {
  const std::vector<Record> rs = {{0, "a", "x", 1.0}, {10, "a", "x", std::nullopt}, {20, "a", "x", 3.0}};
  const auto s = normalize_frequency(rs, 10.0);
  CHECK_FALSE(s.value_at(1, "a", "x").has_value());
  CHECK(s.value_at(2, "a", "x") == 3.0);
}

TEST_CASE("normalize_frequency errors") {
  CHECK_THROWS_AS(normalize_frequency({}, 1.0), SignalError);
  const std::vector<Record> rs = {{0, "a", "x", 1.0}};
  CHECK_THROWS_AS(normalize_frequency(rs, 0.0), SignalError);
  CHECK_THROWS_AS(normalize_frequency(rs, 1.0, std::vector<std::string>{"b"}), LookupError);
}

TEST_CASE("normalize_frequency never invents values") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Record> rs;
    std::uniform_real_distribution<double> time(0.0, 100.0);
    std::uniform_int_distribution<int> loc(0, 3), val(-50, 50);
    const int n = 1 + trial % 20;
    for (int i = 0; i < n; ++i) rs.push_back({time(rng), "l" + std::to_string(loc(rng)), "x", val(rng) * 1.0});
    const auto s = normalize_frequency(rs, 7.5);
    for (std::size_t k = 0; k < s.sample_count(); ++k)
      for (const auto& l : s.locations()) {
        const auto v = s.value_at(k, l, "x");
        if (!v) continue;
        bool found = false;
        for (const auto& r : rs) found = found || (r.location == l && r.value == *v && r.time <= s.grid().time_of(k) + 1e-6);
        CHECK(found);
      }
  }
}

TEST_CASE("graph and labels JSON") {
  const auto g = read_graph_json(R"({"nodes": ["a", "b", "c"], "edges": [{"a": "a", "b": "b", "w": 1.5}]})");
  CHECK(g.size() == 3);
  CHECK(g.edges().size() == 1);
  CHECK_THROWS_AS(read_graph_json(R"({"nodes": ["a"], "edges": [{"a": "a", "b": "a", "w": 1}]})"), FormatError);
  CHECK_THROWS_AS(read_graph_json(R"({"nodes": ["a", "b"], "edges": [{"a": "a", "b": "b", "w": -1}]})"), FormatError);
  CHECK_THROWS_AS(read_graph_json(R"({"nodes": ["a"], "edges": [{"a": "a", "b": "z", "w": 1}]})"), FormatError);
  CHECK_THROWS_AS(read_graph_json(R"({"nodes": ["a", "a"], "edges": []})"), FormatError);

  const auto lab = read_labels_json(R"({"a": ["School", "Park"], "c": []})", g);
  CHECK(lab.has(Loc{0}, "School"));
  CHECK_FALSE(lab.has(Loc{1}, "School"));
  CHECK(lab.knows("Park"));
  CHECK_FALSE(lab.knows("Hospital"));
  CHECK_THROWS_WITH_AS(read_labels_json(R"({"zz": ["School"]})", g, "labels.json"), doctest::Contains("zz"),
                       FormatError);
}

TEST_CASE("append_sample and drop_front keep the buffer consistent") {
  SpatioTemporalSignal s(SampleGrid(0.0, 1.0, 1), {"a"}, {"x"});
  s.set(0, Loc{0}, 0, 1.0);
  const double row[] = {2.0};
  s.append_sample(row);
  CHECK(s.sample_count() == 2);
  s.drop_front(1);
  CHECK(s.sample_count() == 1);
  CHECK(s.grid().start_time == 1.0);
  CHECK(s.value_at(0, "a", "x") == 2.0);
  const double wide[] = {1.0, 2.0};
  CHECK_THROWS_AS(s.append_sample(wide), SignalError);
}

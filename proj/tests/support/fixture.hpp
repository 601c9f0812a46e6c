#pragma once

// Hand-built worlds for example-based tests.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sastl/formula.hpp"
#include "sastl/signal.hpp"
#include "sastl/spatial_index.hpp"

namespace fixture {

/// Locations l0..l{n-1} on a unit-weight path, one variable per name.
struct Line {
  sastl::SpatialGraph graph;
  sastl::Labeling labeling;
  std::unique_ptr<sastl::SpatioTemporalSignal> signal;
  sastl::DistanceIndex index;

  Line(std::size_t locations, std::size_t samples, std::vector<std::string> vars = {"x"})
      : labeling(locations) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < locations; ++i) {
      names.push_back("l" + std::to_string(i));
      graph.add_node(names.back());
      if (i > 0) graph.add_edge(names[i - 1], names[i], 1.0);
    }
    signal = std::make_unique<sastl::SpatioTemporalSignal>(sastl::SampleGrid(0.0, 1.0, samples), names,
                                                           std::move(vars));
    index = sastl::build_index(graph);
  }

  /// Sets variable 0 at location `l` over time.
  void series(std::uint32_t l, const std::vector<std::optional<double>>& values, std::size_t var = 0) {
    for (std::size_t t = 0; t < values.size(); ++t) signal->set(t, sastl::Loc{l}, var, values[t]);
  }
  /// Sets variable 0 at time `t` across locations.
  void snapshot(std::size_t t, const std::vector<std::optional<double>>& values, std::size_t var = 0) {
    for (std::uint32_t l = 0; l < values.size(); ++l) signal->set(t, sastl::Loc{l}, var, values[l]);
  }
};

inline const sastl::SpatialDomain kAll{0.0, sastl::kInf, sastl::psi_true()};

}  // namespace fixture

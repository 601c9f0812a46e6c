#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "sastl/formula.hpp"
#include "sastl/signal.hpp"

namespace sastl {

/// One entry of a per-location distance table.
struct Neighbor {
  double distance;
  Loc location;
  friend auto operator<=>(const Neighbor&, const Neighbor&) = default;
};

/// All-pairs shortest-path distances, stored per source as an array sorted by
/// (distance, location). A range query is a binary search for d1 followed by a
/// linear walk to d2, i.e. O(log n + |result|). Unreachable pairs are absent.
class DistanceIndex {
 public:
  DistanceIndex() = default;
  explicit DistanceIndex(std::vector<std::vector<Neighbor>> table) : table_(std::move(table)) {}

  [[nodiscard]] std::size_t size() const { return table_.size(); }
  [[nodiscard]] std::span<const Neighbor> neighbors(Loc l) const;
  /// Shortest-path distance; +inf when unreachable.
  [[nodiscard]] double distance(Loc a, Loc b) const;
  /// Sub-span of neighbors(l) with d1 <= distance <= d2.
  [[nodiscard]] std::span<const Neighbor> band(Loc l, double d1, double d2) const;

  friend bool operator==(const DistanceIndex&, const DistanceIndex&) = default;

 private:
  std::vector<std::vector<Neighbor>> table_;
};

/// Dijkstra from every node.
DistanceIndex build_index(const SpatialGraph& g);

/// Propositional evaluation of psi over the labels of `l`.
bool eval_psi(const Labeling& lab, Loc l, const Psi& psi);

/// L^l_D: locations within [d1,d2] of `l` whose labels satisfy psi, ascending by
/// (distance, location). Throws LookupError for an unknown anchor.
std::vector<Loc> de_scan(const DistanceIndex& idx, const Labeling& lab, Loc l, const SpatialDomain& d);

/// Binary cache of a distance table, keyed by a content hash of the graph source.
std::uint64_t content_hash(std::string_view bytes);
void save_index(const DistanceIndex& idx, std::uint64_t key, const std::filesystem::path& path);
/// Returns nullopt when the file is missing, unreadable or built for a different key.
std::optional<DistanceIndex> load_index(std::uint64_t key, const std::filesystem::path& path);

}  // namespace sastl

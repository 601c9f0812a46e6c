#include "sastl/spatial_index.hpp"

#include <algorithm>
#include <fstream>
#include <queue>

namespace sastl {

std::span<const Neighbor> DistanceIndex::neighbors(Loc l) const {
  if (l.value >= table_.size()) throw LookupError("location index " + std::to_string(l.value) + " not in index");
  return table_[l.value];
}

double DistanceIndex::distance(Loc a, Loc b) const {
  for (const auto& n : neighbors(a))
    if (n.location == b) return n.distance;
  return kInf;
}

std::span<const Neighbor> DistanceIndex::band(Loc l, double d1, double d2) const {
  const auto all = neighbors(l);
  auto lo = std::lower_bound(all.begin(), all.end(), d1,
                             [](const Neighbor& n, double d) { return n.distance < d; });
  auto hi = std::upper_bound(lo, all.end(), d2, [](double d, const Neighbor& n) { return d < n.distance; });
  return {lo, hi};
}

DistanceIndex build_index(const SpatialGraph& g) {
  const auto n = g.size();
  const auto& adj = g.adjacency();
  std::vector<std::vector<Neighbor>> table(n);
  std::vector<double> dist(n);
  using Item = std::pair<double, std::uint32_t>;
  for (std::uint32_t src = 0; src < n; ++src) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[src] = 0.0;
    heap.emplace(0.0, src);
    auto& row = table[src];
    while (!heap.empty()) {
      const auto [d, u] = heap.top();
      heap.pop();
      if (d > dist[u]) continue;
      row.push_back({d, Loc{u}});
      for (const auto& [v, w] : adj[u]) {
        const double nd = d + w;
        if (nd < dist[v.value]) {
          dist[v.value] = nd;
          heap.emplace(nd, v.value);
        }
      }
    }
    // Zero-weight edges can settle equal distances out of location order.
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end(),
                          [](const Neighbor& a, const Neighbor& b) { return a.location == b.location; }),
              row.end());
  }
  return DistanceIndex(std::move(table));
}

bool eval_psi(const Labeling& lab, Loc l, const Psi& psi) {
  switch (psi->kind) {
    case PsiNode::Kind::True: return true;
    case PsiNode::Kind::Prop: return lab.has(l, psi->name);
    case PsiNode::Kind::Not: return !eval_psi(lab, l, psi->lhs);
    case PsiNode::Kind::Or: return eval_psi(lab, l, psi->lhs) || eval_psi(lab, l, psi->rhs);
  }
  return false;
}

std::vector<Loc> de_scan(const DistanceIndex& idx, const Labeling& lab, Loc l, const SpatialDomain& d) {
  std::vector<Loc> out;
  for (const auto& n : idx.band(l, d.d1, d.d2))
    if (eval_psi(lab, n.location, d.psi)) out.push_back(n.location);
  return out;
}

// --- cache ----------------------------------------------------------------------

std::uint64_t content_hash(std::string_view bytes) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {
constexpr std::uint64_t kMagic = 0x5341535444495831ULL;  // "SASTDIX1"

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool get(std::istream& in, T& v) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof(T)));
}
}  // namespace

void save_index(const DistanceIndex& idx, std::uint64_t key, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  put(out, kMagic);
  put(out, key);
  put(out, static_cast<std::uint64_t>(idx.size()));
  for (std::uint32_t l = 0; l < idx.size(); ++l) {
    const auto row = idx.neighbors(Loc{l});
    put(out, static_cast<std::uint64_t>(row.size()));
    for (const auto& n : row) {
      put(out, n.distance);
      put(out, n.location.value);
    }
  }
}

std::optional<DistanceIndex> load_index(std::uint64_t key, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::uint64_t magic = 0, stored = 0, n = 0;
  if (!get(in, magic) || magic != kMagic || !get(in, stored) || stored != key || !get(in, n)) return std::nullopt;
  std::vector<std::vector<Neighbor>> table(n);
  for (auto& row : table) {
    std::uint64_t m = 0;
    if (!get(in, m) || m > n) return std::nullopt;
    row.resize(m);
    for (auto& nb : row)
      if (!get(in, nb.distance) || !get(in, nb.location.value)) return std::nullopt;
  }
  return DistanceIndex(std::move(table));
}

}  // namespace sastl

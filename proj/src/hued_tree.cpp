#include "rdceg/hued_tree.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <tuple>

#include "rdceg/error.hpp"

namespace rdceg {

auto Staging::stage_of(int num_vertices) const -> std::vector<int> {
  auto result = std::vector<int>(num_vertices, k_none);
  for (auto i = 0; i < static_cast<int>(stages.size()); ++i) {
    for (auto v : stages[i]) result.at(v) = i;
  }
  return result;
}

auto Clustering::cluster_of(int num_edges) const -> std::vector<int> {
  auto result = std::vector<int>(num_edges, k_none);
  for (auto i = 0; i < static_cast<int>(clusters.size()); ++i) {
    for (auto e : clusters[i]) result.at(e) = i;
  }
  return result;
}

void normalize(Staging& staging) {
  for (auto& cell : staging.stages) std::ranges::sort(cell);
  std::erase_if(staging.stages, [](const auto& c) { return c.empty(); });
  std::ranges::sort(staging.stages, [](const auto& a, const auto& b) { return a.front() < b.front(); });
}

void normalize(Clustering& clustering) {
  if (clustering.kappa.size() != clustering.clusters.size()) {
    throw StagingError{"clustering needs one kappa per cluster"};
  }
  auto cells = std::vector<std::pair<std::vector<Edge_id>, double>>{};
  for (auto i = 0u; i < clustering.clusters.size(); ++i) {
    auto c = clustering.clusters[i];
    if (c.empty()) continue;
    std::ranges::sort(c);
    cells.emplace_back(std::move(c), clustering.kappa[i]);
  }
  std::ranges::sort(cells, [](const auto& a, const auto& b) { return a.first.front() < b.first.front(); });
  clustering.clusters.clear();
  clustering.kappa.clear();
  for (auto& [c, k] : cells) {
    clustering.clusters.push_back(std::move(c));
    clustering.kappa.push_back(k);
  }
}

void validate_staging(const EventTree& tree, const Staging& staging) {
  auto seen = std::vector<bool>(tree.num_vertices(), false);
  for (const auto& cell : staging.stages) {
    if (cell.empty()) throw StagingError{"empty stage"};
    auto labels = std::set<std::string>{};
    for (auto v : cell) {
      if (v < 0 || v >= tree.num_vertices() || !tree.is_situation(v)) {
        throw StagingError{"stage member " + std::to_string(v) + " is not a situation"};
      }
      if (seen[v]) throw StagingError{"situation '" + tree.name(v) + "' is in two stages"};
      seen[v] = true;
      auto mine = tree.out_labels(v);
      auto as_set = std::set<std::string>(mine.begin(), mine.end());
      if (v == cell.front()) {
        labels = as_set;
      } else if (as_set != labels) {
        throw StagingError{"situations '" + tree.name(cell.front()) + "' and '" + tree.name(v) +
                           "' share a stage but have different edge labels"};
      }
    }
  }
  for (auto v : tree.situations()) {
    if (!seen[v]) throw StagingError{"situation '" + tree.name(v) + "' is in no stage"};
  }
}

void validate_clustering(const EventTree& tree, const Clustering& clustering) {
  if (clustering.kappa.size() != clustering.clusters.size()) {
    throw StagingError{"clustering needs one kappa per cluster"};
  }
  auto seen = std::vector<bool>(tree.num_edges(), false);
  for (auto i = 0u; i < clustering.clusters.size(); ++i) {
    if (clustering.clusters[i].empty()) throw StagingError{"empty cluster"};
    if (!(clustering.kappa[i] > 0.0)) throw StagingError{"cluster kappa must be positive"};
    for (auto e : clustering.clusters[i]) {
      if (e < 0 || e >= tree.num_edges() || !tree.edge(e).timed) {
        throw StagingError{"cluster member " + std::to_string(e) + " is not a timed edge"};
      }
      if (seen[e]) throw StagingError{"edge '" + tree.edge_key(e) + "' is in two clusters"};
      seen[e] = true;
    }
  }
  for (auto e : tree.timed_edges()) {
    if (!seen[e]) throw StagingError{"timed edge '" + tree.edge_key(e) + "' is in no cluster"};
  }
}

auto singleton_staging(const EventTree& tree) -> Staging {
  auto s = Staging{};
  for (auto v : tree.situations()) s.stages.push_back({v});
  return s;
}

auto singleton_clustering(const EventTree& tree, std::span<const double> edge_kappa) -> Clustering {
  auto c = Clustering{};
  for (auto e : tree.timed_edges()) {
    c.clusters.push_back({e});
    c.kappa.push_back(edge_kappa.empty() ? 1.0 : edge_kappa[e]);
  }
  return c;
}

auto make_hued_tree(ModifiedTree modified, Staging staging, Clustering clustering) -> HuedTree {
  normalize(staging);
  normalize(clustering);
  validate_staging(modified.tree, staging);
  validate_clustering(modified.tree, clustering);
  return HuedTree{std::move(modified), std::move(staging), std::move(clustering)};
}

auto canonical_classes(const EventTree& tree, std::span<const int> vertex_color,
                       std::span<const int> edge_color, int max_depth) -> std::vector<int> {
  auto n = tree.num_vertices();
  if (static_cast<int>(vertex_color.size()) != n || static_cast<int>(edge_color.size()) != tree.num_edges()) {
    throw StructuralError{"canonical_classes: color arrays do not match the tree"};
  }
  if (max_depth <= 0) max_depth = n + 1;

  // Depth 0: colors only.  Terminal leaves form class 0.
  auto cls = std::vector<int>(n, 0);
  auto count = 0;
  {
    auto intern = std::map<int, int>{};
    for (auto v = 0; v < n; ++v) {
      if (tree.is_leaf(v)) continue;
      cls[v] = intern.try_emplace(vertex_color[v], static_cast<int>(intern.size()) + 1).first->second;
    }
    for (auto v = 0; v < n; ++v) {
      if (tree.is_repeat(v)) cls[v] = cls[tree.repeat_target(v)];
    }
    count = static_cast<int>(intern.size()) + 1;
  }

  using Child = std::tuple<std::string, int, bool, int>;
  using Key = std::pair<int, std::vector<Child>>;
  for (auto depth = 1; depth <= max_depth; ++depth) {
    auto intern = std::map<Key, int>{};
    auto next = std::vector<int>(n, 0);
    for (auto v = 0; v < n; ++v) {
      if (tree.is_leaf(v)) continue;
      auto key = Key{cls[v], {}};
      for (auto e : tree.out_edges(v)) {
        const auto& edge = tree.edge(e);
        key.second.emplace_back(edge.label, edge_color[e], edge.slice_boundary, cls[edge.child]);
      }
      std::ranges::sort(key.second);
      next[v] = intern.try_emplace(std::move(key), static_cast<int>(intern.size()) + 1).first->second;
    }
    for (auto v = 0; v < n; ++v) {
      if (tree.is_repeat(v)) next[v] = next[tree.repeat_target(v)];
    }
    cls = std::move(next);
    auto next_count = static_cast<int>(intern.size()) + 1;
    if (next_count == count) break;
    count = next_count;
  }

  // Dense ids in order of first occurrence.
  auto remap = std::map<int, int>{};
  for (auto& c : cls) c = remap.try_emplace(c, static_cast<int>(remap.size())).first->second;
  return cls;
}

auto positions_from_staging(const HuedTree& hued, int max_depth) -> Partition {
  const auto& tree = hued.tree();
  auto vertex_color = hued.staging.stage_of(tree.num_vertices());
  auto edge_color = hued.clustering.cluster_of(tree.num_edges());
  auto cls = canonical_classes(tree, vertex_color, edge_color, max_depth);

  auto by_class = std::map<int, std::vector<Vertex_id>>{};
  for (auto v : tree.situations()) by_class[cls[v]].push_back(v);
  auto result = Partition{};
  for (auto& [c, cell] : by_class) result.cells.push_back(std::move(cell));
  std::ranges::sort(result.cells, [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return result;
}

}  // namespace rdceg

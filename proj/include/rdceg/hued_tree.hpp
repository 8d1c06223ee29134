#pragma once

#include <span>
#include <vector>

#include "rdceg/event_tree.hpp"

namespace rdceg {

// A partition of the situations.  Cells are sorted, and ordered by their smallest member.
// Members of a stage must have identical out-label sets; labels are matched literally.
struct Staging {
  std::vector<std::vector<Vertex_id>> stages;

  // Stage index per vertex, k_none for leaves.
  auto stage_of(int num_vertices) const -> std::vector<int>;
  friend auto operator==(const Staging&, const Staging&) -> bool = default;
};

// A partition of the timed edges with one Weibull shape per cluster.
struct Clustering {
  std::vector<std::vector<Edge_id>> clusters;
  std::vector<double> kappa;

  // Cluster index per edge, k_none for untimed edges.
  auto cluster_of(int num_edges) const -> std::vector<int>;
  friend auto operator==(const Clustering&, const Clustering&) -> bool = default;
};

// Sorts members and cells into canonical order (kappa follows its cluster).
void normalize(Staging& staging);
void normalize(Clustering& clustering);

void validate_staging(const EventTree& tree, const Staging& staging);
void validate_clustering(const EventTree& tree, const Clustering& clustering);

auto singleton_staging(const EventTree& tree) -> Staging;
// `edge_kappa` is indexed by edge id.
auto singleton_clustering(const EventTree& tree, std::span<const double> edge_kappa) -> Clustering;

struct HuedTree {
  ModifiedTree modified;
  Staging staging;
  Clustering clustering;

  auto tree() const -> const EventTree& { return modified.tree; }
};

// Validates and normalizes the partitions.
auto make_hued_tree(ModifiedTree modified, Staging staging, Clustering clustering) -> HuedTree;

// Positions: cells over the situations, ordered by smallest member.
struct Partition {
  std::vector<std::vector<Vertex_id>> cells;
  friend auto operator==(const Partition&, const Partition&) -> bool = default;
};

// Class ids per vertex such that two vertices share a class iff their colored rooted subtrees
// (vertex colors, edge colors, edge labels, slice boundaries) agree to depth `max_depth`.
// Repeat markers unfold to their targets; all terminal leaves share one class.
// Refinement stops early once the partition is stable, at which point the classes are exact
// for the infinite unfolding.  Class ids are dense and ordered by first occurrence.
auto canonical_classes(const EventTree& tree, std::span<const int> vertex_color,
                       std::span<const int> edge_color, int max_depth) -> std::vector<int>;

// max_depth <= 0 means "until stable".
auto positions_from_staging(const HuedTree& hued, int max_depth = 0) -> Partition;

}  // namespace rdceg

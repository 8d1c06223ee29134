#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rdceg/holding_law.hpp"
#include "rdceg/hued_tree.hpp"

namespace rdceg {

struct RdcegVertex {
  std::string name;
  std::vector<Vertex_id> members;  // hued-tree situations; empty for the sink
  int stage = k_none;
  bool is_sink = false;
};

struct RdcegEdge {
  int source = k_none;
  int target = k_none;
  std::string label;
  bool timed = false;
  bool cyclic = false;          // encodes a repetition of structure
  bool slice_boundary = false;  // crossing it starts a new passage-slice (cyclic edges always do)
  int cluster = k_none;
  std::vector<Edge_id> members;  // tree edges coalesced into this edge
  std::optional<double> probability;
  std::optional<HoldingLaw> law;
};

// Positions plus an optional sink w_inf.  Position k is named "wk", ranked by smallest member id,
// so the root is w0.  Parallel edges are distinct records keyed by (source, target, label).
class Rdceg {
 public:
  Rdceg() = default;
  Rdceg(std::vector<RdcegVertex> vertices, std::vector<RdcegEdge> edges);

  auto num_vertices() const -> int { return static_cast<int>(vertices_.size()); }
  auto num_edges() const -> int { return static_cast<int>(edges_.size()); }
  auto root() const -> int { return 0; }
  auto sink() const -> int { return sink_; }  // k_none if no trajectory terminates
  auto vertex(int v) const -> const RdcegVertex& { return vertices_.at(v); }
  auto edge(int e) const -> const RdcegEdge& { return edges_.at(e); }
  auto vertices() const -> std::span<const RdcegVertex> { return vertices_; }
  auto edges() const -> std::span<const RdcegEdge> { return edges_; }
  auto out_edges(int v) const -> std::span<const int> { return out_.at(v); }
  auto in_edges(int v) const -> std::span<const int> { return in_.at(v); }
  auto find_vertex(std::string_view name) const -> std::optional<int>;
  auto vertex_by_name(std::string_view name) const -> int;  // throws ValidationError
  auto has_cyclic_edges() const -> bool;
  // Position of each hued-tree situation (k_none for leaves).
  auto position_of() const -> const std::vector<int>& { return position_of_; }

  // Copy with per-edge parameters replaced (indexed by edge id).
  auto with_parameters(std::vector<std::optional<double>> probabilities,
                       std::vector<std::optional<HoldingLaw>> laws) const -> Rdceg;

 private:
  friend auto build_rdceg(const HuedTree&, const Partition&) -> Rdceg;
  std::vector<RdcegVertex> vertices_;
  std::vector<RdcegEdge> edges_;
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;
  std::vector<int> position_of_;
  int sink_ = k_none;
};

// Coalesces each position into one vertex.  Throws StagingError if members of a position disagree
// on their outgoing structure, StructuralError on a self-loop.
auto build_rdceg(const HuedTree& hued, const Partition& positions) -> Rdceg;

struct PassageSlice {
  int index = 0;                // 1-based
  std::vector<int> roots;       // RDCEG vertices
  std::vector<int> vertices;    // reachable from the roots without crossing a slice boundary
  std::vector<int> edges;       // non-boundary edges among them
  std::vector<int> exits;       // boundary edges leaving the slice
};

struct SliceStructure {
  std::vector<PassageSlice> slices;
  // 1-based index of the slice from which the sequence repeats periodically: after the last slice
  // the next one would have the same roots as slice `periodic_from`.  0 if the sequence ends.
  int periodic_from = 0;
};

auto passage_slices(const Rdceg& graph) -> SliceStructure;

// Graphviz rendering: stage colors as vertex fills, cluster colors as edge colors,
// cyclic edges dashed, legends as comments.  Singleton stages and clusters stay uncolored.
auto to_dot(const Rdceg& graph, const EventTree* tree = nullptr) -> std::string;

}  // namespace rdceg

#pragma once

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rdceg {

using Vertex_id = int;
using Edge_id = int;
inline constexpr int k_none = -1;

struct EdgeFlags {
  bool timed = false;
  // Crossing this edge starts a new passage-slice.  Edges into repeat markers always do.
  bool slice_boundary = false;
};

struct TreeEdge {
  Vertex_id parent = k_none;
  Vertex_id child = k_none;
  std::string label;
  bool timed = false;
  bool slice_boundary = false;
  friend auto operator==(const TreeEdge&, const TreeEdge&) -> bool = default;
};

// A finite event-tree template.  Vertex ids are assigned breadth-first from the root (root = 0),
// children in insertion order; edge ids follow the same order, so edge e enters vertex e + 1.
// Infinite trees are written with repeat markers: leaves that stand for another situation's subtree.
class EventTree {
 public:
  EventTree() = default;

  auto num_vertices() const -> int { return static_cast<int>(names_.size()); }
  auto num_edges() const -> int { return static_cast<int>(edges_.size()); }
  auto root() const -> Vertex_id { return 0; }

  auto name(Vertex_id v) const -> const std::string& { return names_.at(v); }
  auto find_vertex(std::string_view name) const -> std::optional<Vertex_id>;
  auto vertex(std::string_view name) const -> Vertex_id;  // throws ValidationError

  auto edge(Edge_id e) const -> const TreeEdge& { return edges_.at(e); }
  auto out_edges(Vertex_id v) const -> std::span<const Edge_id> { return out_.at(v); }
  auto in_edge(Vertex_id v) const -> Edge_id { return v == 0 ? k_none : v - 1; }
  auto child_edge(Vertex_id v, std::string_view label) const -> std::optional<Edge_id>;
  auto out_labels(Vertex_id v) const -> std::vector<std::string>;

  auto is_leaf(Vertex_id v) const -> bool { return out_.at(v).empty(); }
  auto is_situation(Vertex_id v) const -> bool { return !is_leaf(v); }
  auto is_repeat(Vertex_id v) const -> bool { return repeat_.at(v) != k_none; }
  auto is_terminal(Vertex_id v) const -> bool { return is_leaf(v) && !is_repeat(v); }
  auto repeat_target(Vertex_id v) const -> Vertex_id { return repeat_.at(v); }
  // The situation reached by crossing e: the child, or the repeat target if the child is a marker.
  // k_none for terminal leaves.
  auto resolved_child(Edge_id e) const -> Vertex_id;

  auto situations() const -> std::vector<Vertex_id>;
  auto leaves() const -> std::vector<Vertex_id>;  // terminal leaves only
  auto timed_edges() const -> std::vector<Edge_id>;

  // Edges are keyed "parent/label" in files and configs.
  auto edge_key(Edge_id e) const -> std::string;
  auto find_edge(std::string_view key) const -> std::optional<Edge_id>;
  auto edge_by_key(std::string_view key) const -> Edge_id;  // throws ValidationError

  friend auto operator==(const EventTree&, const EventTree&) -> bool = default;

 private:
  friend class TreeBuilder;
  std::vector<std::string> names_;
  std::vector<TreeEdge> edges_;
  std::vector<std::vector<Edge_id>> out_;
  std::vector<Vertex_id> repeat_;
  std::map<std::string, Vertex_id, std::less<>> by_name_;
};

// Collects vertices in any order; build() validates and renumbers breadth-first.
// Handles returned here are builder-local and unrelated to the final ids.
class TreeBuilder {
 public:
  auto add_root(std::string name) -> int;
  // An empty name is replaced by "parent/label".
  auto add_child(int parent, std::string label, std::string name = {}, EdgeFlags flags = {}) -> int;
  // A leaf standing for `target`'s subtree.  The edge into it is a slice boundary.
  // Targets are resolved by name at build(), so they may be added later.
  auto add_repeat(int parent, std::string label, std::string target, EdgeFlags flags = {}) -> int;
  auto add_repeat(int parent, std::string label, int target, EdgeFlags flags = {}) -> int {
    return add_repeat(parent, std::move(label), name(target), flags);
  }
  auto name(int handle) const -> const std::string& { return nodes_.at(handle).name; }

  auto build() const -> EventTree;

 private:
  struct Node {
    std::string name;
    int parent = k_none;
    std::string label;
    EdgeFlags flags;
    std::string repeat_target;  // empty unless a repeat marker
    std::vector<int> children;
  };
  std::vector<Node> nodes_;
};

// Per-situation transition probabilities, keyed by situation name and aligned with out_edges().
using TransitionTable = std::map<std::string, std::vector<double>>;

struct ModifiedTree {
  EventTree tree;
  std::set<std::string> critical;                  // D*: retained terminal leaves, by name
  std::vector<std::vector<double>> probabilities;  // per vertex, aligned with out_edges(); empty if unknown
  std::vector<bool> renormalized;                  // per vertex: some out-edge was pruned

  friend auto operator==(const ModifiedTree&, const ModifiedTree&) -> bool = default;
};

// Prunes terminal leaves outside `critical` (and any situation left without children),
// then renormalizes the supplied probabilities over the surviving out-edges.
auto modify_tree(const EventTree& tree, const std::set<std::string>& critical,
                 const TransitionTable* probs = nullptr) -> ModifiedTree;

// The modified tree with nothing pruned.
auto unmodified(const EventTree& tree) -> ModifiedTree;

}  // namespace rdceg

#include "rdceg/event_tree.hpp"

#include <cmath>
#include <deque>

#include "rdceg/error.hpp"

namespace rdceg {

auto EventTree::find_vertex(std::string_view name) const -> std::optional<Vertex_id> {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

auto EventTree::vertex(std::string_view name) const -> Vertex_id {
  auto v = find_vertex(name);
  if (!v) throw ValidationError{"unknown vertex '" + std::string{name} + "'"};
  return *v;
}

auto EventTree::child_edge(Vertex_id v, std::string_view label) const -> std::optional<Edge_id> {
  for (auto e : out_.at(v)) {
    if (edges_[e].label == label) return e;
  }
  return std::nullopt;
}

auto EventTree::out_labels(Vertex_id v) const -> std::vector<std::string> {
  auto result = std::vector<std::string>{};
  for (auto e : out_.at(v)) result.push_back(edges_[e].label);
  return result;
}

auto EventTree::resolved_child(Edge_id e) const -> Vertex_id {
  auto c = edges_.at(e).child;
  if (is_repeat(c)) return repeat_[c];
  if (is_leaf(c)) return k_none;
  return c;
}

auto EventTree::situations() const -> std::vector<Vertex_id> {
  auto result = std::vector<Vertex_id>{};
  for (auto v = 0; v < num_vertices(); ++v) {
    if (is_situation(v)) result.push_back(v);
  }
  return result;
}

auto EventTree::leaves() const -> std::vector<Vertex_id> {
  auto result = std::vector<Vertex_id>{};
  for (auto v = 0; v < num_vertices(); ++v) {
    if (is_terminal(v)) result.push_back(v);
  }
  return result;
}

auto EventTree::timed_edges() const -> std::vector<Edge_id> {
  auto result = std::vector<Edge_id>{};
  for (auto e = 0; e < num_edges(); ++e) {
    if (edges_[e].timed) result.push_back(e);
  }
  return result;
}

auto EventTree::edge_key(Edge_id e) const -> std::string {
  const auto& edge = edges_.at(e);
  return names_[edge.parent] + "/" + edge.label;
}

auto EventTree::find_edge(std::string_view key) const -> std::optional<Edge_id> {
  auto slash = key.rfind('/');
  if (slash == std::string_view::npos) return std::nullopt;
  auto parent = find_vertex(key.substr(0, slash));
  if (!parent) return std::nullopt;
  return child_edge(*parent, key.substr(slash + 1));
}

auto EventTree::edge_by_key(std::string_view key) const -> Edge_id {
  auto e = find_edge(key);
  if (!e) throw ValidationError{"unknown edge '" + std::string{key} + "'"};
  return *e;
}

auto TreeBuilder::add_root(std::string name) -> int {
  if (!nodes_.empty()) throw StructuralError{"tree already has a root"};
  if (name.empty()) throw ValidationError{"root needs a name"};
  nodes_.push_back(Node{.name = std::move(name)});
  return 0;
}

auto TreeBuilder::add_child(int parent, std::string label, std::string name, EdgeFlags flags) -> int {
  if (parent < 0 || parent >= static_cast<int>(nodes_.size())) {
    throw StructuralError{"unknown parent handle " + std::to_string(parent)};
  }
  if (!nodes_[parent].repeat_target.empty()) {
    throw StructuralError{"repeat marker '" + nodes_[parent].name + "' cannot have children"};
  }
  if (label.empty()) throw ValidationError{"edge label is empty"};
  if (label.find('/') != std::string::npos) {
    throw ValidationError{"edge label '" + label + "' contains '/'"};
  }
  if (name.empty()) name = nodes_[parent].name + "/" + label;
  auto handle = static_cast<int>(nodes_.size());
  nodes_.push_back(Node{.name = std::move(name), .parent = parent, .label = std::move(label), .flags = flags});
  nodes_[parent].children.push_back(handle);
  return handle;
}

auto TreeBuilder::add_repeat(int parent, std::string label, std::string target, EdgeFlags flags) -> int {
  if (target.empty()) throw ValidationError{"repeat marker needs a target"};
  flags.slice_boundary = true;
  auto handle = add_child(parent, std::move(label), {}, flags);
  nodes_[handle].repeat_target = std::move(target);
  return handle;
}

auto TreeBuilder::build() const -> EventTree {
  if (nodes_.empty()) throw StructuralError{"tree has no root"};

  auto order = std::vector<int>{};
  auto queue = std::deque<int>{0};
  while (!queue.empty()) {
    auto h = queue.front();
    queue.pop_front();
    order.push_back(h);
    for (auto c : nodes_[h].children) queue.push_back(c);
  }

  auto id_of = std::vector<int>(nodes_.size(), k_none);
  for (auto i = 0; i < static_cast<int>(order.size()); ++i) id_of[order[i]] = i;

  auto tree = EventTree{};
  auto n = static_cast<int>(order.size());
  tree.names_.resize(n);
  tree.out_.resize(n);
  tree.repeat_.assign(n, k_none);
  for (auto i = 0; i < n; ++i) {
    const auto& node = nodes_[order[i]];
    tree.names_[i] = node.name;
    if (!tree.by_name_.emplace(node.name, i).second) {
      throw StructuralError{"duplicate vertex name '" + node.name + "'"};
    }
    if (i > 0) {
      auto parent = id_of[node.parent];
      auto e = static_cast<Edge_id>(tree.edges_.size());
      tree.edges_.push_back(TreeEdge{.parent = parent,
                                     .child = i,
                                     .label = node.label,
                                     .timed = node.flags.timed,
                                     .slice_boundary = node.flags.slice_boundary});
      for (auto other : tree.out_[parent]) {
        if (tree.edges_[other].label == node.label) {
          throw StructuralError{"duplicate label '" + node.label + "' under '" + tree.names_[parent] + "'"};
        }
      }
      tree.out_[parent].push_back(e);
    }
  }
  for (auto i = 0; i < n; ++i) {
    const auto& node = nodes_[order[i]];
    if (node.repeat_target.empty()) continue;
    auto target = tree.find_vertex(node.repeat_target);
    if (!target) throw StructuralError{"repeat target '" + node.repeat_target + "' not in tree"};
    if (tree.is_leaf(*target)) {
      throw StructuralError{"repeat target '" + node.repeat_target + "' is not a situation"};
    }
    tree.repeat_[i] = *target;
  }
  return tree;
}

namespace {

void check_probabilities(const EventTree& tree, const TransitionTable& probs) {
  for (const auto& [name, p] : probs) {
    auto v = tree.find_vertex(name);
    if (!v || !tree.is_situation(*v)) throw ValidationError{"probabilities given for non-situation '" + name + "'"};
    if (p.size() != tree.out_edges(*v).size()) {
      throw ValidationError{"probability vector for '" + name + "' has wrong length"};
    }
    auto sum = 0.0;
    for (auto x : p) {
      if (!(x >= 0.0)) throw ValidationError{"negative probability at '" + name + "'"};
      sum += x;
    }
    if (sum > 1.0 + 1e-9) throw ValidationError{"probabilities at '" + name + "' sum above 1"};
  }
}

}  // namespace

auto modify_tree(const EventTree& tree, const std::set<std::string>& critical, const TransitionTable* probs)
    -> ModifiedTree {
  for (const auto& name : critical) {
    auto v = tree.find_vertex(name);
    if (!v || !tree.is_terminal(*v)) throw ValidationError{"critical vertex '" + name + "' is not a leaf"};
  }
  if (probs) check_probabilities(tree, *probs);

  // Children have larger ids than parents, so one reverse sweep settles every vertex.
  auto n = tree.num_vertices();
  auto keep = std::vector<bool>(n, false);
  for (auto v = n - 1; v >= 0; --v) {
    if (tree.is_repeat(v)) {
      keep[v] = true;
    } else if (tree.is_leaf(v)) {
      keep[v] = critical.contains(tree.name(v));
    } else {
      for (auto e : tree.out_edges(v)) keep[v] = keep[v] || keep[tree.edge(e).child];
    }
  }
  if (!keep[tree.root()]) throw StructuralError{"pruning removes the whole tree"};
  for (auto v = 0; v < n; ++v) {
    if (keep[v] && tree.is_repeat(v) && !keep[tree.repeat_target(v)]) {
      throw StructuralError{"repeat marker '" + tree.name(v) + "' points at pruned situation '" +
                            tree.name(tree.repeat_target(v)) + "'"};
    }
  }

  auto builder = TreeBuilder{};
  auto handle = std::vector<int>(n, k_none);
  handle[0] = builder.add_root(tree.name(0));
  for (auto v = 1; v < n; ++v) {
    if (!keep[v]) continue;
    const auto& e = tree.edge(tree.in_edge(v));
    auto flags = EdgeFlags{.timed = e.timed, .slice_boundary = e.slice_boundary};
    if (tree.is_repeat(v)) {
      handle[v] = builder.add_repeat(handle[e.parent], e.label, tree.name(tree.repeat_target(v)), flags);
    } else {
      handle[v] = builder.add_child(handle[e.parent], e.label, tree.name(v), flags);
    }
  }

  auto result = ModifiedTree{.tree = builder.build()};
  const auto& m = result.tree;
  for (const auto& name : critical) result.critical.insert(name);
  result.probabilities.resize(m.num_vertices());
  result.renormalized.assign(m.num_vertices(), false);
  for (auto v = 0; v < m.num_vertices(); ++v) {
    if (m.is_leaf(v)) continue;
    auto old = tree.vertex(m.name(v));
    result.renormalized[v] = tree.out_edges(old).size() != m.out_edges(v).size();
    if (!probs) continue;
    auto it = probs->find(m.name(v));
    if (it == probs->end()) continue;
    auto p = std::vector<double>{};
    auto sum = 0.0;
    for (auto e : m.out_edges(v)) {
      auto old_e = *tree.child_edge(old, m.edge(e).label);
      auto idx = old_e - tree.out_edges(old).front();
      p.push_back(it->second[idx]);
      sum += p.back();
    }
    if (sum <= 0.0) {
      throw StructuralError{"retained edges of '" + m.name(v) + "' carry zero probability"};
    }
    for (auto& x : p) x /= sum;
    result.probabilities[v] = std::move(p);
  }
  return result;
}

auto unmodified(const EventTree& tree) -> ModifiedTree {
  auto critical = std::set<std::string>{};
  for (auto v : tree.leaves()) critical.insert(tree.name(v));
  return modify_tree(tree, critical);
}

}  // namespace rdceg

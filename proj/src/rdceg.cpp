#include "rdceg/rdceg.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "rdceg/error.hpp"

namespace rdceg {

Rdceg::Rdceg(std::vector<RdcegVertex> vertices, std::vector<RdcegEdge> edges)
    : vertices_{std::move(vertices)}, edges_{std::move(edges)} {
  auto n = static_cast<int>(vertices_.size());
  out_.assign(n, {});
  in_.assign(n, {});
  for (auto v = 0; v < n; ++v) {
    if (vertices_[v].is_sink) sink_ = v;
  }
  for (auto e = 0; e < static_cast<int>(edges_.size()); ++e) {
    const auto& edge = edges_[e];
    if (edge.source < 0 || edge.source >= n || edge.target < 0 || edge.target >= n) {
      throw StructuralError{"edge endpoint out of range"};
    }
    if (edge.source == edge.target) {
      throw StructuralError{"self-loop at '" + vertices_[edge.source].name + "' (label '" + edge.label + "')"};
    }
    out_[edge.source].push_back(e);
    in_[edge.target].push_back(e);
  }
}

auto Rdceg::find_vertex(std::string_view name) const -> std::optional<int> {
  for (auto v = 0; v < num_vertices(); ++v) {
    if (vertices_[v].name == name) return v;
  }
  return std::nullopt;
}

auto Rdceg::vertex_by_name(std::string_view name) const -> int {
  auto v = find_vertex(name);
  if (!v) throw ValidationError{"unknown RDCEG vertex '" + std::string{name} + "'"};
  return *v;
}

auto Rdceg::has_cyclic_edges() const -> bool {
  return std::ranges::any_of(edges_, [](const RdcegEdge& e) { return e.cyclic; });
}

auto Rdceg::with_parameters(std::vector<std::optional<double>> probabilities,
                            std::vector<std::optional<HoldingLaw>> laws) const -> Rdceg {
  if (probabilities.size() != edges_.size() || laws.size() != edges_.size()) {
    throw StructuralError{"parameter arrays do not match the RDCEG edges"};
  }
  auto copy = *this;
  for (auto e = 0u; e < edges_.size(); ++e) {
    copy.edges_[e].probability = probabilities[e];
    copy.edges_[e].law = std::move(laws[e]);
  }
  return copy;
}

auto build_rdceg(const HuedTree& hued, const Partition& positions) -> Rdceg {
  const auto& tree = hued.tree();
  auto stage_of = hued.staging.stage_of(tree.num_vertices());
  auto cluster_of = hued.clustering.cluster_of(tree.num_edges());

  auto position_of = std::vector<int>(tree.num_vertices(), k_none);
  auto cells = positions.cells;
  std::ranges::sort(cells, [](const auto& a, const auto& b) { return *std::ranges::min_element(a) <
                                                                     *std::ranges::min_element(b); });
  for (auto p = 0; p < static_cast<int>(cells.size()); ++p) {
    if (cells[p].empty()) throw StagingError{"empty position"};
    for (auto v : cells[p]) {
      if (v < 0 || v >= tree.num_vertices() || !tree.is_situation(v)) {
        throw StagingError{"position member " + std::to_string(v) + " is not a situation"};
      }
      if (position_of[v] != k_none) throw StagingError{"situation '" + tree.name(v) + "' is in two positions"};
      if (stage_of[v] != stage_of[cells[p].front()]) {
        throw StagingError{"position mixes stages at '" + tree.name(v) + "'"};
      }
      position_of[v] = p;
    }
    std::ranges::sort(cells[p]);
  }
  for (auto v : tree.situations()) {
    if (position_of[v] == k_none) throw StagingError{"situation '" + tree.name(v) + "' is in no position"};
  }
  if (position_of[tree.root()] != 0) throw StagingError{"root must be in the first position"};

  auto num_positions = static_cast<int>(cells.size());
  auto needs_sink = !tree.leaves().empty();
  auto sink = needs_sink ? num_positions : k_none;

  auto vertices = std::vector<RdcegVertex>{};
  for (auto p = 0; p < num_positions; ++p) {
    vertices.push_back(RdcegVertex{.name = "w" + std::to_string(p),
                                   .members = cells[p],
                                   .stage = stage_of[cells[p].front()]});
  }
  if (needs_sink) vertices.push_back(RdcegVertex{.name = "w_inf", .is_sink = true});

  // Outgoing signature of a situation: label -> (target, timed, cyclic, boundary, cluster).
  using Signature = std::map<std::string, std::tuple<int, bool, bool, bool, int>>;
  auto signature = [&](Vertex_id v) {
    auto sig = Signature{};
    for (auto e : tree.out_edges(v)) {
      const auto& edge = tree.edge(e);
      auto c = edge.child;
      auto target = tree.is_repeat(c) ? position_of[tree.repeat_target(c)]
                    : tree.is_leaf(c) ? sink
                                      : position_of[c];
      sig[edge.label] = {target, edge.timed, tree.is_repeat(c), edge.slice_boundary, cluster_of[e]};
    }
    return sig;
  };

  auto edges = std::vector<RdcegEdge>{};
  for (auto p = 0; p < num_positions; ++p) {
    auto rep = cells[p].front();
    auto sig = signature(rep);
    for (auto v : cells[p]) {
      if (signature(v) != sig) {
        throw StagingError{"situations '" + tree.name(rep) + "' and '" + tree.name(v) +
                           "' share a position but differ in their outgoing edges"};
      }
    }
    for (auto e : tree.out_edges(rep)) {
      const auto& label = tree.edge(e).label;
      const auto& [target, timed, cyclic, boundary, cluster] = sig.at(label);
      auto edge = RdcegEdge{.source = p,
                            .target = target,
                            .label = label,
                            .timed = timed,
                            .cyclic = cyclic,
                            .slice_boundary = boundary,
                            .cluster = cluster};
      for (auto v : cells[p]) edge.members.push_back(*tree.child_edge(v, label));
      edges.push_back(std::move(edge));
    }
  }

  auto graph = Rdceg{std::move(vertices), std::move(edges)};
  graph.position_of_ = std::move(position_of);
  return graph;
}

auto passage_slices(const Rdceg& graph) -> SliceStructure {
  auto result = SliceStructure{};
  auto roots = std::vector<int>{graph.root()};
  auto seen_roots = std::map<std::vector<int>, int>{};
  while (true) {
    auto [it, fresh] = seen_roots.try_emplace(roots, static_cast<int>(result.slices.size()) + 1);
    if (!fresh) {
      result.periodic_from = it->second;
      break;
    }
    auto slice = PassageSlice{.index = static_cast<int>(result.slices.size()) + 1, .roots = roots};
    auto in_slice = std::vector<bool>(graph.num_vertices(), false);
    auto queue = std::deque<int>(roots.begin(), roots.end());
    for (auto r : roots) in_slice[r] = true;
    auto exit_targets = std::set<int>{};
    while (!queue.empty()) {
      auto v = queue.front();
      queue.pop_front();
      slice.vertices.push_back(v);
      for (auto e : graph.out_edges(v)) {
        const auto& edge = graph.edge(e);
        if (edge.slice_boundary) {
          slice.exits.push_back(e);
          exit_targets.insert(edge.target);
          continue;
        }
        slice.edges.push_back(e);
        if (!in_slice[edge.target]) {
          in_slice[edge.target] = true;
          queue.push_back(edge.target);
        }
      }
    }
    std::ranges::sort(slice.vertices);
    std::ranges::sort(slice.edges);
    std::ranges::sort(slice.exits);
    result.slices.push_back(std::move(slice));
    if (exit_targets.empty()) break;
    roots.assign(exit_targets.begin(), exit_targets.end());
  }
  return result;
}

namespace {

const char* const k_palette[] = {"#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00", "#a65628", "#f781bf",
                                 "#999999", "#66c2a5", "#fc8d62", "#8da0cb", "#e78ac3", "#a6d854", "#ffd92f",
                                 "#e5c494", "#b3b3b3", "#1b9e77", "#d95f02", "#7570b3", "#e7298a"};

auto palette(int i) -> std::string { return k_palette[i % std::size(k_palette)]; }

}  // namespace

auto to_dot(const Rdceg& graph, const EventTree* tree) -> std::string {
  // Only stages spanning several positions, and clusters spanning several edges, get a color.
  auto stage_members = std::map<int, std::vector<int>>{};
  for (auto v = 0; v < graph.num_vertices(); ++v) {
    if (graph.vertex(v).stage != k_none) stage_members[graph.vertex(v).stage].push_back(v);
  }
  auto cluster_members = std::map<int, std::vector<int>>{};
  for (auto e = 0; e < graph.num_edges(); ++e) {
    if (graph.edge(e).cluster != k_none) cluster_members[graph.edge(e).cluster].push_back(e);
  }
  auto stage_color = std::map<int, std::string>{};
  for (const auto& [s, vs] : stage_members) {
    if (vs.size() > 1) stage_color[s] = palette(static_cast<int>(stage_color.size()));
  }
  auto cluster_color = std::map<int, std::string>{};
  for (const auto& [c, es] : cluster_members) {
    if (es.size() > 1) cluster_color[c] = palette(static_cast<int>(cluster_color.size()) + 7);
  }

  auto out = std::ostringstream{};
  out << "digraph rdceg {\n  rankdir=LR;\n  node [shape=circle, style=filled, fillcolor=white];\n";
  for (const auto& [s, color] : stage_color) {
    out << "  // stage " << s << " " << color << ":";
    for (auto v : stage_members[s]) out << " " << graph.vertex(v).name;
    out << "\n";
  }
  for (const auto& [c, color] : cluster_color) {
    out << "  // cluster " << c << " " << color << ":";
    for (auto e : cluster_members[c]) {
      const auto& edge = graph.edge(e);
      out << " " << graph.vertex(edge.source).name << "->" << graph.vertex(edge.target).name << "[" << edge.label
          << "]";
    }
    out << "\n";
  }
  if (tree) {
    for (auto v = 0; v < graph.num_vertices(); ++v) {
      const auto& vx = graph.vertex(v);
      if (vx.members.empty()) continue;
      out << "  // " << vx.name << " =";
      for (auto s : vx.members) out << " " << tree->name(s);
      out << "\n";
    }
  }
  for (auto v = 0; v < graph.num_vertices(); ++v) {
    const auto& vx = graph.vertex(v);
    out << "  \"" << vx.name << "\"";
    if (vx.is_sink) {
      out << " [shape=doublecircle]";
    } else if (stage_color.contains(vx.stage)) {
      out << " [fillcolor=\"" << stage_color[vx.stage] << "\"]";
    }
    out << ";\n";
  }
  for (auto e = 0; e < graph.num_edges(); ++e) {
    const auto& edge = graph.edge(e);
    out << "  \"" << graph.vertex(edge.source).name << "\" -> \"" << graph.vertex(edge.target).name
        << "\" [label=\"" << edge.label;
    if (edge.probability) out << " (" << *edge.probability << ")";
    out << "\"";
    if (cluster_color.contains(edge.cluster)) out << ", color=\"" << cluster_color[edge.cluster] << "\"";
    if (edge.cyclic) out << ", style=dashed";
    out << "];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace rdceg

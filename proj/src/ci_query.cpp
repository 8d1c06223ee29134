#include "rdceg/ci_query.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include <fmt/format.h>

#include "rdceg/error.hpp"

namespace rdceg {

namespace {

constexpr std::uint64_t k_mod = (1ULL << 61) - 1;

auto mod_add(std::uint64_t a, std::uint64_t b) -> std::uint64_t {
  auto s = a + b;
  return s >= k_mod ? s - k_mod : s;
}

auto mod_mul(std::uint64_t a, std::uint64_t b) -> std::uint64_t {
  auto p = static_cast<unsigned __int128>(a) * b;
  auto lo = static_cast<std::uint64_t>(p & k_mod);
  auto hi = static_cast<std::uint64_t>(p >> 61);
  return mod_add(lo, hi);
}

auto primed(const std::string& name, int slice) -> std::string {
  return name + std::string(static_cast<std::size_t>(std::max(0, slice - 1)), '\'');
}

auto join_names(const RolledCeg& g, const std::vector<int>& vs) -> std::string {
  std::string out;
  for (std::size_t i = 0; i < vs.size(); ++i) {
    if (i > 0) out += ", ";
    out += g.vertex(vs[i]).name;
  }
  return out;
}

// reach[u][v]: v reachable from u by a nonempty path.
auto reachability(const RolledCeg& g) -> std::vector<std::vector<char>> {
  auto n = g.num_vertices();
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  const auto& topo = g.topological_order();
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    auto u = *it;
    for (auto e : g.out_edges(u)) {
      auto v = g.edge(e).target;
      reach[u][v] = 1;
      for (int w = 0; w < n; ++w)
        if (reach[v][w]) reach[u][w] = 1;
    }
  }
  return reach;
}

// Any root-to-sink path through `via` (in order), vertices only.
auto path_through(const RolledCeg& g, const std::vector<int>& via) -> std::vector<int> {
  std::vector<int> stops{g.root()};
  stops.insert(stops.end(), via.begin(), via.end());
  stops.push_back(g.sink());
  std::vector<int> path{g.root()};
  for (std::size_t i = 0; i + 1 < stops.size(); ++i) {
    auto from = stops[i];
    auto to = stops[i + 1];
    if (from == to) continue;
    std::vector<int> parent(g.num_vertices(), k_none);
    std::deque<int> q{from};
    parent[from] = from;
    while (!q.empty() && parent[to] == k_none) {
      auto u = q.front();
      q.pop_front();
      for (auto e : g.out_edges(u)) {
        auto v = g.edge(e).target;
        if (parent[v] == k_none) {
          parent[v] = u;
          q.push_back(v);
        }
      }
    }
    std::vector<int> seg;
    for (auto v = to; v != from; v = parent[v]) seg.push_back(v);
    path.insert(path.end(), seg.rbegin(), seg.rend());
  }
  return path;
}

// A root-to-sink path avoiding `blocked`, empty if none.
auto path_avoiding(const RolledCeg& g, const std::vector<char>& blocked) -> std::vector<int> {
  if (blocked[g.root()]) return {};
  std::vector<int> parent(g.num_vertices(), k_none);
  std::deque<int> q{g.root()};
  parent[g.root()] = g.root();
  while (!q.empty()) {
    auto u = q.front();
    q.pop_front();
    for (auto e : g.out_edges(u)) {
      auto v = g.edge(e).target;
      if (blocked[v] || parent[v] != k_none) continue;
      parent[v] = u;
      q.push_back(v);
    }
  }
  if (parent[g.sink()] == k_none) return {};
  std::vector<int> path;
  for (auto v = g.sink(); v != g.root(); v = parent[v]) path.push_back(v);
  path.push_back(g.root());
  std::ranges::reverse(path);
  return path;
}

auto build_rolled(const Rdceg& graph, const std::vector<int>& roots, int first_slice, int depth) -> RolledCeg {
  const auto last = first_slice + depth - 1;
  std::map<std::pair<int, int>, int> id;  // (rdceg vertex, slice) -> index
  std::vector<RolledVertex> vertices;
  std::vector<std::pair<int, int>> key;
  constexpr int sink_id = -2;
  struct Pending {
    int source;
    int target;  // index or sink_id
    int e;
  };
  std::vector<Pending> pending;
  std::deque<int> queue;
  auto intern = [&](int v, int k) {
    auto [it, fresh] = id.try_emplace({v, k}, static_cast<int>(vertices.size()));
    if (fresh) {
      vertices.push_back({primed(graph.vertex(v).name, k), v, k, graph.vertex(v).stage, false});
      key.emplace_back(v, k);
      queue.push_back(it->second);
    }
    return it->second;
  };
  if (roots.size() == 1) {
    intern(roots.front(), first_slice);
  } else {
    vertices.push_back({"start", k_none, first_slice, k_none, false});
    key.emplace_back(k_none, first_slice);
    for (auto r : roots) pending.push_back({0, intern(r, first_slice), k_none});
  }
  while (!queue.empty()) {
    auto u = queue.front();
    queue.pop_front();
    auto [v, k] = key[u];
    for (auto e : graph.out_edges(v)) {
      const auto& edge = graph.edge(e);
      int target;
      if (edge.target == graph.sink()) {
        target = sink_id;
      } else if (edge.slice_boundary) {
        target = k == last ? sink_id : intern(edge.target, k + 1);
      } else {
        target = intern(edge.target, k);
      }
      pending.push_back({u, target, e});
    }
  }
  auto sink = static_cast<int>(vertices.size());
  vertices.push_back({"w_inf", k_none, 0, k_none, true});
  std::vector<RolledEdge> edges;
  for (const auto& p : pending) {
    RolledEdge re;
    re.source = p.source;
    re.target = p.target == sink_id ? sink : p.target;
    if (p.e == k_none) {
      re.label = vertices[re.target].name;
    } else {
      const auto& edge = graph.edge(p.e);
      re.label = edge.label;
      re.rdceg_edge = p.e;
      re.cluster = edge.cluster;
      re.timed = edge.timed;
    }
    edges.push_back(std::move(re));
  }
  return RolledCeg{std::move(vertices), std::move(edges), first_slice, depth};
}

}  // namespace

RolledCeg::RolledCeg(std::vector<RolledVertex> vertices, std::vector<RolledEdge> edges, int first_slice, int depth)
    : vertices_{std::move(vertices)}, edges_{std::move(edges)}, first_slice_{first_slice}, depth_{depth} {
  auto n = num_vertices();
  out_.assign(n, {});
  in_.assign(n, {});
  for (int e = 0; e < num_edges(); ++e) {
    const auto& edge = edges_[e];
    if (edge.source < 0 || edge.source >= n || edge.target < 0 || edge.target >= n)
      throw StructuralError{"rolled graph edge out of range"};
    out_[edge.source].push_back(e);
    in_[edge.target].push_back(e);
  }
  for (int v = 0; v < n; ++v) {
    if (!vertices_[v].is_sink) continue;
    if (sink_ != k_none) throw StructuralError{"rolled graph has more than one sink"};
    sink_ = v;
  }
  if (sink_ == k_none) throw StructuralError{"rolled graph has no sink"};
  std::vector<int> indeg(n, 0);
  for (const auto& edge : edges_) ++indeg[edge.target];
  std::deque<int> q;
  for (int v = 0; v < n; ++v)
    if (indeg[v] == 0) q.push_back(v);
  while (!q.empty()) {
    auto u = q.front();
    q.pop_front();
    topo_.push_back(u);
    for (auto e : out_[u])
      if (--indeg[edges_[e].target] == 0) q.push_back(edges_[e].target);
  }
  if (static_cast<int>(topo_.size()) != n) throw StructuralError{"rolled graph has a cycle"};
}

auto RolledCeg::find_vertex(std::string_view name) const -> std::optional<int> {
  for (int v = 0; v < num_vertices(); ++v)
    if (vertices_[v].name == name) return v;
  return std::nullopt;
}

auto RolledCeg::vertex_by_name(std::string_view name) const -> int {
  if (auto v = find_vertex(name)) return *v;
  throw ValidationError{fmt::format("unknown vertex '{}'", name)};
}

auto RolledCeg::path_count() const -> double {
  std::vector<double> count(vertices_.size(), 0.0);
  count[root()] = 1.0;
  for (auto u : topo_)
    for (auto e : out_[u]) count[edges_[e].target] += count[u];
  return count[sink_];
}

auto RolledCeg::paths(std::size_t limit) const -> std::vector<std::vector<int>> {
  std::vector<std::vector<int>> out;
  std::vector<int> cur{root()};
  auto walk = [&](auto&& self, int u) -> void {
    if (out.size() >= limit) return;
    if (u == sink_) {
      out.push_back(cur);
      return;
    }
    std::vector<int> next;
    for (auto e : out_[u])
      if (std::ranges::find(next, edges_[e].target) == next.end()) next.push_back(edges_[e].target);
    for (auto v : next) {
      cur.push_back(v);
      self(self, v);
      cur.pop_back();
    }
  };
  walk(walk, root());
  return out;
}

auto roll_out(const Rdceg& graph, int n) -> RolledCeg {
  if (n < 1) throw ValidationError{"roll-out depth must be at least 1"};
  // Without cyclic edges nothing repeats: the roll-out is the whole graph at any depth.
  if (!graph.has_cyclic_edges()) n = std::max(n, static_cast<int>(passage_slices(graph).slices.size()));
  return build_rolled(graph, {graph.root()}, 1, n);
}

auto slice_graph(const Rdceg& graph, int k) -> RolledCeg {
  auto slices = passage_slices(graph);
  if (k < 1 || k > static_cast<int>(slices.slices.size()))
    throw ValidationError{fmt::format("passage-slice {} does not exist (the graph has {})", k, slices.slices.size())};
  return build_rolled(graph, slices.slices[k - 1].roots, k, 1);
}

auto cut_kind_name(CutKind kind) -> std::string {
  switch (kind) {
    case CutKind::Cut: return "cut";
    case CutKind::FineCut: return "fine-cut";
    case CutKind::Neither: return "neither";
  }
  return "neither";
}

auto check_cut(const RolledCeg& g, std::vector<int> vertices) -> CutReport {
  std::ranges::sort(vertices);
  vertices.erase(std::ranges::unique(vertices).begin(), vertices.end());
  if (vertices.empty()) throw ValidationError{"empty vertex set"};
  for (auto v : vertices) {
    if (v < 0 || v >= g.num_vertices()) throw ValidationError{fmt::format("vertex {} out of range", v)};
    if (v == g.sink()) throw ValidationError{"the sink cannot be part of a cut"};
  }
  CutReport rep;
  rep.vertices = vertices;
  rep.first_slice = g.first_slice();

  auto reach = reachability(g);
  for (auto u : vertices)
    for (auto w : vertices)
      if (u != w && reach[u][w]) {
        rep.violating_path = path_through(g, {u, w});
        rep.reason = fmt::format("a path meets both {} and {}", g.vertex(u).name, g.vertex(w).name);
        return rep;
      }

  // An antichain is met at most once by each path, so it is met exactly once by all of them iff
  // the paths through its members add up to the total.
  auto n = g.num_vertices();
  std::vector<std::uint64_t> fwd(n, 0), bwd(n, 0);
  fwd[g.root()] = 1;
  bwd[g.sink()] = 1;
  const auto& topo = g.topological_order();
  for (auto u : topo)
    for (auto e : g.out_edges(u)) fwd[g.edge(e).target] = mod_add(fwd[g.edge(e).target], fwd[u]);
  for (auto it = topo.rbegin(); it != topo.rend(); ++it)
    for (auto e : g.out_edges(*it)) bwd[*it] = mod_add(bwd[*it], bwd[g.edge(e).target]);
  std::uint64_t through = 0;
  for (auto u : vertices) through = mod_add(through, mod_mul(fwd[u], bwd[u]));
  if (through != fwd[g.sink()]) {
    std::vector<char> blocked(n, 0);
    for (auto u : vertices) blocked[u] = 1;
    rep.violating_path = path_avoiding(g, blocked);
    rep.reason = "a root-to-sink path avoids the set";
    return rep;
  }

  std::map<int, std::vector<int>> by_stage;
  for (int v = 0; v < n; ++v)
    if (g.vertex(v).stage != k_none) by_stage[g.vertex(v).stage].push_back(v);
  std::set<int> stages;
  for (auto u : vertices)
    if (g.vertex(u).stage != k_none) stages.insert(g.vertex(u).stage);
  for (auto s : stages) {
    const auto& members = by_stage[s];
    bool closed = std::ranges::all_of(members, [&](int v) { return std::ranges::binary_search(vertices, v); });
    if (!closed) {
      rep.kind = CutKind::FineCut;
      rep.color_witness = ColorClass{s, members};
      std::vector<int> missing;
      for (auto v : members)
        if (!std::ranges::binary_search(vertices, v)) missing.push_back(v);
      rep.reason = fmt::format("stage of {} also colors {}", g.vertex(vertices.front()).name, join_names(g, missing));
      for (auto u : vertices)
        if (g.vertex(u).stage == s) {
          rep.reason = fmt::format("stage of {} also colors {}", g.vertex(u).name, join_names(g, missing));
          break;
        }
      rep.color_closure.clear();
      return rep;
    }
    rep.color_closure.push_back({s, members});
  }
  rep.kind = CutKind::Cut;
  rep.reason = "every path meets the set once and the set is color-closed";
  return rep;
}

auto find_fine_cuts(const RolledCeg& g, std::size_t max_results) -> CutSearch {
  // Each vertex is before the set (B), in it (U) or after it.  B is predecessor-closed, U holds the
  // vertices whose predecessors all lie in B, and nothing else may have a predecessor in B.
  CutSearch out;
  auto n = g.num_vertices();
  const auto& topo = g.topological_order();
  enum : char { After, Before, In };
  std::vector<char> side(n, After);
  std::vector<std::vector<int>> found;
  auto walk = [&](auto&& self, std::size_t i) -> void {
    if (out.truncated) return;
    if (i == topo.size()) {
      std::vector<int> set;
      for (int v = 0; v < n; ++v)
        if (side[v] == In) set.push_back(v);
      if (set.empty()) return;
      if (found.size() >= max_results) {
        out.truncated = true;
        return;
      }
      found.push_back(std::move(set));
      return;
    }
    auto v = topo[i];
    int preds = 0, in_b = 0;
    for (auto e : g.in_edges(v)) {
      ++preds;
      if (side[g.edge(e).source] == Before) ++in_b;
    }
    if (v == g.root()) {
      side[v] = In;
      self(self, i + 1);
      side[v] = Before;
      self(self, i + 1);
      side[v] = After;
      return;
    }
    if (in_b == 0) {
      side[v] = After;
      self(self, i + 1);
      return;
    }
    if (in_b < preds || v == g.sink()) return;
    side[v] = In;
    self(self, i + 1);
    side[v] = Before;
    self(self, i + 1);
    side[v] = After;
  };
  walk(walk, 0);
  std::ranges::sort(found);
  for (auto& set : found) out.reports.push_back(check_cut(g, set));
  return out;
}

auto find_cuts(const RolledCeg& g, std::size_t max_results) -> CutSearch {
  auto all = find_fine_cuts(g, max_results);
  std::erase_if(all.reports, [](const CutReport& r) { return r.kind != CutKind::Cut; });
  return all;
}

auto parse_path(const RolledCeg& g, const std::vector<std::string>& names) -> std::vector<int> {
  std::vector<int> path;
  for (const auto& name : names) path.push_back(g.vertex_by_name(name));
  return path;
}

auto is_intrinsic(const RolledCeg& g, const std::vector<std::vector<int>>& event) -> IntrinsicResult {
  auto n = g.num_vertices();
  auto has_edge = [&](int u, int v) {
    return std::ranges::any_of(g.out_edges(u), [&](int e) { return g.edge(e).target == v; });
  };
  std::set<std::vector<int>> atoms;
  std::set<std::pair<int, int>> induced;
  for (const auto& path : event) {
    if (path.empty() || path.front() != g.root() || path.back() != g.sink())
      throw ValidationError{"an event path must run from the root to the sink"};
    for (auto v : path)
      if (v < 0 || v >= n) throw ValidationError{fmt::format("vertex {} out of range", v)};
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      if (!has_edge(path[i], path[i + 1]))
        throw ValidationError{
            fmt::format("no edge from {} to {}", g.vertex(path[i]).name, g.vertex(path[i + 1]).name)};
      induced.insert({path[i], path[i + 1]});
    }
    atoms.insert(path);
  }
  IntrinsicResult res;
  if (atoms.empty()) return res;
  // Depth-first over the induced subgraph, following only prefixes of event paths.  The first
  // step off every prefix completes (every induced vertex reaches the sink) to a path outside it.
  std::vector<std::vector<int>> succ(n);
  for (auto [u, v] : induced) succ[u].push_back(v);
  for (int u = 0; u < n; ++u) {
    std::vector<int> ordered;  // edge order of the graph
    for (auto e : g.out_edges(u)) {
      auto v = g.edge(e).target;
      if (std::ranges::find(succ[u], v) != succ[u].end() && std::ranges::find(ordered, v) == ordered.end())
        ordered.push_back(v);
    }
    succ[u] = std::move(ordered);
  }
  std::vector<int> prefix{g.root()};
  auto is_prefix = [&](const std::vector<int>& p) {
    auto it = atoms.lower_bound(p);
    return it != atoms.end() && it->size() >= p.size() && std::equal(p.begin(), p.end(), it->begin());
  };
  auto walk = [&](auto&& self) -> bool {
    auto u = prefix.back();
    if (u == g.sink()) return false;
    for (auto v : succ[u]) {
      prefix.push_back(v);
      if (!is_prefix(prefix)) {
        while (prefix.back() != g.sink()) prefix.push_back(succ[prefix.back()].front());
        res.intrinsic = false;
        res.counterexample = prefix;
        return true;
      }
      if (self(self)) return true;
      prefix.pop_back();
    }
    return false;
  };
  walk(walk);
  return res;
}

auto ci_statements(const Rdceg& graph, const RolledCeg& g, const CutReport& report, int n)
    -> std::vector<CiStatement> {
  if (report.kind == CutKind::Neither)
    throw ValidationError{fmt::format("{{{}}} is not a cut or fine cut: {}", join_names(g, report.vertices),
                                      report.reason)};
  if (n < 1) throw ValidationError{"horizon must be at least 1 passage-slice"};

  auto from_slice = g.vertex(report.vertices.front()).slice;
  for (auto v : report.vertices) from_slice = std::min(from_slice, g.vertex(v).slice);
  from_slice = std::max(from_slice, 1);
  auto to_slice = from_slice + n - 1;
  auto slices = passage_slices(graph);
  if (slices.periodic_from == 0) to_slice = std::min(to_slice, static_cast<int>(slices.slices.size()));

  std::vector<char> is_set(g.num_vertices(), 0);
  for (auto v : report.vertices) is_set[v] = 1;
  std::vector<char> before(g.num_vertices(), 0);
  const auto& topo = g.topological_order();
  for (auto it = topo.rbegin(); it != topo.rend(); ++it)
    for (auto e : g.out_edges(*it))
      if (is_set[g.edge(e).target] || before[g.edge(e).target]) before[*it] = 1;
  std::vector<std::string> past;
  for (auto v : topo)
    if (before[v]) past.push_back(g.vertex(v).name);

  std::vector<std::string> given;
  for (auto v : report.vertices) given.push_back(g.vertex(v).name);
  auto set_text = "{" + join_names(g, report.vertices) + "}";
  auto vacuous = past.empty();

  std::vector<CiStatement> out;
  if (report.kind == CutKind::Cut) {
    CiStatement s;
    s.kind = CutKind::Cut;
    s.given = given;
    s.past = past;
    std::set<int> next;
    for (auto v : report.vertices)
      for (auto e : g.out_edges(v)) next.insert(g.edge(e).target);
    for (auto v : next) s.future.push_back(g.vertex(v).name);
    s.from_slice = s.to_slice = from_slice;
    s.vacuous = vacuous;
    s.dropout_caveat = "conditional on no dropout before the next transition";
    s.text = vacuous ? fmt::format("Nothing precedes {}: the statement about its next transition is vacuous.", set_text)
                     : fmt::format("Given the stage occupied in {}, the next transition within passage-slice {} is "
                                   "independent of the path taken into it ({}).",
                                   set_text, from_slice, s.dropout_caveat);
    out.push_back(std::move(s));
  }

  CiStatement s;
  s.kind = CutKind::FineCut;
  s.given = given;
  s.past = past;
  s.from_slice = from_slice;
  s.to_slice = to_slice;
  s.includes_holding_times = true;
  s.vacuous = vacuous;
  // Vertices reachable from the set within the horizon, by slice copy.
  std::set<std::pair<int, int>> seen;
  std::deque<std::pair<int, int>> q;
  for (auto v : report.vertices) {
    auto src = g.vertex(v).source;
    if (src == k_none) continue;
    q.emplace_back(src, std::max(g.vertex(v).slice, 1));
  }
  bool sink_reached = false;
  while (!q.empty()) {
    auto [v, k] = q.front();
    q.pop_front();
    for (auto e : graph.out_edges(v)) {
      const auto& edge = graph.edge(e);
      if (edge.target == graph.sink()) {
        sink_reached = true;
        continue;
      }
      auto k2 = edge.slice_boundary ? k + 1 : k;
      if (k2 > to_slice) continue;
      if (seen.insert({edge.target, k2}).second) q.emplace_back(edge.target, k2);
    }
  }
  for (auto [v, k] : seen) s.future.push_back(primed(graph.vertex(v).name, k));
  if (sink_reached) s.future.push_back("w_inf");
  auto span = from_slice == to_slice ? fmt::format("passage-slice {}", from_slice)
                                     : fmt::format("passage-slices {} to {}", from_slice, to_slice);
  s.dropout_caveat = fmt::format("conditional on no dropout over {}", span);
  s.text = vacuous ? fmt::format("Nothing precedes {}: the statement about its evolution over {} is vacuous.", set_text,
                                 span)
                   : fmt::format("Given the position occupied in {}, the evolution over {} after leaving it, "
                                 "including the time spent in each state, is independent of the path taken into it "
                                 "({}).",
                                 set_text, span, s.dropout_caveat);
  out.push_back(std::move(s));
  return out;
}

}  // namespace rdceg

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rdceg/rdceg.hpp"

namespace rdceg {

struct RolledVertex {
  std::string name;         // "w3" in the first slice, "w3'" in the second, ...; "w_inf"; "start"
  int source = k_none;      // RDCEG vertex, k_none for the sink and a virtual start
  int slice = 0;            // 1-based passage-slice, 0 for the sink
  int stage = k_none;
  bool is_sink = false;
};

struct RolledEdge {
  int source = k_none;
  int target = k_none;
  std::string label;
  int rdceg_edge = k_none;
  int cluster = k_none;
  bool timed = false;
};

// A finite DAG read off an RDCEG: the rolled-out CEG over `depth` passage-slices, or a single
// passage-slice.  Vertex 0 is the root; exactly one sink.
class RolledCeg {
 public:
  RolledCeg() = default;
  RolledCeg(std::vector<RolledVertex> vertices, std::vector<RolledEdge> edges, int first_slice, int depth);

  auto num_vertices() const -> int { return static_cast<int>(vertices_.size()); }
  auto num_edges() const -> int { return static_cast<int>(edges_.size()); }
  auto root() const -> int { return 0; }
  auto sink() const -> int { return sink_; }
  auto vertex(int v) const -> const RolledVertex& { return vertices_.at(v); }
  auto edge(int e) const -> const RolledEdge& { return edges_.at(e); }
  auto vertices() const -> std::span<const RolledVertex> { return vertices_; }
  auto edges() const -> std::span<const RolledEdge> { return edges_; }
  auto out_edges(int v) const -> std::span<const int> { return out_.at(v); }
  auto in_edges(int v) const -> std::span<const int> { return in_.at(v); }
  auto first_slice() const -> int { return first_slice_; }
  auto depth() const -> int { return depth_; }
  auto find_vertex(std::string_view name) const -> std::optional<int>;
  auto vertex_by_name(std::string_view name) const -> int;  // throws ValidationError
  auto topological_order() const -> const std::vector<int>& { return topo_; }

  // Number of root-to-sink paths, as a double (may be inexact when huge).
  auto path_count() const -> double;
  // Root-to-sink paths as vertex sequences (parallel edges give one sequence), at most `limit`.
  auto paths(std::size_t limit = 100000) const -> std::vector<std::vector<int>>;

 private:
  std::vector<RolledVertex> vertices_;
  std::vector<RolledEdge> edges_;
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;
  std::vector<int> topo_;
  int sink_ = k_none;
  int first_slice_ = 1;
  int depth_ = 1;
};

// C_n: slice-boundary edges lead into the next slice's copies, and out of slice n into the sink.
// A graph without cyclic edges is returned whole whatever n is.
auto roll_out(const Rdceg& graph, int n) -> RolledCeg;
// Passage-slice k on its own; boundary exits go to the sink.  Several slice roots hang off a
// virtual root "start".
auto slice_graph(const Rdceg& graph, int k) -> RolledCeg;

enum class CutKind { Cut, FineCut, Neither };
auto cut_kind_name(CutKind kind) -> std::string;

struct ColorClass {
  int stage = k_none;
  std::vector<int> vertices;  // every vertex of the graph with this stage
};

struct CutReport {
  std::vector<int> vertices;  // sorted
  CutKind kind = CutKind::Neither;
  int first_slice = 1;
  std::vector<ColorClass> color_closure;  // Cut: the closed color classes
  std::optional<ColorClass> color_witness;  // FineCut: a class only partly inside the set
  std::vector<int> violating_path;          // Neither: a path meeting the set zero or several times
  std::string reason;
};

// Classifies a proposed vertex set.
auto check_cut(const RolledCeg& g, std::vector<int> vertices) -> CutReport;

struct CutSearch {
  std::vector<CutReport> reports;
  bool truncated = false;  // stopped at max_results
};

// Every vertex set (sink excluded) met exactly once by every root-to-sink path.  Such a set splits
// the graph into a predecessor-closed part before it and the rest after it, so the sweep walks the
// vertices in topological order and enumerates those splits instead of paths.
auto find_fine_cuts(const RolledCeg& g, std::size_t max_results = 10000) -> CutSearch;
// The color-closed ones among them.
auto find_cuts(const RolledCeg& g, std::size_t max_results = 10000) -> CutSearch;

struct IntrinsicResult {
  bool intrinsic = true;
  std::vector<int> counterexample;  // a path of the induced subgraph outside the event
};

// Paths are vertex sequences from the root to the sink.  Throws ValidationError on an invalid path.
auto is_intrinsic(const RolledCeg& g, const std::vector<std::vector<int>>& event) -> IntrinsicResult;
auto parse_path(const RolledCeg& g, const std::vector<std::string>& names) -> std::vector<int>;

struct CiStatement {
  CutKind kind = CutKind::FineCut;  // Cut: next transition given the stage; FineCut: future given the position
  std::vector<std::string> given;   // the set, by name
  std::vector<std::string> past;    // vertices that can precede the set
  std::vector<std::string> future;  // vertices reachable within the horizon
  int from_slice = 1;
  int to_slice = 1;                 // horizon, inclusive
  bool includes_holding_times = false;
  bool vacuous = false;             // nothing precedes the set
  std::string dropout_caveat;
  std::string text;
};

// Statements licensed by a cut or fine cut of a passage-slice (or rolled-out) graph over the next
// n passage-slices.  A cut yields both statements.  Throws ValidationError if the report is neither.
auto ci_statements(const Rdceg& graph, const RolledCeg& g, const CutReport& report, int n) -> std::vector<CiStatement>;

}  // namespace rdceg

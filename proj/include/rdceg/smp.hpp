#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rdceg/holding_law.hpp"
#include "rdceg/rdceg.hpp"

namespace rdceg {

// What to do with zero-duration transitions (paths made only of untimed edges).
//   Renormalize  drop them from any state that also has timed transitions and rescale the rest;
//                states with nothing but untimed transitions keep them as point masses.
//   Degenerate   keep every untimed transition with `standard_law`.
enum class UntimedPolicy { Renormalize, Degenerate };

struct SmpOptions {
  UntimedPolicy untimed = UntimedPolicy::Renormalize;
  std::optional<HoldingLaw> standard_law;  // Degenerate only; default a point mass at 0
};

struct SmpState {
  std::string name;
  int vertex = k_none;  // RDCEG vertex
  bool absorbing = false;
};

struct SmpRoute {
  std::vector<int> edges;  // RDCEG edge ids along the route
  std::vector<std::string> labels;
  double probability = 0.0;  // product along the route, before any renormalization
};

struct SmpTransition {
  int from = k_none;
  int to = k_none;
  double probability = 0.0;
  HoldingLaw law = HoldingLaw::point_mass();
  bool timed = false;
  bool cyclic = false;          // some edge on a route is cyclic
  bool slice_boundary = false;  // some edge on a route crosses a passage-slice boundary
  std::vector<SmpRoute> routes;  // parallel routes merged into this transition (mixture if several)
};

class Smp {
 public:
  Smp() = default;
  Smp(std::vector<SmpState> states, std::vector<SmpTransition> transitions, int entry, std::vector<std::string> notes);

  auto num_states() const -> int { return static_cast<int>(states_.size()); }
  auto state(int i) const -> const SmpState& { return states_.at(i); }
  auto states() const -> std::span<const SmpState> { return states_; }
  auto transitions() const -> std::span<const SmpTransition> { return transitions_; }
  auto out(int i) const -> std::span<const int> { return out_.at(i); }
  auto entry() const -> int { return entry_; }
  auto notes() const -> const std::vector<std::string>& { return notes_; }
  auto find_state(std::string_view name) const -> std::optional<int>;
  auto state_by_name(std::string_view name) const -> int;  // throws ValidationError
  auto transition(int i, int j) const -> const SmpTransition*;  // nullptr if none

  // Embedded chain P, dense, states x states.
  auto transition_matrix() const -> std::vector<std::vector<double>>;
  // Initial distribution: unit mass at the entry state.
  auto initial_distribution() const -> std::vector<double>;

 private:
  std::vector<SmpState> states_;
  std::vector<SmpTransition> transitions_;
  std::vector<std::vector<int>> out_;
  int entry_ = 0;
  std::vector<std::string> notes_;
};

// States are the vertices where timed edges start or end, plus the root as entry state.
// Other vertices are passed through: routes across them multiply probabilities and convolve laws.
// Parallel routes between two states become one transition whose law is the mixture of the
// route laws weighted by route probability.  Throws ValidationError if an edge lacks a probability
// or a timed edge lacks a law.
auto to_smp(const Rdceg& graph, const SmpOptions& options = {}, GridSpec grid = {}) -> Smp;

// Restricts the process to `keep`: every route between kept states whose interior avoids them
// becomes one transition (probability product, law convolution), parallel routes are mixed, and
// rows are renormalized.  Routes through non-kept states may not cross a cyclic or slice-boundary
// transition; such a route throws ValidationError naming it.  The entry state must be kept.
auto condense_smp(const Smp& smp, std::span<const int> keep, GridSpec grid = {}) -> Smp;

// Q_ij(t) = p_ij F_ij(t); 0 when there is no transition.
auto renewal_kernel(const Smp& smp, int i, int j, double t) -> double;

struct FirstPassageOptions {
  double horizon = std::numeric_limits<double>::infinity();
  std::int64_t samples = 100000;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::int64_t max_steps = 100000;  // per trajectory; trajectories still running count as misses
  std::vector<double> quantiles = {0.05, 0.25, 0.5, 0.75, 0.95};
  int curve_points = 50;
};

struct FirstPassageResult {
  int from = k_none;
  int to = k_none;
  std::int64_t samples = 0;
  std::int64_t hits = 0;
  double hit_probability = 0.0;
  double hit_se = 0.0;
  std::optional<double> mean_time;  // among hits
  std::optional<double> mean_se;
  std::vector<std::pair<double, double>> quantiles;  // (p, time) among hits
  std::vector<std::pair<double, double>> curve;      // (t, P(hit by t))
  std::int64_t truncated = 0;                        // trajectories stopped by max_steps
  std::vector<std::string> diagnostics;
};

// Monte Carlo first passage.  Samples are drawn in blocks of 1024 with one seed-derived stream
// per block, so results do not depend on `jobs`.  from == to gives passage time 0.
auto first_passage(const Smp& smp, int from, int to, const FirstPassageOptions& options = {}) -> FirstPassageResult;

auto first_passage_csv(const Smp& smp, const FirstPassageResult& result) -> std::string;

// One row per transition: from, to, probability, law kind, mean holding time ("inf" if infinite).
auto smp_csv(const Smp& smp) -> std::string;
// State diagram; edges carry p_ij and the holding law, untimed transitions dashed.
auto smp_to_dot(const Smp& smp) -> std::string;

}  // namespace rdceg

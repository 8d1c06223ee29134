#include "rdceg/smp.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <thread>

#include "rdceg/error.hpp"

namespace rdceg {

namespace {

constexpr std::int64_t k_block = 1024;

auto join(const std::vector<std::string>& parts, std::string_view sep) -> std::string {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

auto all_point_mass(const std::vector<HoldingLaw>& laws) -> bool {
  return std::ranges::all_of(laws, [](const HoldingLaw& l) { return l.kind() == HoldingLaw::Kind::PointMass; });
}

// One law for several parallel routes, weighted by route probability.
auto merge_laws(const std::vector<double>& probs, std::vector<HoldingLaw> laws) -> HoldingLaw {
  if (laws.size() == 1 || all_point_mass(laws)) return laws.front();
  auto total = std::accumulate(probs.begin(), probs.end(), 0.0);
  std::vector<double> w;
  w.reserve(probs.size());
  for (auto p : probs) w.push_back(total > 0 ? p / total : 1.0 / static_cast<double>(probs.size()));
  return HoldingLaw::mixture(std::move(w), std::move(laws));
}

struct RawRoute {
  int to = k_none;
  SmpRoute route;
  std::vector<HoldingLaw> laws;
  bool timed = false;
  bool cyclic = false;
  bool boundary = false;
};

// Groups routes by target into transitions.  Routes keep the order they were found in.
auto group_routes(int from, std::vector<RawRoute>& routes, const std::vector<HoldingLaw>& route_law)
    -> std::vector<SmpTransition> {
  std::map<int, std::vector<int>> by_target;
  for (int r = 0; r < static_cast<int>(routes.size()); ++r) by_target[routes[r].to].push_back(r);
  std::vector<SmpTransition> out;
  for (auto& [to, idx] : by_target) {
    SmpTransition tr;
    tr.from = from;
    tr.to = to;
    std::vector<double> probs;
    std::vector<HoldingLaw> laws;
    for (auto r : idx) {
      tr.probability += routes[r].route.probability;
      tr.timed = tr.timed || routes[r].timed;
      tr.cyclic = tr.cyclic || routes[r].cyclic;
      tr.slice_boundary = tr.slice_boundary || routes[r].boundary;
      probs.push_back(routes[r].route.probability);
      laws.push_back(route_law[r]);
      tr.routes.push_back(routes[r].route);
    }
    std::ranges::stable_sort(tr.routes, {}, [](const SmpRoute& r) { return r.labels.size(); });
    tr.law = merge_laws(probs, std::move(laws));
    out.push_back(std::move(tr));
  }
  return out;
}

// Scales a row to sum to one.  Returns true if it changed.
auto renormalize(std::vector<SmpTransition>& row) -> bool {
  double total = 0.0;
  for (const auto& t : row) total += t.probability;
  if (row.empty() || total <= 0.0 || std::abs(total - 1.0) <= 1e-12) return false;
  for (auto& t : row) t.probability /= total;
  return true;
}

auto quantile_sorted(const std::vector<double>& xs, double p) -> double {
  if (xs.size() == 1) return xs.front();
  auto h = p * static_cast<double>(xs.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(h));
  auto hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

}  // namespace

Smp::Smp(std::vector<SmpState> states, std::vector<SmpTransition> transitions, int entry,
         std::vector<std::string> notes)
    : states_{std::move(states)}, transitions_{std::move(transitions)}, entry_{entry}, notes_{std::move(notes)} {
  out_.assign(states_.size(), {});
  std::set<std::pair<int, int>> seen;
  for (int t = 0; t < static_cast<int>(transitions_.size()); ++t) {
    const auto& tr = transitions_[t];
    if (tr.from < 0 || tr.from >= num_states() || tr.to < 0 || tr.to >= num_states())
      throw ValidationError{"transition refers to an unknown state"};
    if (!seen.insert({tr.from, tr.to}).second)
      throw ValidationError{fmt::format("more than one transition from {} to {}", states_[tr.from].name,
                                        states_[tr.to].name)};
    out_[tr.from].push_back(t);
  }
  for (int i = 0; i < num_states(); ++i) states_[i].absorbing = out_[i].empty();
  if (entry_ < 0 || entry_ >= num_states()) throw ValidationError{"entry state out of range"};
}

auto Smp::find_state(std::string_view name) const -> std::optional<int> {
  for (int i = 0; i < num_states(); ++i)
    if (states_[i].name == name) return i;
  return std::nullopt;
}

auto Smp::state_by_name(std::string_view name) const -> int {
  if (auto i = find_state(name)) return *i;
  throw ValidationError{fmt::format("unknown state '{}'", name)};
}

auto Smp::transition(int i, int j) const -> const SmpTransition* {
  for (auto t : out_.at(i))
    if (transitions_[t].to == j) return &transitions_[t];
  return nullptr;
}

auto Smp::transition_matrix() const -> std::vector<std::vector<double>> {
  std::vector<std::vector<double>> p(states_.size(), std::vector<double>(states_.size(), 0.0));
  for (const auto& t : transitions_) p[t.from][t.to] = t.probability;
  return p;
}

auto Smp::initial_distribution() const -> std::vector<double> {
  std::vector<double> p(states_.size(), 0.0);
  p[entry_] = 1.0;
  return p;
}

auto to_smp(const Rdceg& graph, const SmpOptions& options, GridSpec grid) -> Smp {
  const auto nv = graph.num_vertices();
  for (int e = 0; e < graph.num_edges(); ++e) {
    const auto& edge = graph.edge(e);
    auto key = fmt::format("{}/{}", graph.vertex(edge.source).name, edge.label);
    if (!edge.probability) throw ValidationError{fmt::format("edge {} has no transition probability", key)};
    if (edge.timed && !edge.law) throw ValidationError{fmt::format("timed edge {} has no holding law", key)};
  }

  std::vector<int> state_of(nv, k_none);
  std::vector<bool> is_state(nv, false);
  is_state[graph.root()] = true;
  if (graph.sink() != k_none) is_state[graph.sink()] = true;
  for (const auto& edge : graph.edges()) {
    if (!edge.timed) continue;
    is_state[edge.source] = true;
    is_state[edge.target] = true;
  }
  std::vector<SmpState> states;
  for (int v = 0; v < nv; ++v) {
    if (!is_state[v]) continue;
    state_of[v] = static_cast<int>(states.size());
    states.push_back({graph.vertex(v).name, v, false});
  }

  auto standard = options.standard_law.value_or(HoldingLaw::point_mass());
  std::vector<std::string> notes;
  std::vector<SmpTransition> transitions;

  for (int s = 0; s < static_cast<int>(states.size()); ++s) {
    std::vector<RawRoute> routes;
    RawRoute cur;
    std::vector<bool> on_path(nv, false);
    // Depth-first over pass-through vertices.
    auto walk = [&](auto&& self, int v) -> void {
      for (auto e : graph.out_edges(v)) {
        const auto& edge = graph.edge(e);
        auto saved = cur;
        cur.route.edges.push_back(e);
        cur.route.labels.push_back(edge.label);
        cur.route.probability *= *edge.probability;
        cur.laws.push_back(edge.timed ? *edge.law : HoldingLaw::point_mass());
        cur.timed = cur.timed || edge.timed;
        cur.cyclic = cur.cyclic || edge.cyclic;
        cur.boundary = cur.boundary || edge.slice_boundary;
        if (is_state[edge.target]) {
          cur.to = state_of[edge.target];
          routes.push_back(cur);
        } else {
          if (on_path[edge.target])
            throw StructuralError{fmt::format("untimed cycle through {}", graph.vertex(edge.target).name)};
          on_path[edge.target] = true;
          self(self, edge.target);
          on_path[edge.target] = false;
        }
        cur = std::move(saved);
      }
    };
    cur.route.probability = 1.0;
    walk(walk, states[s].vertex);

    bool any_timed = std::ranges::any_of(routes, [](const RawRoute& r) { return r.timed; });
    if (options.untimed == UntimedPolicy::Renormalize && any_timed) {
      auto before = routes.size();
      std::erase_if(routes, [](const RawRoute& r) { return !r.timed; });
      if (routes.size() != before)
        notes.push_back(fmt::format("{}: {} untimed route(s) dropped", states[s].name, before - routes.size()));
    }
    std::vector<HoldingLaw> route_law;
    for (const auto& r : routes) {
      if (r.timed) {
        route_law.push_back(HoldingLaw::convolution(r.laws, grid));
      } else {
        route_law.push_back(options.untimed == UntimedPolicy::Degenerate ? standard : HoldingLaw::point_mass());
      }
    }
    auto row = group_routes(s, routes, route_law);
    for (const auto& t : row)
      if (t.routes.size() > 1)
        notes.push_back(fmt::format("{} -> {}: {} parallel routes combined as a mixture", states[s].name,
                                    states[t.to].name, t.routes.size()));
    if (renormalize(row)) notes.push_back(fmt::format("{}: row renormalized", states[s].name));
    for (auto& t : row) transitions.push_back(std::move(t));
  }
  return Smp{std::move(states), std::move(transitions), state_of[graph.root()], std::move(notes)};
}

auto condense_smp(const Smp& smp, std::span<const int> keep, GridSpec grid) -> Smp {
  const auto n = smp.num_states();
  std::vector<int> new_id(n, k_none);
  std::vector<SmpState> states;
  std::vector<int> kept(keep.begin(), keep.end());
  std::ranges::sort(kept);
  kept.erase(std::ranges::unique(kept).begin(), kept.end());
  for (auto s : kept) {
    if (s < 0 || s >= n) throw ValidationError{fmt::format("state {} out of range", s)};
    new_id[s] = static_cast<int>(states.size());
    states.push_back({smp.state(s).name, smp.state(s).vertex, false});
  }
  if (new_id[smp.entry()] == k_none)
    throw ValidationError{fmt::format("the entry state {} must be kept", smp.state(smp.entry()).name)};

  std::vector<std::string> notes;
  std::vector<SmpTransition> transitions;
  for (auto s : kept) {
    std::vector<RawRoute> routes;
    std::vector<std::vector<int>> via;  // transitions per route
    RawRoute cur;
    std::vector<int> cur_via;
    std::vector<bool> on_path(n, false);
    auto describe = [&](const std::vector<int>& path) {
      std::vector<std::string> names{smp.state(s).name};
      for (auto t : path) names.push_back(smp.state(smp.transitions()[t].to).name);
      return join(names, " -> ");
    };
    auto walk = [&](auto&& self, int u) -> void {
      for (auto t : smp.out(u)) {
        const auto& tr = smp.transitions()[t];
        auto saved = cur;
        cur_via.push_back(t);
        const auto& shortest = tr.routes.front();
        cur.route.labels.insert(cur.route.labels.end(), shortest.labels.begin(), shortest.labels.end());
        cur.route.edges.insert(cur.route.edges.end(), shortest.edges.begin(), shortest.edges.end());
        cur.route.probability *= tr.probability;
        cur.laws.push_back(tr.law);
        cur.timed = cur.timed || tr.timed;
        cur.cyclic = cur.cyclic || tr.cyclic;
        cur.boundary = cur.boundary || tr.slice_boundary;
        if (new_id[tr.to] != k_none) {
          if (cur_via.size() > 1 && (cur.cyclic || cur.boundary))
            throw ValidationError{fmt::format("cannot condense {}: the route leaves the first passage-slice",
                                              describe(cur_via))};
          cur.to = new_id[tr.to];
          routes.push_back(cur);
          via.push_back(cur_via);
        } else {
          if (cur.cyclic || cur.boundary)
            throw ValidationError{fmt::format("cannot condense {}: the route leaves the first passage-slice",
                                              describe(cur_via))};
          if (on_path[tr.to]) throw ValidationError{fmt::format("cycle while condensing {}", describe(cur_via))};
          if (smp.out(tr.to).empty())
            notes.push_back(fmt::format("{}: route {} ends in a dropped absorbing state", smp.state(s).name,
                                        describe(cur_via)));
          on_path[tr.to] = true;
          self(self, tr.to);
          on_path[tr.to] = false;
        }
        cur = std::move(saved);
        cur_via.pop_back();
      }
    };
    cur.route.probability = 1.0;
    walk(walk, s);

    std::vector<HoldingLaw> route_law;
    for (const auto& r : routes) route_law.push_back(HoldingLaw::convolution(r.laws, grid));
    auto row = group_routes(new_id[s], routes, route_law);
    for (const auto& t : row)
      if (t.routes.size() > 1)
        notes.push_back(fmt::format("{} -> {}: {} parallel condensed routes combined as a mixture",
                                    states[new_id[s]].name, states[t.to].name, t.routes.size()));
    if (renormalize(row)) notes.push_back(fmt::format("{}: row renormalized", states[new_id[s]].name));
    for (auto& t : row) transitions.push_back(std::move(t));
  }
  return Smp{std::move(states), std::move(transitions), new_id[smp.entry()], std::move(notes)};
}

auto renewal_kernel(const Smp& smp, int i, int j, double t) -> double {
  if (i < 0 || i >= smp.num_states() || j < 0 || j >= smp.num_states())
    throw ValidationError{"renewal kernel: unknown state"};
  if (!(t >= 0.0)) throw DomainError{"renewal kernel: t must be nonnegative"};
  const auto* tr = smp.transition(i, j);
  return tr ? tr->probability * tr->law.cdf(t) : 0.0;
}

auto first_passage(const Smp& smp, int from, int to, const FirstPassageOptions& options) -> FirstPassageResult {
  if (from < 0 || from >= smp.num_states() || to < 0 || to >= smp.num_states())
    throw ValidationError{"first passage: unknown state"};
  if (options.samples < 1) throw ValidationError{"first passage: samples must be at least 1"};
  if (!(options.horizon >= 0.0)) throw ValidationError{"first passage: horizon must be nonnegative"};

  FirstPassageResult res;
  res.from = from;
  res.to = to;
  res.samples = options.samples;

  std::vector<double> hit_times;
  if (from == to) {
    res.diagnostics.push_back("from == to: passage time is 0 by convention");
    hit_times.assign(static_cast<std::size_t>(options.samples), 0.0);
  } else {
    std::vector<bool> reach(smp.num_states(), false);
    std::queue<int> q;
    q.push(from);
    reach[from] = true;
    while (!q.empty()) {
      auto u = q.front();
      q.pop();
      for (auto t : smp.out(u)) {
        auto v = smp.transitions()[t].to;
        if (smp.transitions()[t].probability > 0 && !reach[v]) {
          reach[v] = true;
          q.push(v);
        }
      }
    }
    if (!reach[to]) {
      res.diagnostics.push_back(fmt::format("{} is not reachable from {}", smp.state(to).name, smp.state(from).name));
    } else {
      auto blocks = (options.samples + k_block - 1) / k_block;
      std::vector<std::vector<double>> block_hits(static_cast<std::size_t>(blocks));
      std::vector<std::int64_t> block_trunc(static_cast<std::size_t>(blocks), 0);
      auto run_block = [&](std::int64_t b) {
        auto rng = make_stream(options.seed, static_cast<std::uint64_t>(b));
        std::uniform_real_distribution<double> unif{0.0, 1.0};
        auto count = std::min(k_block, options.samples - b * k_block);
        for (std::int64_t k = 0; k < count; ++k) {
          int state = from;
          double t = 0.0;
          std::int64_t steps = 0;
          while (true) {
            if (state == to) {
              if (t <= options.horizon) block_hits[b].push_back(t);
              break;
            }
            auto out = smp.out(state);
            if (out.empty() || t > options.horizon) break;
            if (steps++ >= options.max_steps) {
              ++block_trunc[b];
              break;
            }
            auto u = unif(rng);
            const SmpTransition* pick = &smp.transitions()[out.back()];
            double acc = 0.0;
            for (auto ti : out) {
              acc += smp.transitions()[ti].probability;
              if (u < acc) {
                pick = &smp.transitions()[ti];
                break;
              }
            }
            t += pick->law.sample(rng);
            state = pick->to;
          }
        }
      };
      auto jobs = std::max(1, options.jobs);
      if (jobs == 1) {
        for (std::int64_t b = 0; b < blocks; ++b) run_block(b);
      } else {
        std::vector<std::jthread> workers;
        for (int w = 0; w < jobs; ++w)
          workers.emplace_back([&, w] {
            for (std::int64_t b = w; b < blocks; b += jobs) run_block(b);
          });
      }
      for (std::int64_t b = 0; b < blocks; ++b) {
        hit_times.insert(hit_times.end(), block_hits[b].begin(), block_hits[b].end());
        res.truncated += block_trunc[b];
      }
      if (res.truncated > 0)
        res.diagnostics.push_back(fmt::format("{} trajectories stopped after {} steps", res.truncated, options.max_steps));
    }
  }

  auto ns = static_cast<double>(res.samples);
  res.hits = static_cast<std::int64_t>(hit_times.size());
  res.hit_probability = static_cast<double>(res.hits) / ns;
  res.hit_se = std::sqrt(res.hit_probability * (1.0 - res.hit_probability) / ns);
  if (res.hits > 0) {
    auto nh = static_cast<double>(res.hits);
    auto mean = std::accumulate(hit_times.begin(), hit_times.end(), 0.0) / nh;
    double ss = 0.0;
    for (auto x : hit_times) ss += (x - mean) * (x - mean);
    res.mean_time = mean;
    res.mean_se = res.hits > 1 ? std::sqrt(ss / (nh - 1.0) / nh) : 0.0;
    auto sorted = hit_times;
    std::ranges::sort(sorted);
    for (auto p : options.quantiles) res.quantiles.emplace_back(p, quantile_sorted(sorted, p));
    auto tmax = std::isfinite(options.horizon) ? options.horizon : sorted.back();
    auto points = std::max(2, options.curve_points);
    for (int k = 0; k < points; ++k) {
      auto t = tmax * k / (points - 1);
      auto c = std::ranges::upper_bound(sorted, t) - sorted.begin();
      res.curve.emplace_back(t, static_cast<double>(c) / ns);
    }
  }
  return res;
}

auto first_passage_csv(const Smp& smp, const FirstPassageResult& r) -> std::string {
  std::ostringstream os;
  os.precision(17);
  os << "kind,key,value\n";
  os << "summary,from," << smp.state(r.from).name << "\n";
  os << "summary,to," << smp.state(r.to).name << "\n";
  os << "summary,samples," << r.samples << "\n";
  os << "summary,hits," << r.hits << "\n";
  os << "summary,hit_probability," << r.hit_probability << "\n";
  os << "summary,hit_se," << r.hit_se << "\n";
  if (r.mean_time) {
    os << "summary,mean_time," << *r.mean_time << "\n";
    os << "summary,mean_se," << *r.mean_se << "\n";
  }
  os << "summary,truncated," << r.truncated << "\n";
  for (auto [p, x] : r.quantiles) os << "quantile," << p << "," << x << "\n";
  for (auto [t, p] : r.curve) os << "curve," << t << "," << p << "\n";
  return os.str();
}

auto smp_csv(const Smp& smp) -> std::string {
  std::ostringstream os;
  os.precision(17);
  os << "from,to,probability,timed,law,mean_hold\n";
  for (const auto& t : smp.transitions()) {
    auto mean = t.law.mean();
    os << smp.state(t.from).name << "," << smp.state(t.to).name << "," << t.probability << "," << (t.timed ? 1 : 0)
       << "," << t.law.kind_name() << ",";
    if (mean.is_finite()) {
      os << mean.value();
    } else {
      os << "inf";
    }
    os << "\n";
  }
  return os.str();
}

auto smp_to_dot(const Smp& smp) -> std::string {
  std::ostringstream os;
  os << "digraph smp {\n  rankdir=LR;\n  node [shape=circle];\n";
  for (int i = 0; i < smp.num_states(); ++i) {
    const auto& s = smp.state(i);
    os << "  s" << i << " [label=\"" << s.name << "\"";
    if (s.absorbing) os << ", shape=doublecircle";
    if (i == smp.entry()) os << ", style=bold";
    os << "];\n";
  }
  for (const auto& t : smp.transitions()) {
    auto mean = t.law.mean();
    auto hold = mean.is_finite() ? fmt::format("{:.4g}", mean.value()) : std::string{"inf"};
    os << "  s" << t.from << " -> s" << t.to << " [label=\""
       << fmt::format("p={:.4g}", t.probability);
    if (t.timed) os << "\\n" << t.law.kind_name() << " mean " << hold;
    os << "\"";
    if (!t.timed) os << ", style=dashed";
    os << "];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace rdceg

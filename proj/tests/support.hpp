#pragma once

// Independent reference computations and random fixtures shared by the test suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rdceg/conjugate.hpp"
#include "rdceg/dataset.hpp"
#include "rdceg/event_tree.hpp"
#include "rdceg/hued_tree.hpp"
#include "rdceg/score.hpp"
#include "rdceg/search.hpp"

namespace oracle {

// log of the probability of a category sequence under a Dirichlet-multinomial, one predictive
// factor at a time: P(x_k = m | x_1..x_{k-1}) = (alpha_m + n_m) / (sum alpha + k - 1).
inline auto dirichlet_chain_rule(const std::vector<double>& alpha, const std::vector<int>& sequence) -> double {
  std::vector<double> seen(alpha.size(), 0.0);
  double total = 0.0;
  for (auto a : alpha) total += a;
  double log_p = 0.0;
  double k = 0.0;
  for (auto m : sequence) {
    log_p += std::log((alpha[m] + seen[m]) / (total + k));
    seen[m] += 1.0;
    k += 1.0;
  }
  return log_p;
}

// log of the integral over theta of InverseGamma(theta; zeta, beta) * prod_i exp(-x_i / theta) / theta,
// computed numerically in u = ln theta around the integrand's peak.
inline auto ig_marginal_quadrature(double zeta, double beta, const std::vector<double>& xs) -> double {
  double n = static_cast<double>(xs.size());
  double s = 0.0;
  for (auto x : xs) s += x;
  auto log_integrand = [&](double u) {
    return zeta * std::log(beta) - std::lgamma(zeta) - (zeta + n) * u - (beta + s) * std::exp(-u);
  };
  auto peak = std::log((beta + s) / (zeta + n));
  auto top = log_integrand(peak);
  auto g = [&](double u) { return std::exp(log_integrand(u) - top); };
  double tol = 1e-14;
  boost::math::quadrature::exp_sinh<double> right;
  auto upper = right.integrate([&](double d) { return g(peak + d); }, 0.0, std::numeric_limits<double>::infinity(), tol);
  auto lower = right.integrate([&](double d) { return g(peak - d); }, 0.0, std::numeric_limits<double>::infinity(), tol);
  return top + std::log(upper + lower);
}

inline auto weibull_pdf(double t, double theta, double kappa) -> double {
  if (t <= 0.0) return 0.0;
  return kappa / theta * std::pow(t, kappa - 1.0) * std::exp(-std::pow(t, kappa) / theta);
}

// Hellinger distance by quadrature of (sqrt f - sqrt g)^2 / 2 over (0, inf), split at the scales.
inline auto hellinger_quadrature(double theta1, double theta2, double kappa) -> double {
  auto f = [&](double t) {
    auto d = std::sqrt(weibull_pdf(t, theta1, kappa)) - std::sqrt(weibull_pdf(t, theta2, kappa));
    return 0.5 * d * d;
  };
  // Integrate in s = t^kappa so that every shape gives a smooth integrand.
  auto h = [&](double s) {
    if (s <= 0.0) return 0.0;
    auto t = std::pow(s, 1.0 / kappa);
    auto dt = std::pow(s, 1.0 / kappa - 1.0) / kappa;
    return f(t) * dt;
  };
  auto a = std::min(theta1, theta2);
  auto b = std::max(theta1, theta2);
  double err = 0.0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  auto i1 = GK::integrate(h, 0.0, a, 12, 1e-14, &err);
  auto i2 = GK::integrate(h, a, b, 12, 1e-14, &err);
  boost::math::quadrature::exp_sinh<double> tail;
  auto i3 = tail.integrate([&](double d) { return h(b + d); }, 0.0, std::numeric_limits<double>::infinity(), 1e-14);
  return std::sqrt(std::max(0.0, i1 + i2 + i3));
}

// Compound Weibull/InverseGamma density by integrating the scale out numerically.
inline auto compound_density_quadrature(double zeta, double beta, double kappa, double t) -> double {
  auto ig_log = [&](double theta) {
    return zeta * std::log(beta) - std::lgamma(zeta) - (zeta + 1.0) * std::log(theta) - beta / theta;
  };
  auto integrand = [&](double u) {
    auto theta = std::exp(u);
    if (!std::isfinite(theta) || theta == 0.0) return 0.0;
    auto w = weibull_pdf(t, theta, kappa);
    if (!(w > 0.0)) return 0.0;
    return std::exp(std::log(w) + ig_log(theta) + u);
  };
  boost::math::quadrature::exp_sinh<double> q;
  auto peak = std::log((beta + std::pow(t, kappa)) / (zeta + 1.0));
  auto upper = q.integrate([&](double d) { return integrand(peak + d); }, 0.0, std::numeric_limits<double>::infinity(), 1e-13);
  auto lower = q.integrate([&](double d) { return integrand(peak - d); }, 0.0, std::numeric_limits<double>::infinity(), 1e-13);
  return upper + lower;
}

// Closed-form compound mean: Gamma(zeta - 1/k) Gamma(1 + 1/k) beta^(1/k) / Gamma(zeta), zeta > 1/k.
inline auto compound_mean_formula(double zeta, double beta, double kappa) -> double {
  return std::exp(std::lgamma(zeta - 1.0 / kappa) + std::lgamma(1.0 + 1.0 / kappa) + std::log(beta) / kappa -
                  std::lgamma(zeta));
}

// Every set partition of `items` (restricted growth strings).
inline void for_each_partition(const std::vector<int>& items,
                               const std::function<void(const std::vector<std::vector<int>>&)>& visit) {
  std::vector<std::vector<int>> blocks;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == items.size()) {
      visit(blocks);
      return;
    }
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      blocks[b].push_back(items[i]);
      rec(i + 1);
      blocks[b].pop_back();
    }
    blocks.push_back({items[i]});
    rec(i + 1);
    blocks.pop_back();
  };
  rec(0);
}

// A finite DAG with a single root 0 and single sink n-1, as adjacency lists.
struct Dag {
  int n = 0;
  std::vector<std::vector<int>> out;
};

// Root-to-sink paths by depth-first enumeration.
inline auto all_paths(const Dag& g) -> std::vector<std::vector<int>> {
  std::vector<std::vector<int>> paths;
  std::vector<int> cur{0};
  std::function<void(int)> rec = [&](int v) {
    if (v == g.n - 1) {
      paths.push_back(cur);
      return;
    }
    for (auto w : g.out[v]) {
      cur.push_back(w);
      rec(w);
      cur.pop_back();
    }
  };
  rec(0);
  std::ranges::sort(paths);
  paths.erase(std::unique(paths.begin(), paths.end()), paths.end());
  return paths;
}

// Dense Gaussian elimination with partial pivoting.
inline auto solve(std::vector<std::vector<double>> a, std::vector<double> b) -> std::vector<double> {
  const auto n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    auto piv = c;
    for (auto r = c + 1; r < n; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (auto r = c + 1; r < n; ++r) {
      double f = a[r][c] / a[c][c];
      for (auto k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (auto i = n; i-- > 0;) {
    double s = b[i];
    for (auto k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

// Probability of ever reaching `target` from each state of an embedded chain, restricted to the
// states in `live` (those from which the target is reachable); others get 0.
inline auto hitting_probability(const std::vector<std::vector<double>>& p, int target, const std::vector<bool>& live)
    -> std::vector<double> {
  const auto n = p.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<double> b(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    a[i][i] = 1.0;
    if (static_cast<int>(i) == target) {
      b[i] = 1.0;
      continue;
    }
    if (!live[i]) continue;
    for (std::size_t j = 0; j < n; ++j) a[i][j] -= p[i][j];
  }
  return solve(a, b);
}

// Expected time to absorption in `target` when it is reached with probability 1:
// m_i = sum_j p_ij (mean_ij + m_j), m_target = 0.
inline auto mean_passage_time(const std::vector<std::vector<double>>& p, const std::vector<std::vector<double>>& mean,
                              int target) -> std::vector<double> {
  const auto n = p.size();
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<double> b(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    a[i][i] = 1.0;
    if (static_cast<int>(i) == target) continue;
    for (std::size_t j = 0; j < n; ++j) {
      a[i][j] -= p[i][j];
      b[i] += p[i][j] * mean[i][j];
    }
  }
  return solve(a, b);
}

// Best total score over all stagings and clusterings that respect the pools, by enumerating every
// partition of every pool.  Vertices and edges outside the pools stay singletons.
inline auto exhaustive_map_score(const rdceg::ScoreContext& ctx, const rdceg::Hyperstage& hs,
                                 const rdceg::Hypercluster& hc) -> double {
  const auto& tree = ctx.tree();
  double total = 0.0;
  std::vector<bool> pooled_v(tree.num_vertices(), false), pooled_e(tree.num_edges(), false);
  for (const auto& set : hs.sets) {
    double best = -std::numeric_limits<double>::infinity();
    for_each_partition(set, [&](const auto& blocks) {
      double s = 0.0;
      for (const auto& b : blocks) s += ctx.stage_term(b);
      best = std::max(best, s);
    });
    total += best;
    for (auto v : set) pooled_v[v] = true;
  }
  for (const auto& set : hc.sets) {
    double best = -std::numeric_limits<double>::infinity();
    for_each_partition(set, [&](const auto& blocks) {
      double s = 0.0;
      for (const auto& b : blocks) s += ctx.cluster_term(b);
      best = std::max(best, s);
    });
    total += best;
    for (auto e : set) pooled_e[e] = true;
  }
  for (auto v : tree.situations())
    if (!pooled_v[v]) total += ctx.stage_term(std::vector<int>{v});
  for (auto e : tree.timed_edges())
    if (!pooled_e[e]) total += ctx.cluster_term(std::vector<int>{e});
  return total;
}

// Walks every observation through the tree and scores it sequentially per stage and, for the
// holding times, by quadrature per cluster.
inline auto sequential_score(const rdceg::EventTree& tree, const rdceg::Priors& priors, const rdceg::Dataset& data,
                             const rdceg::Staging& staging, const rdceg::Clustering& clustering) -> double {
  auto stage_of = staging.stage_of(tree.num_vertices());
  auto cluster_of = clustering.cluster_of(tree.num_edges());
  std::vector<std::vector<int>> sequences(staging.stages.size());
  std::vector<std::vector<double>> powers(clustering.clusters.size());
  for (const auto& obs : data.individuals) {
    auto v = tree.root();
    for (const auto& step : obs.steps) {
      auto e = *tree.child_edge(v, step.label);
      auto s = stage_of[v];
      auto labels = tree.out_labels(staging.stages[s].front());
      sequences[s].push_back(static_cast<int>(std::ranges::find(labels, step.label) - labels.begin()));
      if (step.hold) {
        auto c = cluster_of[e];
        powers[c].push_back(std::pow(*step.hold, clustering.kappa[c]));
      }
      v = tree.edge(e).child;
    }
  }
  double total = 0.0;
  for (std::size_t s = 0; s < staging.stages.size(); ++s) {
    auto first = staging.stages[s].front();
    auto labels = tree.out_labels(first);
    std::vector<double> alpha(labels.size(), 0.0);
    for (auto v : staging.stages[s]) {
      auto vl = tree.out_labels(v);
      for (std::size_t i = 0; i < vl.size(); ++i)
        alpha[std::ranges::find(labels, vl[i]) - labels.begin()] += priors.alpha[v][i];
    }
    total += oracle::dirichlet_chain_rule(alpha, sequences[s]);
  }
  for (std::size_t c = 0; c < clustering.clusters.size(); ++c) {
    double zeta = 0.0, beta = 0.0;
    for (auto e : clustering.clusters[c]) {
      zeta += priors.zeta[e];
      beta += priors.beta[e];
    }
    total += oracle::ig_marginal_quadrature(zeta, beta, powers[c]);
  }
  return total;
}

}  // namespace oracle

namespace fixture {

struct RandomTree {
  rdceg::EventTree tree;
  std::vector<double> kappa;  // per edge
};

// A small tree without repeats.  Each situation has labels {a, b} or {a, b, c}; about half the
// edges are timed, with shape 1 or 2.  Depth at most `depth`.
inline auto random_tree(std::mt19937_64& rng, int depth = 3, int max_vertices = 24) -> RandomTree {
  rdceg::TreeBuilder b;
  auto root = b.add_root("s0");
  std::vector<std::pair<int, int>> frontier{{root, 0}};
  int count = 1;
  int next_name = 1;
  std::bernoulli_distribution timed(0.5), branch(0.6), three(0.3);
  std::size_t i = 0;
  while (i < frontier.size()) {
    auto [h, d] = frontier[i++];
    if (d >= depth || (d > 0 && !branch(rng)) || count + 3 > max_vertices) continue;
    std::vector<std::string> labels{"a", "b"};
    if (three(rng)) labels.push_back("c");
    for (const auto& l : labels) {
      rdceg::EdgeFlags flags;
      flags.timed = timed(rng);
      auto c = b.add_child(h, l, "s" + std::to_string(next_name++), flags);
      ++count;
      frontier.emplace_back(c, d + 1);
    }
  }
  RandomTree out;
  out.tree = b.build();
  std::bernoulli_distribution shape(0.5);
  out.kappa.assign(out.tree.num_edges(), 1.0);
  for (int e = 0; e < out.tree.num_edges(); ++e)
    if (out.tree.edge(e).timed) out.kappa[e] = shape(rng) ? 2.0 : 1.0;
  return out;
}

// Root-to-leaf walks with uniformly chosen labels and exponential holds.
inline auto random_data(std::mt19937_64& rng, const rdceg::EventTree& tree, int n) -> rdceg::Dataset {
  rdceg::Dataset data;
  std::exponential_distribution<double> hold(0.2);
  for (int i = 0; i < n; ++i) {
    rdceg::PathObservation obs;
    obs.id = std::to_string(i);
    auto v = tree.root();
    while (tree.is_situation(v)) {
      auto edges = tree.out_edges(v);
      std::uniform_int_distribution<std::size_t> pick(0, edges.size() - 1);
      auto e = edges[pick(rng)];
      rdceg::Step s;
      s.label = tree.edge(e).label;
      if (tree.edge(e).timed) s.hold = hold(rng) + 0.01;
      obs.steps.push_back(s);
      v = tree.edge(e).child;
    }
    obs.terminal = rdceg::Terminal::Critical;
    data.individuals.push_back(std::move(obs));
  }
  return data;
}

// A random staging that only merges situations with equal label sets.
inline auto random_staging(std::mt19937_64& rng, const rdceg::EventTree& tree) -> rdceg::Staging {
  std::map<std::vector<std::string>, std::vector<std::vector<int>>> groups;
  for (auto v : tree.situations()) {
    auto& cells = groups[tree.out_labels(v)];
    std::uniform_int_distribution<std::size_t> pick(0, cells.size());
    auto k = pick(rng);
    if (k == cells.size()) {
      cells.push_back({v});
    } else {
      cells[k].push_back(v);
    }
  }
  rdceg::Staging s;
  for (auto& [_, cells] : groups)
    for (auto& c : cells) s.stages.push_back(c);
  rdceg::normalize(s);
  return s;
}

// A random clustering that only merges timed edges with equal shapes.
inline auto random_clustering(std::mt19937_64& rng, const rdceg::EventTree& tree, const std::vector<double>& kappa)
    -> rdceg::Clustering {
  std::map<double, std::vector<std::vector<int>>> groups;
  for (auto e : tree.timed_edges()) {
    auto& cells = groups[kappa[e]];
    std::uniform_int_distribution<std::size_t> pick(0, cells.size());
    auto k = pick(rng);
    if (k == cells.size()) {
      cells.push_back({e});
    } else {
      cells[k].push_back(e);
    }
  }
  rdceg::Clustering c;
  for (auto& [k, cells] : groups)
    for (auto& cell : cells) {
      c.clusters.push_back(cell);
      c.kappa.push_back(k);
    }
  rdceg::normalize(c);
  return c;
}

// Random DAG with root 0 and sink n-1: every vertex gets an edge to a later one, and every
// non-root vertex an edge from an earlier one, so every vertex lies on a root-to-sink path.
inline auto random_dag(std::mt19937_64& rng, int n, double density) -> oracle::Dag {
  oracle::Dag g;
  g.n = n;
  g.out.assign(n, {});
  std::bernoulli_distribution extra(density);
  for (int v = 0; v < n - 1; ++v) {
    std::uniform_int_distribution<int> pick(v + 1, n - 1);
    g.out[v].push_back(pick(rng));
    for (int w = v + 1; w < n; ++w)
      if (extra(rng)) g.out[v].push_back(w);
  }
  for (int w = 1; w < n; ++w) {
    bool has_in = false;
    for (int v = 0; v < w && !has_in; ++v) has_in = std::ranges::find(g.out[v], w) != g.out[v].end();
    if (!has_in) {
      std::uniform_int_distribution<int> pick(0, w - 1);
      g.out[pick(rng)].push_back(w);
    }
  }
  for (auto& o : g.out) {
    std::ranges::sort(o);
    o.erase(std::unique(o.begin(), o.end()), o.end());
  }
  return g;
}

// A root choosing among k situations, each with a timed "yes" and a timed "no" edge.  The k
// situations form one pool; the yes edges and the no edges form two more.  Situations are assigned
// to up to three true stages with well separated probabilities, and edges to true clusters with
// well separated scales, so the signal is clear but finite.
struct ToyCase {
  rdceg::ModifiedTree modified;
  rdceg::Priors priors;
  rdceg::SufficientStats stats;
  rdceg::Hyperstage hyperstage;
  rdceg::Hypercluster hypercluster;
};

inline auto toy_case(std::mt19937_64& rng, int k, double kappa) -> ToyCase {
  rdceg::TreeBuilder b;
  auto r = b.add_root("r");
  for (int i = 1; i <= k; ++i) {
    auto s = b.add_child(r, "to" + std::to_string(i), "s" + std::to_string(i));
    b.add_child(s, "yes", "", {.timed = true});
    b.add_child(s, "no", "", {.timed = true});
  }
  ToyCase c;
  c.modified = rdceg::unmodified(b.build());
  const auto& tree = c.modified.tree;
  std::vector<double> edge_kappa(tree.num_edges(), kappa);
  std::uniform_real_distribution<double> alpha(1.0, 8.0), tau(0.5, 5.0);
  c.priors = rdceg::phantom_priors(c.modified, alpha(rng), tau(rng), edge_kappa);
  c.stats = rdceg::SufficientStats::empty(tree);
  const double p_stage[] = {0.15, 0.5, 0.85};
  const double theta[] = {1.0, 6.0, 36.0};
  std::uniform_int_distribution<int> pick(0, 2), visits(20, 150);
  std::vector<int> yes, no;
  for (int i = 0; i < k; ++i) {
    auto s = tree.vertex("s" + std::to_string(i + 1));
    int n = visits(rng);
    std::binomial_distribution<int> yes_count(n, p_stage[pick(rng)]);
    int ny = yes_count(rng);
    c.stats.counts[s] = {ny, n - ny};
    c.stats.counts[tree.root()][i] = n;
    auto ey = tree.out_edges(s)[0], en = tree.out_edges(s)[1];
    for (auto [e, m] : {std::pair{ey, ny}, std::pair{en, n - ny}}) {
      // h^kappa ~ Exponential(mean theta) makes h Weibull with shape kappa.
      std::exponential_distribution<double> draw(1.0 / theta[pick(rng)]);
      for (int j = 0; j < m; ++j) c.stats.holds[e].push_back(std::pow(draw(rng), 1.0 / kappa));
    }
    yes.push_back(ey);
    no.push_back(en);
  }
  c.hyperstage.sets.emplace_back();
  for (int i = 1; i <= k; ++i) c.hyperstage.sets.back().push_back(tree.vertex("s" + std::to_string(i)));
  c.hypercluster.sets = {yes, no};
  return c;
}

// The curated toy suite: 60 seeded cases, 2 to 5 situations per pool, shapes 1 and 2.
inline auto toy_suite() -> std::vector<ToyCase> {
  std::mt19937_64 rng(20240611);
  std::vector<ToyCase> out;
  for (int i = 0; i < 60; ++i) out.push_back(toy_case(rng, 2 + i % 4, i % 2 == 0 ? 1.0 : 2.0));
  return out;
}

}  // namespace fixture

#include "rdceg/score.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "rdceg/error.hpp"

namespace rdceg {

ScoreContext::ScoreContext(const EventTree& tree, const Priors& priors, const SufficientStats& stats,
                           CensoringMode censoring)
    : tree_{tree},
      alpha_{priors.alpha},
      counts_{stats.counts},
      zeta_{priors.zeta},
      beta_{priors.beta},
      kappa_{priors.kappa},
      censoring_{censoring} {
  if (static_cast<int>(alpha_.size()) != tree.num_vertices() ||
      static_cast<int>(counts_.size()) != tree.num_vertices() ||
      static_cast<int>(zeta_.size()) != tree.num_edges() ||
      static_cast<int>(stats.holds.size()) != tree.num_edges()) {
    throw StructuralError{"priors or statistics do not match the tree"};
  }
  visits_.assign(tree.num_edges(), 0);
  power_sum_.assign(tree.num_edges(), 0.0);
  censored_power_sum_.assign(tree.num_edges(), 0.0);
  for (auto e = 0; e < tree.num_edges(); ++e) {
    visits_[e] = static_cast<std::int64_t>(stats.holds[e].size());
    for (auto h : stats.holds[e]) power_sum_[e] += std::pow(h, kappa_[e]);
    for (auto c : stats.censored[e]) censored_power_sum_[e] += std::pow(c, kappa_[e]);
  }
}

auto ScoreContext::stage_params(std::span<const Vertex_id> cell) const -> DirichletParams {
  if (cell.empty()) throw StagingError{"empty stage"};
  auto first = cell.front();
  auto labels = tree_.out_labels(first);
  auto alpha = std::vector<double>(labels.size(), 0.0);
  auto counts = std::vector<std::int64_t>(labels.size(), 0);
  for (auto v : cell) {
    if (alpha_[v].size() != tree_.out_edges(v).size() || alpha_[v].empty()) {
      throw StagingError{"missing prior for situation '" + tree_.name(v) + "'"};
    }
    if (tree_.out_edges(v).size() != labels.size()) {
      throw StagingError{"stage members '" + tree_.name(first) + "' and '" + tree_.name(v) +
                         "' have different out-degree"};
    }
    auto base = tree_.out_edges(v).front();
    for (auto i = 0u; i < labels.size(); ++i) {
      auto e = tree_.child_edge(v, labels[i]);
      if (!e) throw StagingError{"situation '" + tree_.name(v) + "' lacks label '" + labels[i] + "'"};
      alpha[i] += alpha_[v][*e - base];
      counts[i] += counts_[v][*e - base];
    }
  }
  return update_dirichlet(DirichletParams::from_prior(std::move(alpha)), counts);
}

auto ScoreContext::cluster_params(std::span<const Edge_id> cell) const -> IGParams {
  if (cell.empty()) throw StagingError{"empty cluster"};
  auto kappa = kappa_[cell.front()];
  auto zeta = 0.0;
  auto beta = 0.0;
  for (auto e : cell) {
    if (!tree_.edge(e).timed) throw StagingError{"edge '" + tree_.edge_key(e) + "' is not timed"};
    if (kappa_[e] != kappa) {
      throw StagingError{"kappa mismatch between '" + tree_.edge_key(cell.front()) + "' and '" +
                         tree_.edge_key(e) + "'"};
    }
    if (!(zeta_[e] > 0.0) || !(beta_[e] > 0.0)) {
      throw StagingError{"missing prior for edge '" + tree_.edge_key(e) + "'"};
    }
    zeta += zeta_[e];
    beta += beta_[e];
  }
  auto p = IGParams::from_prior(zeta, beta, kappa);
  for (auto e : cell) {
    p.zeta_post += static_cast<double>(visits_[e]);
    p.visits += visits_[e];
    p.beta_post += power_sum_[e];
    if (censoring_ == CensoringMode::Survival) p.beta_post += censored_power_sum_[e];
  }
  return p;
}

auto ScoreContext::stage_term(std::span<const Vertex_id> cell) const -> double {
  return stage_params(cell).log_score();
}

auto ScoreContext::cluster_term(std::span<const Edge_id> cell) const -> double {
  return cluster_params(cell).log_score();
}

namespace {

auto merged(std::span<const int> a, std::span<const int> b) -> std::vector<int> {
  auto m = std::vector<int>(a.begin(), a.end());
  m.insert(m.end(), b.begin(), b.end());
  std::ranges::sort(m);
  return m;
}

}  // namespace

auto ScoreContext::stage_merge_delta(std::span<const Vertex_id> a, std::span<const Vertex_id> b) const -> double {
  return stage_term(merged(a, b)) - stage_term(a) - stage_term(b);
}

auto ScoreContext::cluster_merge_delta(std::span<const Edge_id> a, std::span<const Edge_id> b) const -> double {
  if (kappa_[a.front()] != kappa_[b.front()]) {
    throw StagingError{"kappa mismatch between '" + tree_.edge_key(a.front()) + "' and '" +
                       tree_.edge_key(b.front()) + "'"};
  }
  return cluster_term(merged(a, b)) - cluster_term(a) - cluster_term(b);
}

auto ScoreContext::log_marginal_likelihood(const Staging& staging, const Clustering& clustering) const -> double {
  validate_staging(tree_, staging);
  validate_clustering(tree_, clustering);
  auto total = 0.0;
  for (const auto& cell : staging.stages) total += stage_term(cell);
  for (auto c = 0u; c < clustering.clusters.size(); ++c) {
    const auto& cell = clustering.clusters[c];
    for (auto e : cell) {
      if (kappa_[e] != clustering.kappa[c]) {
        throw StagingError{"cluster kappa disagrees with the prior at '" + tree_.edge_key(e) + "'"};
      }
    }
    total += cluster_term(cell);
  }
  return total;
}

auto ScoreContext::log_bayes_factor(const ModelSpec& a, const ModelSpec& b) const -> double {
  for (const auto* m : {&a, &b}) {
    try {
      validate_staging(tree_, m->staging);
      validate_clustering(tree_, m->clustering);
    } catch (const StagingError& e) {
      throw StagingError{std::string{"models are not over the same tree: "} + e.what()};
    }
  }
  auto sorted_cells = [](const std::vector<std::vector<int>>& cells) {
    auto s = std::set<std::vector<int>>{};
    for (auto c : cells) {
      std::ranges::sort(c);
      s.insert(std::move(c));
    }
    return s;
  };
  auto sa = sorted_cells(a.staging.stages);
  auto sb = sorted_cells(b.staging.stages);
  auto ca = sorted_cells(a.clustering.clusters);
  auto cb = sorted_cells(b.clustering.clusters);
  auto result = 0.0;
  for (const auto& c : sa) {
    if (!sb.contains(c)) result += stage_term(c);
  }
  for (const auto& c : sb) {
    if (!sa.contains(c)) result -= stage_term(c);
  }
  for (const auto& c : ca) {
    if (!cb.contains(c)) result += cluster_term(c);
  }
  for (const auto& c : cb) {
    if (!ca.contains(c)) result -= cluster_term(c);
  }
  return result;
}

}  // namespace rdceg

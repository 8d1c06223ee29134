#include "rdceg/search.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "rdceg/error.hpp"

namespace rdceg {

namespace {

struct Candidate {
  double delta = 0.0;
  double merged_score = 0.0;
};

// Standard greedy Bayes-factor agglomeration.  Deltas are cached per cell pair and only the
// pairs touching the newly merged cell are recomputed, which is exact because the score is a
// sum of independent cell terms.
auto agglomerate(const std::vector<std::vector<int>>& pools, const std::function<double(std::span<const int>)>& term,
                 std::vector<MergeStep>* trace) -> std::vector<std::vector<int>> {
  struct Cell {
    std::vector<int> members;
    double score = 0.0;
    int pool = 0;
    bool alive = true;
  };
  auto cells = std::vector<Cell>{};
  for (auto p = 0; p < static_cast<int>(pools.size()); ++p) {
    for (auto x : pools[p]) cells.push_back(Cell{{x}, term(std::vector<int>{x}), p});
  }

  auto cache = std::map<std::pair<int, int>, Candidate>{};
  auto evaluate = [&](int i, int j) {
    auto m = cells[i].members;
    m.insert(m.end(), cells[j].members.begin(), cells[j].members.end());
    std::ranges::sort(m);
    auto s = term(m);
    return Candidate{s - cells[i].score - cells[j].score, s};
  };
  for (auto i = 0; i < static_cast<int>(cells.size()); ++i) {
    for (auto j = i + 1; j < static_cast<int>(cells.size()); ++j) {
      if (cells[i].pool == cells[j].pool) cache[{i, j}] = evaluate(i, j);
    }
  }

  while (!cache.empty()) {
    auto best = cache.end();
    for (auto it = cache.begin(); it != cache.end(); ++it) {
      if (best == cache.end() || it->second.delta > best->second.delta) {
        best = it;
        continue;
      }
      if (it->second.delta == best->second.delta) {
        auto key = [&](const auto& entry) {
          auto a = cells[entry.first.first].members.front();
          auto b = cells[entry.first.second].members.front();
          return std::pair{std::min(a, b), std::max(a, b)};
        };
        if (key(*it) < key(*best)) best = it;
      }
    }
    // A delta within rounding of zero is a tie with not merging; e.g. no data must leave singletons.
    auto noise = 1e-12 * (1.0 + std::abs(cells[best->first.first].score) + std::abs(cells[best->first.second].score));
    if (!(best->second.delta > noise)) break;

    auto [i, j] = best->first;
    auto candidate = best->second;
    if (trace) trace->push_back(MergeStep{cells[i].members, cells[j].members, candidate.delta});
    cells[i].members.insert(cells[i].members.end(), cells[j].members.begin(), cells[j].members.end());
    std::ranges::sort(cells[i].members);
    cells[i].score = candidate.merged_score;
    cells[j].alive = false;
    std::erase_if(cache, [&](const auto& entry) {
      const auto& [a, b] = entry.first;
      return a == i || b == i || a == j || b == j;
    });
    for (auto k = 0; k < static_cast<int>(cells.size()); ++k) {
      if (k == i || !cells[k].alive || cells[k].pool != cells[i].pool) continue;
      cache[{std::min(i, k), std::max(i, k)}] = evaluate(std::min(i, k), std::max(i, k));
    }
  }

  auto result = std::vector<std::vector<int>>{};
  for (auto& c : cells) {
    if (c.alive) result.push_back(std::move(c.members));
  }
  std::ranges::sort(result, [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return result;
}

// Pools with every unlisted element as its own singleton pool.
auto complete_pools(const std::vector<std::vector<int>>& sets, const std::vector<int>& universe)
    -> std::vector<std::vector<int>> {
  auto pools = sets;
  auto listed = std::set<int>{};
  for (const auto& s : sets) listed.insert(s.begin(), s.end());
  for (auto x : universe) {
    if (!listed.contains(x)) pools.push_back({x});
  }
  return pools;
}

void check_disjoint(const std::vector<std::vector<int>>& sets, const char* what) {
  auto seen = std::set<int>{};
  for (const auto& s : sets) {
    for (auto x : s) {
      if (!seen.insert(x).second) throw ValidationError{std::string{what} + " sets overlap"};
    }
  }
}

void validate_hyperstage(const EventTree& tree, const Hyperstage& hyperstage) {
  check_disjoint(hyperstage.sets, "hyperstage");
  for (const auto& set : hyperstage.sets) {
    for (auto v : set) {
      if (v < 0 || v >= tree.num_vertices() || !tree.is_situation(v)) {
        throw ValidationError{"hyperstage refers to unknown situation " + std::to_string(v)};
      }
      auto a = tree.out_labels(v);
      auto b = tree.out_labels(set.front());
      std::ranges::sort(a);
      std::ranges::sort(b);
      if (a != b) {
        throw ValidationError{"hyperstage pools '" + tree.name(set.front()) + "' and '" + tree.name(v) +
                              "' with different edge labels"};
      }
    }
  }
}

}  // namespace

auto ahc_stages(const ScoreContext& ctx, const Hyperstage& hyperstage, std::vector<MergeStep>* trace) -> Staging {
  const auto& tree = ctx.tree();
  validate_hyperstage(tree, hyperstage);
  auto pools = complete_pools(hyperstage.sets, tree.situations());
  auto cells = agglomerate(pools, [&](std::span<const int> c) { return ctx.stage_term(c); }, trace);
  auto staging = Staging{std::move(cells)};
  normalize(staging);
  return staging;
}

auto ahc_clusters(const ScoreContext& ctx, const Hypercluster& hypercluster, std::vector<MergeStep>* trace)
    -> Clustering {
  const auto& tree = ctx.tree();
  check_disjoint(hypercluster.sets, "hypercluster");
  for (const auto& set : hypercluster.sets) {
    for (auto e : set) {
      if (e < 0 || e >= tree.num_edges() || !tree.edge(e).timed) {
        throw ValidationError{"hypercluster refers to unknown timed edge " + std::to_string(e)};
      }
    }
    // Raises on a kappa mismatch.
    if (!set.empty()) ctx.cluster_params(set);
  }
  auto pools = complete_pools(hypercluster.sets, tree.timed_edges());
  auto cells = agglomerate(pools, [&](std::span<const int> c) { return ctx.cluster_term(c); }, trace);
  auto clustering = Clustering{};
  for (auto& c : cells) {
    clustering.kappa.push_back(ctx.cluster_params(c).kappa);
    clustering.clusters.push_back(std::move(c));
  }
  normalize(clustering);
  return clustering;
}

auto replay_merges(const std::vector<std::vector<int>>& singletons, const std::vector<MergeStep>& trace)
    -> std::vector<std::vector<int>> {
  auto cells = singletons;
  for (const auto& step : trace) {
    auto a = std::ranges::find(cells, step.first);
    auto b = std::ranges::find(cells, step.second);
    if (a == cells.end() || b == cells.end() || a == b) throw ValidationError{"merge trace does not replay"};
    auto merged = *a;
    merged.insert(merged.end(), b->begin(), b->end());
    std::ranges::sort(merged);
    *a = merged;
    cells.erase(b);
  }
  std::ranges::sort(cells, [](const auto& x, const auto& y) { return x.front() < y.front(); });
  return cells;
}

auto resolve_hyperstage(const EventTree& tree, const std::vector<std::vector<std::string>>& names) -> Hyperstage {
  auto h = Hyperstage{};
  if (names.empty()) {
    // Default pools: situations with the same set of edge labels.
    auto by_labels = std::map<std::vector<std::string>, std::vector<Vertex_id>>{};
    for (auto v : tree.situations()) {
      auto labels = tree.out_labels(v);
      std::ranges::sort(labels);
      by_labels[labels].push_back(v);
    }
    for (auto& [labels, set] : by_labels) h.sets.push_back(std::move(set));
    std::ranges::sort(h.sets);
    return h;
  }
  for (const auto& set : names) {
    auto ids = std::vector<Vertex_id>{};
    for (const auto& n : set) {
      auto v = tree.find_vertex(n);
      if (!v || !tree.is_situation(*v)) throw ValidationError{"hyperstage refers to unknown situation '" + n + "'"};
      ids.push_back(*v);
    }
    std::ranges::sort(ids);
    h.sets.push_back(std::move(ids));
  }
  validate_hyperstage(tree, h);
  return h;
}

auto resolve_hypercluster(const EventTree& tree, const std::vector<std::vector<std::string>>& keys,
                          std::span<const double> edge_kappa) -> Hypercluster {
  auto h = Hypercluster{};
  if (keys.empty()) {
    auto by_kappa = std::map<double, std::vector<Edge_id>>{};
    for (auto e : tree.timed_edges()) by_kappa[edge_kappa[e]].push_back(e);
    for (auto& [k, set] : by_kappa) h.sets.push_back(std::move(set));
    return h;
  }
  for (const auto& set : keys) {
    auto ids = std::vector<Edge_id>{};
    for (const auto& key : set) {
      auto e = tree.find_edge(key);
      if (!e || !tree.edge(*e).timed) throw ValidationError{"hypercluster refers to unknown timed edge '" + key + "'"};
      ids.push_back(*e);
    }
    std::ranges::sort(ids);
    for (auto e : ids) {
      if (edge_kappa[e] != edge_kappa[ids.front()]) {
        throw ValidationError{"hypercluster mixes kappa values at '" + tree.edge_key(e) + "'"};
      }
    }
    h.sets.push_back(std::move(ids));
  }
  check_disjoint(h.sets, "hypercluster");
  return h;
}

auto FittedModel::situation_mean(Vertex_id v) const -> std::vector<double> {
  const auto& tree = hued.tree();
  auto stage = hued.staging.stage_of(tree.num_vertices()).at(v);
  if (stage == k_none) throw ValidationError{"'" + tree.name(v) + "' is not a situation"};
  auto mean = stage_params[stage].posterior_mean();
  auto labels = tree.out_labels(hued.staging.stages[stage].front());
  auto result = std::vector<double>{};
  for (auto e : tree.out_edges(v)) {
    auto i = std::ranges::find(labels, tree.edge(e).label) - labels.begin();
    result.push_back(mean[i]);
  }
  return result;
}

auto fit_partition(const ModifiedTree& modified, const Priors& priors, const SufficientStats& stats, Staging staging,
                   Clustering clustering, CensoringMode censoring, int max_depth) -> FittedModel {
  auto ctx = ScoreContext{modified.tree, priors, stats, censoring};
  auto fit = FittedModel{.hued = make_hued_tree(modified, std::move(staging), std::move(clustering)),
                         .priors = priors,
                         .censoring = censoring};
  for (const auto& cell : fit.hued.staging.stages) fit.stage_params.push_back(ctx.stage_params(cell));
  for (const auto& cell : fit.hued.clustering.clusters) fit.cluster_params.push_back(ctx.cluster_params(cell));
  fit.log_score = ctx.log_marginal_likelihood(fit.hued.staging, fit.hued.clustering);
  attach_rdceg(fit, max_depth);
  return fit;
}

void attach_rdceg(FittedModel& fit, int max_depth) {
  fit.positions = positions_from_staging(fit.hued, max_depth);
  auto skeleton = build_rdceg(fit.hued, fit.positions);

  const auto& tree = fit.hued.tree();
  auto probabilities = std::vector<std::optional<double>>{};
  auto laws = std::vector<std::optional<HoldingLaw>>{};
  auto cluster_of = fit.hued.clustering.cluster_of(tree.num_edges());
  for (const auto& edge : skeleton.edges()) {
    auto rep = edge.members.front();
    auto source = tree.edge(rep).parent;
    auto mean = fit.situation_mean(source);
    probabilities.emplace_back(mean[rep - tree.out_edges(source).front()]);
    if (edge.timed) {
      const auto& p = fit.cluster_params[cluster_of[rep]];
      laws.emplace_back(HoldingLaw::compound(p.zeta_post, p.beta_post, p.kappa));
    } else {
      laws.emplace_back(std::nullopt);
    }
  }
  fit.rdceg = skeleton.with_parameters(std::move(probabilities), std::move(laws));
}

auto make_priors(const ModifiedTree& modified, const PriorConfig& config, const SufficientStats& stats) -> Priors {
  const auto& tree = modified.tree;
  auto alpha_total = config.alpha_total.value_or(static_cast<double>(tree.out_edges(tree.root()).size()));
  auto tau = config.tau ? *config.tau : median_hold(stats).value_or(1.0);
  if (!(tau > 0.0)) tau = 1.0;
  return phantom_priors(modified, alpha_total, tau, edge_kappas(tree, config));
}

auto select_model(const SufficientStats& stats, const ModifiedTree& modified, const SearchConfig& config)
    -> FittedModel {
  const auto& tree = modified.tree;
  auto priors = make_priors(modified, config.priors, stats);
  auto hyperstage = resolve_hyperstage(tree, config.hyperstages);
  auto hypercluster = resolve_hypercluster(tree, config.hyperclusters, priors.kappa);
  auto ctx = ScoreContext{tree, priors, stats, config.priors.censoring};
  auto stage_trace = std::vector<MergeStep>{};
  auto cluster_trace = std::vector<MergeStep>{};
  auto staging = ahc_stages(ctx, hyperstage, &stage_trace);
  auto clustering = ahc_clusters(ctx, hypercluster, &cluster_trace);
  auto fit = fit_partition(modified, priors, stats, std::move(staging), std::move(clustering),
                           config.priors.censoring, config.max_depth);
  fit.stage_trace = std::move(stage_trace);
  fit.cluster_trace = std::move(cluster_trace);
  return fit;
}

auto select_model(const Dataset& data, const EventTree& tree, const std::set<std::string>& critical,
                  const SearchConfig& config) -> FittedModel {
  auto modified = modify_tree(tree, critical);
  auto stats = sufficient_stats(data, modified);
  return select_model(stats, modified, config);
}

}  // namespace rdceg

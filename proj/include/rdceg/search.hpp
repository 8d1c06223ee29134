#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "rdceg/conjugate.hpp"
#include "rdceg/dataset.hpp"
#include "rdceg/rdceg.hpp"
#include "rdceg/score.hpp"

namespace rdceg {

// Pools of situations (or timed edges) allowed to merge.  Anything not listed stays a singleton.
struct Hyperstage {
  std::vector<std::vector<Vertex_id>> sets;
};
struct Hypercluster {
  std::vector<std::vector<Edge_id>> sets;
};

struct MergeStep {
  std::vector<int> first;   // the two cells merged, sorted members
  std::vector<int> second;
  double delta = 0.0;
};

// Greedy agglomeration from singletons: repeatedly merge the pair with the largest positive
// score gain within a pool.  Ties go to the lexicographically smallest (min member, min member) pair.
auto ahc_stages(const ScoreContext& ctx, const Hyperstage& hyperstage, std::vector<MergeStep>* trace = nullptr)
    -> Staging;
auto ahc_clusters(const ScoreContext& ctx, const Hypercluster& hypercluster,
                  std::vector<MergeStep>* trace = nullptr) -> Clustering;

// Replays a merge trace from singleton cells.
auto replay_merges(const std::vector<std::vector<int>>& singletons, const std::vector<MergeStep>& trace)
    -> std::vector<std::vector<int>>;

struct SearchConfig {
  PriorConfig priors;
  std::vector<std::vector<std::string>> hyperstages;    // situation names; empty: pool by label set
  std::vector<std::vector<std::string>> hyperclusters;  // edge keys; empty: pool by kappa
  int max_depth = 0;                                    // position search depth, 0 = until stable
  std::optional<std::uint64_t> tie_break_seed;          // reserved; ties are broken by id
};

auto resolve_hyperstage(const EventTree& tree, const std::vector<std::vector<std::string>>& names) -> Hyperstage;
auto resolve_hypercluster(const EventTree& tree, const std::vector<std::vector<std::string>>& keys,
                          std::span<const double> edge_kappa) -> Hypercluster;

struct FittedModel {
  HuedTree hued;
  Priors priors;
  CensoringMode censoring = CensoringMode::Ignore;
  std::vector<DirichletParams> stage_params;  // per stage, aligned with the first member's out-edges
  std::vector<IGParams> cluster_params;       // per cluster
  double log_score = 0.0;
  std::vector<MergeStep> stage_trace;
  std::vector<MergeStep> cluster_trace;
  Partition positions;
  Rdceg rdceg;  // posterior-mean probabilities and compound holding laws attached

  // Posterior mean transition probabilities of situation v, aligned with its out-edges.
  auto situation_mean(Vertex_id v) const -> std::vector<double>;
};

// Posterior parameters, positions and RDCEG for a given partition.
auto fit_partition(const ModifiedTree& modified, const Priors& priors, const SufficientStats& stats,
                   Staging staging, Clustering clustering, CensoringMode censoring = CensoringMode::Ignore,
                   int max_depth = 0) -> FittedModel;

// Recomputes positions and the parameterized RDCEG from the partitions and posterior parameters.
void attach_rdceg(FittedModel& fit, int max_depth = 0);

// Priors resolved from the configuration (defaults filled from the data).
auto make_priors(const ModifiedTree& modified, const PriorConfig& config, const SufficientStats& stats) -> Priors;

auto select_model(const Dataset& data, const EventTree& tree, const std::set<std::string>& critical,
                  const SearchConfig& config) -> FittedModel;
auto select_model(const SufficientStats& stats, const ModifiedTree& modified, const SearchConfig& config)
    -> FittedModel;

}  // namespace rdceg

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rdceg/conjugate.hpp"
#include "rdceg/dataset.hpp"
#include "rdceg/hued_tree.hpp"

namespace rdceg {

struct ModelSpec {
  Staging staging;
  Clustering clustering;
};

// Closed-form marginal likelihood over one tree, one prior and one data set.  Holds only
// aggregated statistics, so it is cheap to copy and safe to share between threads.
class ScoreContext {
 public:
  ScoreContext(const EventTree& tree, const Priors& priors, const SufficientStats& stats,
               CensoringMode censoring = CensoringMode::Ignore);

  auto tree() const -> const EventTree& { return tree_; }
  auto censoring() const -> CensoringMode { return censoring_; }

  // Pooled hyperparameters of a cell: member priors and counts summed, labels matched literally
  // against the first member's out-edge order.
  auto stage_params(std::span<const Vertex_id> cell) const -> DirichletParams;
  // Throws StagingError when the members' kappa differ.
  auto cluster_params(std::span<const Edge_id> cell) const -> IGParams;

  auto stage_term(std::span<const Vertex_id> cell) const -> double;
  auto cluster_term(std::span<const Edge_id> cell) const -> double;
  auto stage_merge_delta(std::span<const Vertex_id> a, std::span<const Vertex_id> b) const -> double;
  auto cluster_merge_delta(std::span<const Edge_id> a, std::span<const Edge_id> b) const -> double;

  // Sum of stage terms then cluster terms, in partition order.
  auto log_marginal_likelihood(const Staging& staging, const Clustering& clustering) const -> double;
  // log L(a) - log L(b) from the cells in which the models differ.
  auto log_bayes_factor(const ModelSpec& a, const ModelSpec& b) const -> double;

 private:
  EventTree tree_;
  std::vector<std::vector<double>> alpha_;
  std::vector<std::vector<std::int64_t>> counts_;
  std::vector<double> zeta_, beta_, kappa_;
  std::vector<std::int64_t> visits_;
  std::vector<double> power_sum_;           // sum h^kappa per edge
  std::vector<double> censored_power_sum_;  // sum c^kappa per edge
  CensoringMode censoring_;
};

}  // namespace rdceg

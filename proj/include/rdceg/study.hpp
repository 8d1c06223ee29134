#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rdceg/simulate.hpp"

namespace rdceg {

// Replicated simulate-then-fit runs over population sizes and a grid of phantom priors.
// Each (size, replicate) pair draws one data set that is fitted under every prior setting.
struct StudyConfig {
  std::vector<std::int64_t> sizes = {500, 1500, 2500, 5000, 7500, 10000};
  std::vector<double> alpha_totals = {0.25, 0.5, 1.0};
  std::vector<double> taus = {1.0, 10.0, 100.0};
  int replicates = 100;
  std::uint64_t seed = 1;
  int jobs = 1;
};

struct ReplicateResult {
  std::int64_t n = 0;
  double alpha_total = 0.0;
  double tau = 0.0;
  int replicate = 0;
  std::uint64_t data_seed = 0;
  bool staging_recovered = false;
  bool clustering_recovered = false;
  double situational_error = 0.0;
  double cluster_error = 0.0;
  double log_score = 0.0;
};

struct StudyCell {
  std::int64_t n = 0;
  double alpha_total = 0.0;
  double tau = 0.0;
  int replicates = 0;
  int staging_recovered = 0;
  int clustering_recovered = 0;
  int both_recovered = 0;
  double mean_situational_error = 0.0;
  double mean_cluster_error = 0.0;
  double sd_situational_error = 0.0;
  double sd_cluster_error = 0.0;
};

struct StudyResult {
  std::string model;
  std::vector<ReplicateResult> runs;  // ordered by size, replicate, alpha, tau
  std::vector<StudyCell> cells;       // ordered by size, alpha, tau
};

// Seed of the data set for (size, replicate).
auto study_data_seed(std::uint64_t seed, std::int64_t n, int replicate) -> std::uint64_t;

// `progress`, if set, is called after each (size, replicate) pair with the number done and total.
auto run_study(const GroundTruthModel& truth, const StudyConfig& config,
               const std::function<void(int, int)>& progress = {}) -> StudyResult;

auto study_runs_csv(const StudyResult& result) -> std::string;
auto study_cells_csv(const StudyResult& result) -> std::string;

}  // namespace rdceg

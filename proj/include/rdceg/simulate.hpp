#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "rdceg/dataset.hpp"
#include "rdceg/rdceg.hpp"
#include "rdceg/search.hpp"

namespace rdceg {

struct TruthStage {
  std::vector<std::string> situations;
  std::map<std::string, double> probabilities;  // by edge label, over the modified tree
};

struct TruthCluster {
  std::vector<std::string> edges;  // edge keys
  double theta = 1.0;
  double kappa = 1.0;
};

// Everything needed to write a ground-truth model down.  Out-degree-1 situations may be left
// out of `stages`; they become singleton stages.
struct TruthSpec {
  std::string id;
  std::string note;
  EventTree tree;  // full tree, dropout leaves included
  std::set<std::string> critical;
  std::vector<TruthStage> stages;
  std::vector<TruthCluster> clusters;
  std::map<std::string, double> dropout;  // per situation: chance of leaving before the next transition
  int max_slices = 20;                    // observation stops (censored) on entering slice max_slices + 1
  double study_window = std::numeric_limits<double>::infinity();
  SearchConfig search;  // recommended hyperstages and hyperclusters for fitting
};

struct GroundTruthModel {
  TruthSpec spec;
  HuedTree hued;
  std::vector<std::vector<double>> stage_probabilities;  // per stage, aligned with the first member's out-edges
  std::vector<double> cluster_theta;                      // per cluster of hued.clustering
  std::vector<double> dropout;                            // per vertex of the modified tree

  auto id() const -> const std::string& { return spec.id; }
  auto modified() const -> const ModifiedTree& { return hued.modified; }
  // mu-dagger of a situation, aligned with its out-edges.
  auto situation_probabilities(Vertex_id v) const -> std::vector<double>;
  auto edge_theta(Edge_id e) const -> double;
  auto edge_kappa(Edge_id e) const -> double;
  // The generating RDCEG with true probabilities and Weibull laws attached.
  auto rdceg(int max_depth = 0) const -> Rdceg;
};

auto make_ground_truth(TruthSpec spec) -> GroundTruthModel;

// One seed-derived stream per individual, so the output does not depend on `jobs`.
auto simulate_population(const GroundTruthModel& model, std::int64_t n, std::uint64_t seed, int jobs = 1)
    -> Dataset;

}  // namespace rdceg

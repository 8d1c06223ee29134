#include "rdceg/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "rdceg/error.hpp"

namespace rdceg {

auto make_ground_truth(TruthSpec spec) -> GroundTruthModel {
  auto modified = modify_tree(spec.tree, spec.critical);
  const auto& tree = modified.tree;

  auto staging = Staging{};
  auto probabilities = std::vector<std::vector<double>>{};
  auto covered = std::vector<bool>(tree.num_vertices(), false);
  auto stage_index = std::map<std::vector<Vertex_id>, std::vector<double>>{};
  for (const auto& stage : spec.stages) {
    auto cell = std::vector<Vertex_id>{};
    for (const auto& name : stage.situations) {
      auto v = tree.find_vertex(name);
      if (!v || !tree.is_situation(*v)) throw ValidationError{"truth stage names unknown situation '" + name + "'"};
      cell.push_back(*v);
      covered[*v] = true;
    }
    if (cell.empty()) throw ValidationError{"empty truth stage"};
    std::ranges::sort(cell);
    auto p = std::vector<double>{};
    auto sum = 0.0;
    for (const auto& label : tree.out_labels(cell.front())) {
      auto it = stage.probabilities.find(label);
      if (it == stage.probabilities.end()) {
        throw ValidationError{"truth stage of '" + tree.name(cell.front()) + "' lacks label '" + label + "'"};
      }
      if (!(it->second >= 0.0)) throw ValidationError{"negative truth probability"};
      p.push_back(it->second);
      sum += it->second;
    }
    if (stage.probabilities.size() != p.size()) {
      throw ValidationError{"truth stage of '" + tree.name(cell.front()) + "' has extra labels"};
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ValidationError{"truth probabilities of '" + tree.name(cell.front()) + "' do not sum to 1"};
    }
    for (auto& x : p) x /= sum;
    stage_index[cell] = p;
    staging.stages.push_back(std::move(cell));
  }
  for (auto v : tree.situations()) {
    if (covered[v]) continue;
    if (tree.out_edges(v).size() != 1) throw ValidationError{"situation '" + tree.name(v) + "' has no truth stage"};
    staging.stages.push_back({v});
    stage_index[{v}] = {1.0};
  }

  auto clustering = Clustering{};
  auto theta_index = std::map<std::vector<Edge_id>, double>{};
  for (const auto& cluster : spec.clusters) {
    auto cell = std::vector<Edge_id>{};
    for (const auto& key : cluster.edges) cell.push_back(tree.edge_by_key(key));
    if (cell.empty()) throw ValidationError{"empty truth cluster"};
    if (!(cluster.theta > 0.0) || !(cluster.kappa > 0.0)) throw ValidationError{"truth Weibull parameters must be positive"};
    std::ranges::sort(cell);
    theta_index[cell] = cluster.theta;
    clustering.clusters.push_back(std::move(cell));
    clustering.kappa.push_back(cluster.kappa);
  }

  auto model = GroundTruthModel{};
  model.hued = make_hued_tree(std::move(modified), std::move(staging), std::move(clustering));
  for (const auto& cell : model.hued.staging.stages) model.stage_probabilities.push_back(stage_index.at(cell));
  for (const auto& cell : model.hued.clustering.clusters) model.cluster_theta.push_back(theta_index.at(cell));

  const auto& m = model.hued.modified;
  model.dropout.assign(m.tree.num_vertices(), 0.0);
  for (const auto& [name, d] : spec.dropout) {
    auto v = m.tree.find_vertex(name);
    if (!v || !m.tree.is_situation(*v)) throw ValidationError{"dropout given for unknown situation '" + name + "'"};
    if (!(d >= 0.0 && d < 1.0)) throw ValidationError{"dropout probability must lie in [0, 1)"};
    if (d > 0.0 && !m.renormalized[*v]) {
      throw ValidationError{"situation '" + name + "' has no dropout edge in the event tree"};
    }
    model.dropout[*v] = d;
  }
  if (spec.max_slices < 1) throw ValidationError{"max_slices must be at least 1"};
  if (!(spec.study_window > 0.0)) throw ValidationError{"study window must be positive"};
  model.spec = std::move(spec);
  return model;
}

auto GroundTruthModel::situation_probabilities(Vertex_id v) const -> std::vector<double> {
  const auto& tree = hued.tree();
  auto stage = hued.staging.stage_of(tree.num_vertices()).at(v);
  if (stage == k_none) throw ValidationError{"'" + tree.name(v) + "' is not a situation"};
  auto labels = tree.out_labels(hued.staging.stages[stage].front());
  auto result = std::vector<double>{};
  for (auto e : tree.out_edges(v)) {
    auto i = std::ranges::find(labels, tree.edge(e).label) - labels.begin();
    result.push_back(stage_probabilities[stage][i]);
  }
  return result;
}

auto GroundTruthModel::edge_theta(Edge_id e) const -> double {
  auto c = hued.clustering.cluster_of(hued.tree().num_edges()).at(e);
  if (c == k_none) throw ValidationError{"edge is not timed"};
  return cluster_theta[c];
}

auto GroundTruthModel::edge_kappa(Edge_id e) const -> double {
  auto c = hued.clustering.cluster_of(hued.tree().num_edges()).at(e);
  if (c == k_none) throw ValidationError{"edge is not timed"};
  return hued.clustering.kappa[c];
}

auto GroundTruthModel::rdceg(int max_depth) const -> Rdceg {
  auto skeleton = build_rdceg(hued, positions_from_staging(hued, max_depth));
  const auto& tree = hued.tree();
  auto probabilities = std::vector<std::optional<double>>{};
  auto laws = std::vector<std::optional<HoldingLaw>>{};
  for (const auto& edge : skeleton.edges()) {
    auto rep = edge.members.front();
    auto source = tree.edge(rep).parent;
    probabilities.emplace_back(situation_probabilities(source)[rep - tree.out_edges(source).front()]);
    if (edge.timed) {
      laws.emplace_back(HoldingLaw::weibull(edge_theta(rep), edge_kappa(rep)));
    } else {
      laws.emplace_back(std::nullopt);
    }
  }
  return skeleton.with_parameters(std::move(probabilities), std::move(laws));
}

namespace {

struct Sampler {
  const GroundTruthModel& model;
  std::vector<std::discrete_distribution<int>> choice;
  std::vector<double> theta;
  std::vector<double> kappa;

  explicit Sampler(const GroundTruthModel& m) : model{m} {
    const auto& tree = m.hued.tree();
    choice.resize(tree.num_vertices());
    for (auto v : tree.situations()) {
      auto p = m.situation_probabilities(v);
      choice[v] = std::discrete_distribution<int>(p.begin(), p.end());
    }
    theta.assign(tree.num_edges(), 0.0);
    kappa.assign(tree.num_edges(), 0.0);
    for (auto e : tree.timed_edges()) {
      theta[e] = m.edge_theta(e);
      kappa[e] = m.edge_kappa(e);
    }
  }

  auto individual(std::int64_t i, std::uint64_t seed) const -> PathObservation {
    const auto& tree = model.hued.tree();
    auto rng = make_stream(seed, static_cast<std::uint64_t>(i));
    auto uniform = std::uniform_real_distribution<double>{0.0, 1.0};
    auto categorical = std::discrete_distribution<int>{};
    auto obs = PathObservation{.id = std::to_string(i)};
    auto v = tree.root();
    auto elapsed = 0.0;
    auto slice = 1;
    while (true) {
      if (model.dropout[v] > 0.0 && uniform(rng) < model.dropout[v]) {
        obs.terminal = Terminal::DroppedOut;
        return obs;
      }
      auto pick = categorical(rng, choice[v].param());
      auto e = tree.out_edges(v)[pick];
      const auto& edge = tree.edge(e);
      auto step = Step{.label = edge.label};
      if (edge.timed) {
        auto h = weibull_sample(theta[e], kappa[e], rng);
        if (elapsed + h > model.spec.study_window) {
          step.hold = model.spec.study_window - elapsed;
          step.censored = true;
          obs.steps.push_back(std::move(step));
          obs.terminal = Terminal::Censored;
          return obs;
        }
        elapsed += h;
        step.hold = h;
      }
      obs.steps.push_back(std::move(step));
      auto next = tree.resolved_child(e);
      if (next == k_none) {
        obs.terminal = Terminal::Critical;
        return obs;
      }
      if (edge.slice_boundary && ++slice > model.spec.max_slices) {
        obs.terminal = Terminal::Censored;
        return obs;
      }
      v = next;
    }
  }
};

}  // namespace

auto simulate_population(const GroundTruthModel& model, std::int64_t n, std::uint64_t seed, int jobs) -> Dataset {
  if (n < 1) throw ValidationError{"population size must be at least 1"};
  auto data = Dataset{.header = {.seed = seed, .model = model.id(), .n = n}};
  data.individuals.resize(static_cast<std::size_t>(n));
  auto sampler = Sampler{model};
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(std::max<std::int64_t>(n, 1))));
  auto work = [&](int worker) {
    for (auto i = static_cast<std::int64_t>(worker); i < n; i += jobs) data.individuals[i] = sampler.individual(i, seed);
  };
  if (jobs == 1) {
    work(0);
  } else {
    auto threads = std::vector<std::thread>{};
    for (auto w = 0; w < jobs; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }
  return data;
}

}  // namespace rdceg

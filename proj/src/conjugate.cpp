#include "rdceg/conjugate.hpp"

#include <cmath>
#include <numeric>

#include "rdceg/error.hpp"
#include "rdceg/special.hpp"

namespace rdceg {

namespace {

void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError{"transition probability must lie in [0, 1]"};
}

}  // namespace

auto joint_density(double transition_prob, double h) -> double {
  check_probability(transition_prob);
  if (!(h >= 0.0)) throw DomainError{"holding time must be nonnegative"};
  return transition_prob;
}

auto joint_density(double transition_prob, const std::function<double(double)>& holding_density, double h)
    -> double {
  check_probability(transition_prob);
  if (!(h >= 0.0)) throw DomainError{"holding time must be nonnegative"};
  if (!holding_density) return transition_prob;
  return transition_prob * holding_density(h);
}

auto DirichletParams::from_prior(std::vector<double> alpha) -> DirichletParams {
  for (auto a : alpha) {
    if (!(a > 0.0)) throw DomainError{"Dirichlet concentration must be positive"};
  }
  auto p = DirichletParams{};
  p.alpha_post = alpha;
  p.counts.assign(alpha.size(), 0);
  p.alpha = std::move(alpha);
  return p;
}

auto DirichletParams::posterior_mean() const -> std::vector<double> {
  auto total = std::accumulate(alpha_post.begin(), alpha_post.end(), 0.0);
  auto mean = alpha_post;
  for (auto& m : mean) m /= total;
  return mean;
}

auto DirichletParams::log_score() const -> double { return dirichlet_log_score(alpha, alpha_post); }

auto update_dirichlet(const DirichletParams& params, std::span<const std::int64_t> counts) -> DirichletParams {
  if (counts.size() != params.alpha.size()) throw DomainError{"count vector length does not match the prior"};
  auto result = params;
  for (auto i = 0u; i < counts.size(); ++i) {
    if (counts[i] < 0) throw DomainError{"negative transition count"};
    result.alpha_post[i] += static_cast<double>(counts[i]);
    result.counts[i] += counts[i];
  }
  return result;
}

auto IGParams::from_prior(double zeta, double beta, double kappa) -> IGParams {
  if (!(zeta > 0.0) || !(beta > 0.0)) throw DomainError{"Inverse-Gamma parameters must be positive"};
  if (!(kappa > 0.0)) throw DomainError{"Weibull shape must be positive"};
  return IGParams{.zeta = zeta, .beta = beta, .zeta_post = zeta, .beta_post = beta, .kappa = kappa};
}

auto IGParams::posterior_mean_theta() const -> std::optional<double> {
  if (zeta_post <= 1.0) return std::nullopt;
  return beta_post / (zeta_post - 1.0);
}

auto IGParams::log_score() const -> double { return ig_log_score(zeta, beta, zeta_post, beta_post); }

auto update_ig(const IGParams& params, std::span<const double> holds) -> IGParams {
  auto result = params;
  for (auto h : holds) {
    if (!(h >= 0.0)) throw DomainError{"holding time must be nonnegative"};
    result.beta_post += std::pow(h, params.kappa);
  }
  result.zeta_post += static_cast<double>(holds.size());
  result.visits += static_cast<std::int64_t>(holds.size());
  return result;
}

auto update_ig_censored(const IGParams& params, std::span<const double> censored) -> IGParams {
  auto result = params;
  for (auto c : censored) {
    if (!(c >= 0.0)) throw DomainError{"holding time must be nonnegative"};
    result.beta_post += std::pow(c, params.kappa);
  }
  return result;
}

auto dirichlet_log_score(std::span<const double> alpha, std::span<const double> alpha_post) -> double {
  if (alpha.size() != alpha_post.size()) throw DomainError{"Dirichlet vectors differ in length"};
  auto sum = 0.0;
  auto sum_post = 0.0;
  auto terms = 0.0;
  for (auto i = 0u; i < alpha.size(); ++i) {
    sum += alpha[i];
    sum_post += alpha_post[i];
    terms += log_gamma(alpha_post[i]) - log_gamma(alpha[i]);
  }
  if (alpha.empty()) return 0.0;
  return log_gamma(sum) - log_gamma(sum_post) + terms;
}

auto ig_log_score(double zeta, double beta, double zeta_post, double beta_post) -> double {
  return zeta * std::log(beta) - log_gamma(zeta) + log_gamma(zeta_post) - zeta_post * std::log(beta_post);
}

auto holding_log_jacobian(std::span<const double> holds, double kappa) -> double {
  auto sum = 0.0;
  for (auto h : holds) sum += std::log(kappa) + (kappa - 1.0) * std::log(h);
  return sum;
}

auto phantom_priors(const ModifiedTree& modified, double alpha_total, double tau, std::span<const double> edge_kappa)
    -> Priors {
  if (!(alpha_total > 0.0) || !std::isfinite(alpha_total)) throw DomainError{"alphaTotal must be positive"};
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError{"tau must be positive"};
  const auto& tree = modified.tree;
  if (static_cast<int>(edge_kappa.size()) != tree.num_edges()) {
    throw DomainError{"need one kappa per edge"};
  }
  auto priors = Priors{.alpha_total = alpha_total, .tau = tau};
  priors.alpha.resize(tree.num_vertices());
  priors.zeta.assign(tree.num_edges(), 0.0);
  priors.beta.assign(tree.num_edges(), 0.0);
  priors.kappa.assign(edge_kappa.begin(), edge_kappa.end());

  // Breadth-first ids put parents first.
  auto mass = std::vector<double>(tree.num_vertices(), 0.0);
  mass[tree.root()] = alpha_total;
  for (auto v = 0; v < tree.num_vertices(); ++v) {
    if (tree.is_leaf(v)) continue;
    auto k = static_cast<double>(tree.out_edges(v).size());
    for (auto e : tree.out_edges(v)) {
      auto share = mass[v] / k;
      priors.alpha[v].push_back(share);
      mass[tree.edge(e).child] = share;
      if (tree.edge(e).timed) {
        if (!(edge_kappa[e] > 0.0)) throw DomainError{"Weibull shape must be positive"};
        priors.zeta[e] = share;
        priors.beta[e] = std::pow(tau, edge_kappa[e]);
      }
    }
  }
  return priors;
}

auto edge_kappas(const EventTree& tree, const PriorConfig& config) -> std::vector<double> {
  if (!(config.default_kappa > 0.0)) throw ValidationError{"default kappa must be positive"};
  auto kappa = std::vector<double>(tree.num_edges(), config.default_kappa);
  for (const auto& [key, k] : config.edge_kappa) {
    auto e = tree.edge_by_key(key);
    if (!tree.edge(e).timed) throw ValidationError{"kappa given for untimed edge '" + key + "'"};
    if (!(k > 0.0)) throw ValidationError{"kappa for '" + key + "' must be positive"};
    kappa[e] = k;
  }
  return kappa;
}

}  // namespace rdceg

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rdceg/event_tree.hpp"

namespace rdceg {

// pi * f(h).  Untimed edges have no density and contribute pi alone.
auto joint_density(double transition_prob, double h) -> double;
auto joint_density(double transition_prob, const std::function<double(double)>& holding_density, double h)
    -> double;

struct DirichletParams {
  std::vector<double> alpha;
  std::vector<double> alpha_post;
  std::vector<std::int64_t> counts;

  static auto from_prior(std::vector<double> alpha) -> DirichletParams;
  auto posterior_mean() const -> std::vector<double>;
  auto log_score() const -> double;
};

// alpha* = alpha* + n, counts accumulate; the prior alpha is untouched.
auto update_dirichlet(const DirichletParams& params, std::span<const std::int64_t> counts) -> DirichletParams;

struct IGParams {
  double zeta = 0.0;
  double beta = 0.0;
  double zeta_post = 0.0;
  double beta_post = 0.0;
  double kappa = 1.0;
  std::int64_t visits = 0;

  static auto from_prior(double zeta, double beta, double kappa) -> IGParams;
  // Posterior mean of theta, beta* / (zeta* - 1); empty when zeta* <= 1.
  auto posterior_mean_theta() const -> std::optional<double>;
  auto log_score() const -> double;
};

// zeta* += |holds|, beta* += sum h^kappa.
auto update_ig(const IGParams& params, std::span<const double> holds) -> IGParams;
// Right-censored holding times: beta* += sum c^kappa, zeta* unchanged.
auto update_ig_censored(const IGParams& params, std::span<const double> censored) -> IGParams;

// lnG(sum a) - lnG(sum a*) + sum [lnG(a*) - lnG(a)].
auto dirichlet_log_score(std::span<const double> alpha, std::span<const double> alpha_post) -> double;
// zeta ln beta - lnG(zeta) + lnG(zeta*) - zeta* ln beta*.
auto ig_log_score(double zeta, double beta, double zeta_post, double beta_post) -> double;
// sum ln(kappa h^(kappa-1)): the Jacobian of h -> h^kappa.  The cluster terms above leave it out
// because it depends only on the data and kappa, so it cancels from every Bayes factor.
auto holding_log_jacobian(std::span<const double> holds, double kappa) -> double;

enum class CensoringMode { Ignore, Survival };

struct PriorConfig {
  std::optional<double> alpha_total;  // default: out-degree of the root
  std::optional<double> tau;          // default: median observed holding time
  double default_kappa = 1.0;
  std::map<std::string, double> edge_kappa;  // by edge key
  CensoringMode censoring = CensoringMode::Ignore;
};

// Phantom-unit priors, per vertex (aligned with out_edges) and per edge.
struct Priors {
  double alpha_total = 0.0;
  double tau = 0.0;
  std::vector<std::vector<double>> alpha;  // per vertex
  std::vector<double> zeta;                // per edge; 0 for untimed edges
  std::vector<double> beta;
  std::vector<double> kappa;
};

// alpha_total units enter the root and split equally over out-edges down the template;
// units reaching a leaf or repeat marker stop.  zeta_e = alpha_e, beta_e = tau^kappa_e.
auto phantom_priors(const ModifiedTree& tree, double alpha_total, double tau, std::span<const double> edge_kappa)
    -> Priors;

// Kappa per edge id from the configuration.
auto edge_kappas(const EventTree& tree, const PriorConfig& config) -> std::vector<double>;

}  // namespace rdceg

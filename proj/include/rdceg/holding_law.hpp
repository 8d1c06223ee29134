#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rdceg/random.hpp"

namespace rdceg {

// A moment that may not exist.  Reading the value of an infinite moment throws DomainError.
class Moment {
 public:
  static auto finite(double value) -> Moment { return Moment{value, true}; }
  static auto infinite() -> Moment { return Moment{0.0, false}; }
  auto is_finite() const -> bool { return finite_; }
  auto value() const -> double;

 private:
  Moment(double v, bool f) : value_{v}, finite_{f} {}
  double value_;
  bool finite_;
};

// Weibull(theta, kappa) with density (kappa/theta) t^(kappa-1) exp(-t^kappa / theta).
auto weibull_density(double t, double theta, double kappa) -> double;
auto weibull_cdf(double t, double theta, double kappa) -> double;
auto weibull_mean(double theta, double kappa) -> double;
auto weibull_variance(double theta, double kappa) -> double;
auto weibull_sample(double theta, double kappa, Rng& rng) -> double;

// Weibull whose scale theta ~ InverseGamma(zeta, beta), marginalized over theta.
auto compound_density(double zeta, double beta, double kappa, double t) -> double;
auto compound_log_density(double zeta, double beta, double kappa, double t) -> double;
auto compound_cdf(double zeta, double beta, double kappa, double t) -> double;
auto compound_sample(double zeta, double beta, double kappa, Rng& rng) -> double;
struct CompoundMoments {
  Moment mean;
  Moment variance;
};
auto compound_moments(double zeta, double beta, double kappa) -> CompoundMoments;

struct GridSpec {
  int points = 4096;
};

class HoldingLaw {
 public:
  enum class Kind { PointMass, Weibull, Compound, Mixture, Convolution };

  // Zero duration.  Used for untimed edges, whose density factor is fixed at 1.
  static auto point_mass() -> HoldingLaw;
  static auto weibull(double theta, double kappa) -> HoldingLaw;
  static auto compound(double zeta, double beta, double kappa) -> HoldingLaw;
  static auto mixture(std::vector<double> weights, std::vector<HoldingLaw> components) -> HoldingLaw;
  // Law of a sum of independent holding times, tabulated on a uniform grid.
  // Point-mass components drop out; a single remaining component is returned as is.
  static auto convolution(std::vector<HoldingLaw> components, GridSpec grid = {}) -> HoldingLaw;

  auto kind() const -> Kind;
  auto kind_name() const -> std::string;

  // Continuous part only: a point mass has density 0 away from t = 0.
  auto density(double t) const -> double;
  auto cdf(double t) const -> double;
  auto mean() const -> Moment;
  auto variance() const -> Moment;
  auto sample(Rng& rng) const -> double;
  auto quantile(double p) const -> double;

  // Parameters: theta/kappa, zeta/beta/kappa; mixture weights; grid step and offset.
  auto theta() const -> double;
  auto zeta() const -> double;
  auto beta() const -> double;
  auto kappa() const -> double;
  auto weights() const -> const std::vector<double>&;
  auto components() const -> const std::vector<HoldingLaw>&;
  auto grid_step() const -> double;
  auto grid_size() const -> int;

 private:
  struct Node;
  explicit HoldingLaw(std::shared_ptr<const Node> node) : node_{std::move(node)} {}
  std::shared_ptr<const Node> node_;
};

}  // namespace rdceg

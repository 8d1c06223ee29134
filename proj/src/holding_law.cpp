#include "rdceg/holding_law.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rdceg/error.hpp"
#include "rdceg/special.hpp"

namespace rdceg {

auto Moment::value() const -> double {
  if (!finite_) throw DomainError{"moment is infinite"};
  return value_;
}

namespace {

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError{std::string{what} + " must be positive and finite"};
}

void require_time(double t) {
  if (!(t >= 0.0)) throw DomainError{"time must be nonnegative"};
}

auto uniform01(Rng& rng) -> double { return std::uniform_real_distribution<double>{0.0, 1.0}(rng); }

}  // namespace

auto weibull_density(double t, double theta, double kappa) -> double {
  require_positive(theta, "Weibull scale");
  require_positive(kappa, "Weibull shape");
  require_time(t);
  if (t == 0.0) {
    if (kappa < 1.0) return std::numeric_limits<double>::infinity();
    return kappa == 1.0 ? 1.0 / theta : 0.0;
  }
  auto tk = std::pow(t, kappa);
  return kappa / theta * tk / t * std::exp(-tk / theta);
}

auto weibull_cdf(double t, double theta, double kappa) -> double {
  require_positive(theta, "Weibull scale");
  require_positive(kappa, "Weibull shape");
  require_time(t);
  return -std::expm1(-std::pow(t, kappa) / theta);
}

auto weibull_mean(double theta, double kappa) -> double {
  require_positive(theta, "Weibull scale");
  require_positive(kappa, "Weibull shape");
  return std::exp(std::log(theta) / kappa + log_gamma(1.0 + 1.0 / kappa));
}

auto weibull_variance(double theta, double kappa) -> double {
  auto m = weibull_mean(theta, kappa);
  return std::exp(2.0 * std::log(theta) / kappa + log_gamma(1.0 + 2.0 / kappa)) - m * m;
}

auto weibull_sample(double theta, double kappa, Rng& rng) -> double {
  return std::pow(-theta * std::log1p(-uniform01(rng)), 1.0 / kappa);
}

auto compound_log_density(double zeta, double beta, double kappa, double t) -> double {
  require_positive(zeta, "compound shape");
  require_positive(beta, "compound scale");
  require_positive(kappa, "Weibull shape");
  require_time(t);
  if (t == 0.0) {
    if (kappa < 1.0) return std::numeric_limits<double>::infinity();
    if (kappa > 1.0) return -std::numeric_limits<double>::infinity();
    return std::log(zeta / beta);
  }
  auto tk = std::pow(t, kappa);
  return std::log(kappa) + (kappa - 1.0) * std::log(t) + std::log(zeta) - std::log(beta) -
         (zeta + 1.0) * std::log1p(tk / beta);
}

auto compound_density(double zeta, double beta, double kappa, double t) -> double {
  return std::exp(compound_log_density(zeta, beta, kappa, t));
}

auto compound_cdf(double zeta, double beta, double kappa, double t) -> double {
  require_positive(zeta, "compound shape");
  require_positive(beta, "compound scale");
  require_positive(kappa, "Weibull shape");
  require_time(t);
  return -std::expm1(-zeta * std::log1p(std::pow(t, kappa) / beta));
}

auto compound_sample(double zeta, double beta, double kappa, Rng& rng) -> double {
  auto g = std::gamma_distribution<double>{zeta, 1.0}(rng);
  auto theta = beta / std::max(g, std::numeric_limits<double>::min());
  return weibull_sample(theta, kappa, rng);
}

auto compound_moments(double zeta, double beta, double kappa) -> CompoundMoments {
  require_positive(zeta, "compound shape");
  require_positive(beta, "compound scale");
  require_positive(kappa, "Weibull shape");
  // E[X^r] = Gamma(zeta - r/kappa) Gamma(1 + r/kappa) beta^(r/kappa) / Gamma(zeta), for zeta > r/kappa.
  auto raw = [&](double r) {
    return std::exp(log_gamma(zeta - r / kappa) + log_gamma(1.0 + r / kappa) + r / kappa * std::log(beta) -
                    log_gamma(zeta));
  };
  auto result = CompoundMoments{Moment::infinite(), Moment::infinite()};
  if (zeta > 1.0 / kappa) {
    auto m = raw(1.0);
    result.mean = Moment::finite(m);
    if (zeta > 2.0 / kappa) result.variance = Moment::finite(std::max(0.0, raw(2.0) - m * m));
  }
  return result;
}

struct HoldingLaw::Node {
  Kind kind = Kind::PointMass;
  double a = 0.0;  // theta, or zeta
  double b = 0.0;  // beta
  double kappa = 0.0;
  std::vector<double> weights;
  std::vector<HoldingLaw> components;
  // Grid: cell j holds mass cumulative[j] - cumulative[j-1], spread over offset + (j -+ 1/2) step.
  double step = 0.0;
  double offset = 0.0;
  std::vector<double> cumulative;
};

auto HoldingLaw::point_mass() -> HoldingLaw { return HoldingLaw{std::make_shared<const Node>()}; }

auto HoldingLaw::weibull(double theta, double kappa) -> HoldingLaw {
  require_positive(theta, "Weibull scale");
  require_positive(kappa, "Weibull shape");
  return HoldingLaw{std::make_shared<const Node>(Node{.kind = Kind::Weibull, .a = theta, .kappa = kappa})};
}

auto HoldingLaw::compound(double zeta, double beta, double kappa) -> HoldingLaw {
  require_positive(zeta, "compound shape");
  require_positive(beta, "compound scale");
  require_positive(kappa, "Weibull shape");
  return HoldingLaw{
      std::make_shared<const Node>(Node{.kind = Kind::Compound, .a = zeta, .b = beta, .kappa = kappa})};
}

auto HoldingLaw::mixture(std::vector<double> weights, std::vector<HoldingLaw> components) -> HoldingLaw {
  if (weights.size() != components.size() || weights.empty()) {
    throw DomainError{"mixture needs one weight per component"};
  }
  auto total = 0.0;
  for (auto w : weights) {
    if (!(w >= 0.0)) throw DomainError{"mixture weights must be nonnegative"};
    total += w;
  }
  if (!(total > 0.0)) throw DomainError{"mixture weights sum to zero"};
  for (auto& w : weights) w /= total;
  return HoldingLaw{std::make_shared<const Node>(
      Node{.kind = Kind::Mixture, .weights = std::move(weights), .components = std::move(components)})};
}

auto HoldingLaw::convolution(std::vector<HoldingLaw> components, GridSpec grid) -> HoldingLaw {
  std::erase_if(components, [](const HoldingLaw& l) { return l.kind() == Kind::PointMass; });
  if (components.empty()) return point_mass();
  if (components.size() == 1) return components.front();
  if (grid.points < 16) throw DomainError{"convolution grid needs at least 16 points"};

  // Support: 8 x the summed means, widened to the summed 0.999 quantiles (or 0.9999 when a mean is infinite).
  auto mean_sum = 0.0;
  auto all_finite = true;
  auto quantile_sum = 0.0;
  for (const auto& c : components) {
    auto m = c.mean();
    if (m.is_finite()) {
      mean_sum += m.value();
    } else {
      all_finite = false;
    }
  }
  for (const auto& c : components) quantile_sum += c.quantile(all_finite ? 0.999 : 0.9999);
  auto upper = std::max(all_finite ? 8.0 * mean_sum : 0.0, quantile_sum);
  if (!(upper > 0.0)) throw DomainError{"convolution of zero-length laws"};
  auto h = upper / grid.points;

  auto masses = std::vector<double>{1.0};
  for (const auto& c : components) {
    auto cell = std::vector<double>(grid.points);
    auto prev = 0.0;
    for (auto i = 0; i < grid.points; ++i) {
      auto cur = c.cdf((i + 1) * h);
      cell[i] = std::max(0.0, cur - prev);
      prev = cur;
    }
    auto next = std::vector<double>(masses.size() + cell.size() - 1, 0.0);
    for (auto i = 0u; i < masses.size(); ++i) {
      if (masses[i] == 0.0) continue;
      for (auto j = 0u; j < cell.size(); ++j) next[i + j] += masses[i] * cell[j];
    }
    masses = std::move(next);
  }
  auto node = Node{.kind = Kind::Convolution, .components = std::move(components)};
  node.step = h;
  node.offset = 0.5 * h * static_cast<double>(node.components.size());
  node.cumulative.resize(masses.size());
  std::partial_sum(masses.begin(), masses.end(), node.cumulative.begin());
  return HoldingLaw{std::make_shared<const Node>(std::move(node))};
}

auto HoldingLaw::kind() const -> Kind { return node_->kind; }

auto HoldingLaw::kind_name() const -> std::string {
  switch (node_->kind) {
    case Kind::PointMass: return "point_mass";
    case Kind::Weibull: return "weibull";
    case Kind::Compound: return "compound_weibull_ig";
    case Kind::Mixture: return "mixture";
    case Kind::Convolution: return "convolution";
  }
  return "unknown";
}

auto HoldingLaw::density(double t) const -> double {
  require_time(t);
  const auto& n = *node_;
  switch (n.kind) {
    case Kind::PointMass: return 0.0;
    case Kind::Weibull: return weibull_density(t, n.a, n.kappa);
    case Kind::Compound: return compound_density(n.a, n.b, n.kappa, t);
    case Kind::Mixture: {
      auto sum = 0.0;
      for (auto i = 0u; i < n.weights.size(); ++i) sum += n.weights[i] * n.components[i].density(t);
      return sum;
    }
    case Kind::Convolution: {
      auto j = static_cast<long>(std::floor((t - n.offset) / n.step + 0.5));
      if (j < 0 || j >= static_cast<long>(n.cumulative.size())) return 0.0;
      auto below = j == 0 ? 0.0 : n.cumulative[j - 1];
      return (n.cumulative[j] - below) / n.step;
    }
  }
  return 0.0;
}

auto HoldingLaw::cdf(double t) const -> double {
  require_time(t);
  const auto& n = *node_;
  switch (n.kind) {
    case Kind::PointMass: return 1.0;
    case Kind::Weibull: return weibull_cdf(t, n.a, n.kappa);
    case Kind::Compound: return compound_cdf(n.a, n.b, n.kappa, t);
    case Kind::Mixture: {
      auto sum = 0.0;
      for (auto i = 0u; i < n.weights.size(); ++i) sum += n.weights[i] * n.components[i].cdf(t);
      return std::min(1.0, sum);
    }
    case Kind::Convolution: {
      // Piecewise linear through (offset + (j + 1/2) step, cumulative[j]), starting from 0 at offset - step/2.
      auto x = (t - n.offset) / n.step + 0.5;
      if (x <= 0.0) return 0.0;
      auto j = static_cast<long>(std::floor(x));
      auto size = static_cast<long>(n.cumulative.size());
      if (j >= size) return n.cumulative.back();
      auto below = j == 0 ? 0.0 : n.cumulative[j - 1];
      return below + (x - static_cast<double>(j)) * (n.cumulative[j] - below);
    }
  }
  return 0.0;
}

auto HoldingLaw::mean() const -> Moment {
  const auto& n = *node_;
  switch (n.kind) {
    case Kind::PointMass: return Moment::finite(0.0);
    case Kind::Weibull: return Moment::finite(weibull_mean(n.a, n.kappa));
    case Kind::Compound: return compound_moments(n.a, n.b, n.kappa).mean;
    case Kind::Mixture: {
      auto sum = 0.0;
      for (auto i = 0u; i < n.weights.size(); ++i) {
        if (n.weights[i] == 0.0) continue;
        auto m = n.components[i].mean();
        if (!m.is_finite()) return Moment::infinite();
        sum += n.weights[i] * m.value();
      }
      return Moment::finite(sum);
    }
    case Kind::Convolution: {
      auto sum = 0.0;
      for (const auto& c : n.components) {
        auto m = c.mean();
        if (!m.is_finite()) return Moment::infinite();
        sum += m.value();
      }
      return Moment::finite(sum);
    }
  }
  return Moment::infinite();
}

auto HoldingLaw::variance() const -> Moment {
  const auto& n = *node_;
  switch (n.kind) {
    case Kind::PointMass: return Moment::finite(0.0);
    case Kind::Weibull: return Moment::finite(weibull_variance(n.a, n.kappa));
    case Kind::Compound: return compound_moments(n.a, n.b, n.kappa).variance;
    case Kind::Mixture: {
      auto m = mean();
      if (!m.is_finite()) return Moment::infinite();
      auto second = 0.0;
      for (auto i = 0u; i < n.weights.size(); ++i) {
        if (n.weights[i] == 0.0) continue;
        auto cm = n.components[i].mean();
        auto cv = n.components[i].variance();
        if (!cv.is_finite()) return Moment::infinite();
        second += n.weights[i] * (cv.value() + cm.value() * cm.value());
      }
      return Moment::finite(std::max(0.0, second - m.value() * m.value()));
    }
    case Kind::Convolution: {
      auto sum = 0.0;
      for (const auto& c : n.components) {
        auto v = c.variance();
        if (!v.is_finite()) return Moment::infinite();
        sum += v.value();
      }
      return Moment::finite(sum);
    }
  }
  return Moment::infinite();
}

auto HoldingLaw::sample(Rng& rng) const -> double {
  const auto& n = *node_;
  switch (n.kind) {
    case Kind::PointMass: return 0.0;
    case Kind::Weibull: return weibull_sample(n.a, n.kappa, rng);
    case Kind::Compound: return compound_sample(n.a, n.b, n.kappa, rng);
    case Kind::Mixture: {
      auto u = uniform01(rng);
      auto acc = 0.0;
      for (auto i = 0u; i < n.weights.size(); ++i) {
        acc += n.weights[i];
        if (u < acc) return n.components[i].sample(rng);
      }
      return n.components.back().sample(rng);
    }
    case Kind::Convolution: {
      auto sum = 0.0;
      for (const auto& c : n.components) sum += c.sample(rng);
      return sum;
    }
  }
  return 0.0;
}

auto HoldingLaw::quantile(double p) const -> double {
  if (!(p >= 0.0 && p < 1.0)) throw DomainError{"quantile level must lie in [0, 1)"};
  const auto& n = *node_;
  switch (n.kind) {
    case Kind::PointMass: return 0.0;
    case Kind::Weibull: return std::pow(-n.a * std::log1p(-p), 1.0 / n.kappa);
    case Kind::Compound: return std::pow(n.b * std::expm1(-std::log1p(-p) / n.a), 1.0 / n.kappa);
    default: break;
  }
  auto hi = 1.0;
  while (cdf(hi) < p) {
    hi *= 2.0;
    if (hi > 1e300) return std::numeric_limits<double>::infinity();
  }
  auto lo = 0.0;
  for (auto i = 0; i < 200 && hi - lo > 1e-12 * hi; ++i) {
    auto mid = 0.5 * (lo + hi);
    (cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

auto HoldingLaw::theta() const -> double { return node_->a; }
auto HoldingLaw::zeta() const -> double { return node_->a; }
auto HoldingLaw::beta() const -> double { return node_->b; }
auto HoldingLaw::kappa() const -> double { return node_->kappa; }
auto HoldingLaw::weights() const -> const std::vector<double>& { return node_->weights; }
auto HoldingLaw::components() const -> const std::vector<HoldingLaw>& { return node_->components; }
auto HoldingLaw::grid_step() const -> double { return node_->step; }
auto HoldingLaw::grid_size() const -> int { return static_cast<int>(node_->cumulative.size()); }

}  // namespace rdceg

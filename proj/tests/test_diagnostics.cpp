#include <gtest/gtest.h>

#include <cmath>

#include "rdceg/builtin_models.hpp"
#include "rdceg/diagnostics.hpp"
#include "rdceg/error.hpp"
#include "rdceg/search.hpp"
#include "rdceg/simulate.hpp"
#include "support.hpp"

using namespace rdceg;

namespace {

// r -> {yes, no}, both timed with shape `kappa`; the truth is (0.5, 0.5) with theta 2 on both edges.
auto coin(double kappa = 1.0) -> GroundTruthModel {
  TreeBuilder b;
  auto r = b.add_root("r");
  b.add_child(r, "yes", "", {.timed = true});
  b.add_child(r, "no", "", {.timed = true});
  TruthSpec spec;
  spec.id = "coin";
  spec.tree = b.build();
  spec.critical = {"r/yes", "r/no"};
  spec.stages = {{{"r"}, {{"yes", 0.5}, {"no", 0.5}}}};
  spec.clusters = {{{"r/yes"}, 2.0, kappa}, {{"r/no"}, 2.0, kappa}};
  return make_ground_truth(std::move(spec));
}

auto fit_truth_partition(const GroundTruthModel& truth, const SufficientStats& stats, const PriorConfig& config)
    -> FittedModel {
  auto priors = make_priors(truth.modified(), config, stats);
  return fit_partition(truth.modified(), priors, stats, truth.hued.staging, truth.hued.clustering);
}

}  // namespace

TEST(Hellinger, ClosedFormMatchesQuadratureOverTheSweep) {
  std::vector<double> grid;
  for (int i = 0; i <= 6; ++i) grid.push_back(0.1 * std::pow(1000.0, i / 6.0));
  int checked = 0;
  for (double kappa : {0.5, 1.0, 2.0, 3.0})
    for (double a : grid)
      for (double b : grid) {
        EXPECT_NEAR(hellinger_weibull(a, b, kappa), oracle::hellinger_quadrature(a, b, kappa), 1e-8)
            << a << " " << b << " " << kappa;
        ++checked;
      }
  EXPECT_EQ(checked, 196);
}

TEST(Hellinger, KnownValuesAndBounds) {
  EXPECT_NEAR(hellinger_weibull(1.0, 4.0, 1.0), std::sqrt(0.2), 1e-15);
  EXPECT_NEAR(hellinger_weibull(1.0, 4.0, 1.0), 0.4472, 1e-4);
  EXPECT_EQ(hellinger_weibull(3.0, 3.0, 2.0), 0.0);
  EXPECT_LT(hellinger_weibull(1e-6, 1e6, 1.0), 1.0);
  EXPECT_THROW(hellinger_weibull(0.0, 1.0, 1.0), DomainError);
}

TEST(Errors, EuclideanSituationalError) {
  auto truth = coin();
  auto stats = SufficientStats::empty(truth.modified().tree);
  stats.counts[0] = {5, 3};
  // alpha = (1, 1) from alpha_total 2, so the posterior mean is (6, 4) / 10.
  auto fit = fit_truth_partition(truth, stats, {.alpha_total = 2.0, .tau = 1.0});
  auto errs = situational_error(truth, fit);
  ASSERT_EQ(errs.size(), 1U);
  EXPECT_NEAR(errs[0].fitted[0], 0.6, 1e-15);
  EXPECT_NEAR(errs[0].distance, std::sqrt(0.02), 1e-15);
}

TEST(Errors, ZeroWhenFittedMeansEqualTheTruth) {
  auto truth = coin();
  auto stats = SufficientStats::empty(truth.modified().tree);
  stats.counts[0] = {4, 4};
  // zeta = alpha_e = 1 and beta = tau = 1; two holds summing to 3 give beta* / (zeta* - 1) = 4 / 2 = 2.
  stats.holds[0] = {1.0, 2.0};
  stats.holds[1] = {0.5, 2.5};
  auto fit = fit_truth_partition(truth, stats, {.alpha_total = 2.0, .tau = 1.0});
  auto r = error_report(truth, fit);
  EXPECT_EQ(r.situational, 0.0);
  EXPECT_NEAR(r.cluster, 0.0, 1e-7);
  EXPECT_EQ(r.edges[0].theta_fit, 2.0);
  for (const auto& name : builtin_names()) {
    auto m = builtin_model(name);
    auto self = error_report(m, m);
    EXPECT_EQ(self.situational, 0.0) << name;
    EXPECT_EQ(self.cluster, 0.0) << name;
  }
  auto other = error_report(builtin_model("smoking_a"), builtin_model("smoking_b"));
  EXPECT_GT(other.situational, 0.0);
  EXPECT_GT(other.cluster, 0.0);
}

TEST(Errors, MissingScaleEstimateCountsAsOne) {
  auto truth = coin();
  auto stats = SufficientStats::empty(truth.modified().tree);
  // zeta* = 1 + 0 leaves the posterior mean of theta undefined.
  auto fit = fit_truth_partition(truth, stats, {.alpha_total = 2.0, .tau = 1.0});
  auto r = error_report(truth, fit);
  EXPECT_FALSE(r.edges[0].theta_fit);
  EXPECT_EQ(r.edges[0].distance, 1.0);
  EXPECT_FALSE(r.notes.empty());
}

TEST(Errors, ShapeMismatchAndMisalignedTreesAreRejected) {
  auto truth = coin(1.0);
  auto stats = SufficientStats::empty(truth.modified().tree);
  auto fit = fit_truth_partition(coin(2.0), stats, {.alpha_total = 2.0, .tau = 1.0, .default_kappa = 2.0});
  EXPECT_THROW(cluster_error(truth, fit), ValidationError);
  auto falls = builtin_model("falls");
  EXPECT_THROW(situational_error(falls, fit), ValidationError);
}

TEST(Errors, CompoundMeanEstimate) {
  auto truth = coin(2.0);
  auto stats = SufficientStats::empty(truth.modified().tree);
  stats.holds[0] = {1.0, 1.5, 2.0, 0.5};
  stats.holds[1] = {1.0, 1.5, 2.0, 0.5};
  auto fit = fit_truth_partition(truth, stats, {.alpha_total = 2.0, .tau = 1.0, .default_kappa = 2.0});
  auto errs = cluster_error(truth, fit, ScaleEstimate::CompoundMean);
  const auto& p = fit.cluster_params[0];
  double mean = oracle::compound_mean_formula(p.zeta_post, p.beta_post, 2.0);
  ASSERT_TRUE(errs[0].theta_fit);
  // The Weibull with the fitted scale has the compound mean.
  EXPECT_NEAR(std::sqrt(*errs[0].theta_fit) * std::tgamma(1.5), mean, 1e-12);
}

TEST(LeaveOneOut, SplitGainIsTheNegatedMergeDelta) {
  auto truth = builtin_model("falls");
  auto data = simulate_population(truth, 1500, 8);
  auto stats = sufficient_stats(data, truth.modified());
  auto fit = fit_truth_partition(truth, stats, truth.spec.search.priors);
  ScoreContext ctx{fit.hued.tree(), fit.priors, stats};
  auto rep = leave_one_out(fit, stats);
  ASSERT_FALSE(rep.records.empty());
  const auto& tree = fit.hued.tree();
  for (const auto& r : rep.records) {
    std::vector<int> rest, self;
    double delta = 0.0;
    if (r.kind == CellKind::Stage) {
      for (const auto& m : r.members) (m == r.element ? self : rest).push_back(tree.vertex(m));
      delta = ctx.stage_merge_delta(rest, self);
    } else {
      for (const auto& m : r.members) (m == r.element ? self : rest).push_back(tree.edge_by_key(m));
      delta = ctx.cluster_merge_delta(rest, self);
    }
    EXPECT_NEAR(r.split_gain, -delta, 1e-9 * (1.0 + std::abs(r.intact_score))) << r.element;
    EXPECT_TRUE(std::isfinite(r.intact_score));
    for (const auto& sd : r.sd) {
      if (sd.is_finite()) {
        EXPECT_GE(sd.value(), 0.0);
      }
    }
  }
}

TEST(LeaveOneOut, GeneratingCellsScoreHighestIntact) {
  auto truth = builtin_model("falls");
  auto data = simulate_population(truth, 2500, 21);
  auto stats = sufficient_stats(data, truth.modified());
  auto fit = fit_truth_partition(truth, stats, truth.spec.search.priors);
  auto rep = leave_one_out(fit, stats);
  for (const auto& r : rep.records) EXPECT_LT(r.split_gain, 0.0) << r.element;
}

TEST(LeaveOneOut, IdenticalCountsAreNotFlagged) {
  auto truth = builtin_model("smoking_b");
  auto stats = SufficientStats::empty(truth.modified().tree);
  const auto& t = truth.modified().tree;
  for (const auto* s : {"with_services", "without_services"}) {
    stats.counts[t.vertex(s)] = {25, 75};
    stats.holds[t.edge_by_key(std::string{s} + "/quit")] = std::vector<double>(25, 90.0);
    stats.holds[t.edge_by_key(std::string{s} + "/relapse")] = std::vector<double>(75, 25.0);
  }
  stats.counts[t.root()] = {100, 100};
  auto fit = fit_truth_partition(truth, stats, truth.spec.search.priors);
  auto rep = leave_one_out(fit, stats);
  ASSERT_FALSE(rep.records.empty());
  for (const auto& r : rep.records) {
    EXPECT_LT(r.split_gain, 0.0) << r.element;
    EXPECT_FALSE(r.outside_band) << r.element;
    EXPECT_FALSE(r.low_information);
  }
  EXPECT_FALSE(rep.notes.empty());  // the root stage is a singleton
}

TEST(LeaveOneOut, EmptyElementIsLowInformation) {
  auto truth = builtin_model("smoking_b");
  auto stats = SufficientStats::empty(truth.modified().tree);
  const auto& t = truth.modified().tree;
  stats.counts[t.vertex("with_services")] = {10, 30};
  stats.counts[t.root()] = {40, 0};
  auto fit = fit_truth_partition(truth, stats, truth.spec.search.priors);
  auto rep = leave_one_out(fit, stats);
  bool seen = false;
  for (const auto& r : rep.records) {
    if (r.element != "without_services") continue;
    seen = true;
    EXPECT_TRUE(r.low_information);
    EXPECT_FALSE(r.outside_band);
    EXPECT_TRUE(r.observed.empty());
  }
  EXPECT_TRUE(seen);
}

TEST(LeaveOneOut, CsvHasOneRowPerRecord) {
  auto truth = builtin_model("smoking_b");
  auto data = simulate_population(truth, 200, 1);
  auto stats = sufficient_stats(data, truth.modified());
  auto fit = fit_truth_partition(truth, stats, truth.spec.search.priors);
  auto rep = leave_one_out(fit, stats);
  auto csv = loo_csv(rep);
  EXPECT_GE(static_cast<std::size_t>(std::ranges::count(csv, '\n')), rep.records.size() + 1);
  auto err = error_report_csv(error_report(truth, fit));
  EXPECT_EQ(err.substr(0, err.find('\n')), "kind,element,distance");
}

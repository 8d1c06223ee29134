#include <gtest/gtest.h>

#include "rdceg/builtin_models.hpp"
#include "rdceg/error.hpp"
#include "rdceg/search.hpp"
#include "rdceg/serialize.hpp"
#include "rdceg/simulate.hpp"

using namespace rdceg;

TEST(Serialize, TreesRoundTrip) {
  for (const auto& name : builtin_names()) {
    auto spec = builtin_truth(name);
    auto back = tree_from_json(Json::parse(tree_to_json(spec.tree).dump()));
    EXPECT_EQ(back, spec.tree) << name;
  }
}

TEST(Serialize, TruthSpecsRoundTrip) {
  for (const auto& name : builtin_names()) {
    auto spec = builtin_truth(name);
    auto j = truth_spec_to_json(spec);
    auto back = truth_spec_from_json(Json::parse(j.dump()));
    EXPECT_EQ(truth_spec_to_json(back), j) << name;
    auto a = make_ground_truth(spec), b = make_ground_truth(back);
    EXPECT_EQ(a.hued.staging, b.hued.staging);
    EXPECT_EQ(a.hued.clustering.clusters, b.hued.clustering.clusters);
    EXPECT_EQ(a.stage_probabilities, b.stage_probabilities);
    EXPECT_EQ(a.cluster_theta, b.cluster_theta);
  }
}

TEST(Serialize, SearchConfigRoundTrips) {
  auto config = builtin_truth("falls").search;
  config.priors.alpha_total = 0.5;
  config.priors.tau = 10.0;
  config.priors.censoring = CensoringMode::Survival;
  config.max_depth = 3;
  auto j = search_config_to_json(config);
  EXPECT_EQ(search_config_to_json(search_config_from_json(Json::parse(j.dump()))), j);
  EXPECT_THROW(search_config_from_json(Json::parse(R"({"hyperstages": "nope"})")), ValidationError);
}

TEST(Serialize, FittedModelsRoundTrip) {
  auto truth = builtin_model("falls");
  auto data = simulate_population(truth, 800, 4);
  auto fit = select_model(data, truth.spec.tree, truth.spec.critical, truth.spec.search);
  auto j = fitted_to_json(fit);
  auto back = fitted_from_json(Json::parse(j.dump()));
  EXPECT_EQ(back.hued.staging, fit.hued.staging);
  EXPECT_EQ(back.hued.clustering.clusters, fit.hued.clustering.clusters);
  EXPECT_EQ(back.positions, fit.positions);
  EXPECT_EQ(back.log_score, fit.log_score);
  ASSERT_EQ(back.stage_params.size(), fit.stage_params.size());
  for (std::size_t k = 0; k < fit.stage_params.size(); ++k) EXPECT_EQ(back.stage_params[k].alpha_post, fit.stage_params[k].alpha_post);
  for (std::size_t k = 0; k < fit.cluster_params.size(); ++k) {
    EXPECT_EQ(back.cluster_params[k].zeta_post, fit.cluster_params[k].zeta_post);
    EXPECT_EQ(back.cluster_params[k].beta_post, fit.cluster_params[k].beta_post);
  }
  EXPECT_EQ(rdceg_to_json(back.rdceg), rdceg_to_json(fit.rdceg));
  EXPECT_EQ(fitted_to_json(back).dump(), j.dump());
}

TEST(Serialize, MalformedInputIsAValidationError) {
  EXPECT_THROW(tree_from_json(Json::parse(R"({"children": []})")), ValidationError);
  EXPECT_THROW(truth_spec_from_json(Json::parse(R"({"id": "x"})")), ValidationError);
  EXPECT_THROW(fitted_from_json(Json::parse("[]")), ValidationError);
  EXPECT_THROW(read_json_file("/nonexistent/file.json"), ValidationError);
}

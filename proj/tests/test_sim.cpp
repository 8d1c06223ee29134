#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "rdceg/builtin_models.hpp"
#include "rdceg/error.hpp"
#include "rdceg/simulate.hpp"
#include "support.hpp"

using namespace rdceg;

namespace {

// r -a-> x -b-> y -c-> end, every edge timed.
auto chain(double theta, double kappa) -> GroundTruthModel {
  TreeBuilder b;
  auto r = b.add_root("r");
  auto x = b.add_child(r, "a", "x", {.timed = true});
  auto y = b.add_child(x, "b", "y", {.timed = true});
  b.add_child(y, "c", "end", {.timed = true});
  TruthSpec spec;
  spec.id = "chain";
  spec.tree = b.build();
  spec.critical = {"end"};
  spec.clusters = {{{"r/a"}, theta, kappa}, {{"x/b"}, theta, kappa}, {{"y/c"}, theta, kappa}};
  return make_ground_truth(std::move(spec));
}

auto to_text(const Dataset& d, DataFormat f) -> std::string {
  std::ostringstream out;
  write_dataset(out, d, f);
  return out.str();
}

auto from_text(const std::string& s, DataFormat f) -> Dataset {
  std::istringstream in(s);
  return read_dataset(in, f);
}

}  // namespace

TEST(Simulate, DeterministicChainGivesThreeRecords) {
  auto model = chain(2.0, 1.0);
  auto data = simulate_population(model, 200, 4);
  ASSERT_EQ(data.individuals.size(), 200U);
  for (const auto& obs : data.individuals) {
    ASSERT_EQ(obs.steps.size(), 3U);
    EXPECT_EQ(obs.terminal, Terminal::Critical);
    for (const auto& s : obs.steps) EXPECT_TRUE(s.hold && *s.hold > 0.0);
  }
}

TEST(Simulate, SameSeedIsByteIdenticalAcrossJobs) {
  auto model = builtin_model("falls");
  auto a = to_text(simulate_population(model, 500, 7, 1), DataFormat::Jsonl);
  auto b = to_text(simulate_population(model, 500, 7, 4), DataFormat::Jsonl);
  auto c = to_text(simulate_population(model, 500, 7, 1), DataFormat::Jsonl);
  auto d = to_text(simulate_population(model, 500, 8, 1), DataFormat::Jsonl);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  EXPECT_NE(a, d);
}

TEST(Simulate, RejectsEmptyPopulation) {
  EXPECT_THROW(simulate_population(builtin_model("falls"), 0, 1), ValidationError);
}

TEST(Simulate, FallsEdgeProportionsWithinThreeStandardErrors) {
  auto model = builtin_model("falls");
  auto data = simulate_population(model, 2500, 2024);
  auto stats = sufficient_stats(data, model.modified());
  const auto& tree = model.modified().tree;
  int checked = 0;
  for (auto v : tree.situations()) {
    const auto& counts = stats.counts[v];
    std::int64_t n = 0;
    for (auto c : counts) n += c;
    if (n == 0 || counts.size() < 2) continue;
    auto p = model.situation_probabilities(v);
    for (std::size_t m = 0; m < counts.size(); ++m) {
      double se = std::sqrt(p[m] * (1.0 - p[m]) / static_cast<double>(n));
      double observed = static_cast<double>(counts[m]) / static_cast<double>(n);
      EXPECT_LE(std::abs(observed - p[m]), 3.0 * se) << tree.name(v) << " " << tree.edge(tree.out_edges(v)[m]).label;
      ++checked;
    }
  }
  EXPECT_GT(checked, 20);
}

TEST(Simulate, HoldsPassAndersonDarlingAgainstTheGeneratingWeibull) {
  const double theta = 3.0, kappa = 2.0;
  auto model = chain(theta, kappa);
  auto data = simulate_population(model, 10000, 99);
  auto stats = sufficient_stats(data, model.modified());
  for (int e = 0; e < model.modified().tree.num_edges(); ++e) {
    auto h = stats.holds[e];
    ASSERT_EQ(h.size(), 10000U);
    std::ranges::sort(h);
    const double n = static_cast<double>(h.size());
    double a2 = -n;
    for (std::size_t i = 0; i < h.size(); ++i) {
      double lo = 1.0 - std::exp(-std::pow(h[i], kappa) / theta);
      double hi = 1.0 - std::exp(-std::pow(h[h.size() - 1 - i], kappa) / theta);
      a2 -= (2.0 * static_cast<double>(i) + 1.0) / n * (std::log(lo) + std::log1p(-hi));
    }
    EXPECT_LT(a2, 3.857) << "edge " << e;  // 1% critical value, fully specified null
  }
}

TEST(Simulate, DropoutFreeModelsEndCriticalOrCensored) {
  auto data = simulate_population(chain(1.0, 1.0), 100, 1);
  for (const auto& obs : data.individuals) EXPECT_NE(obs.terminal, Terminal::DroppedOut);
  auto model = builtin_model("smoking_a");
  model.spec.dropout.clear();
  auto plain = make_ground_truth(model.spec);
  for (const auto& obs : simulate_population(plain, 500, 1).individuals) EXPECT_NE(obs.terminal, Terminal::DroppedOut);
}

TEST(Simulate, SlicesBeyondTheLimitAreCensored) {
  auto spec = builtin_truth("smoking_a");
  spec.max_slices = 1;
  auto model = make_ground_truth(spec);
  auto data = simulate_population(model, 500, 3);
  int censored = 0;
  for (const auto& obs : data.individuals) {
    int relapses = 0;
    for (const auto& s : obs.steps) relapses += s.label == "relapse";
    EXPECT_LE(relapses, 1);
    censored += obs.terminal == Terminal::Censored;
  }
  EXPECT_GT(censored, 0);
}

TEST(Dataset, RoundTripsPreserveStatistics) {
  auto model = builtin_model("smoking_a");
  auto data = simulate_population(model, 300, 5);
  auto stats = sufficient_stats(data, model.modified());
  for (auto f : {DataFormat::Jsonl, DataFormat::Csv}) {
    auto back = from_text(to_text(data, f), f);
    EXPECT_EQ(back, data);
    EXPECT_EQ(sufficient_stats(back, model.modified()), stats);
  }
}

TEST(Dataset, EmptyInputGivesZeroStatistics) {
  auto model = builtin_model("smoking_a");
  for (auto f : {DataFormat::Jsonl, DataFormat::Csv}) {
    auto data = from_text("", f);
    EXPECT_TRUE(data.individuals.empty());
    auto stats = sufficient_stats(data, model.modified());
    EXPECT_EQ(stats, SufficientStats::empty(model.modified().tree));
    EXPECT_EQ(stats.total_transitions(), 0);
  }
}

TEST(Dataset, HandWrittenFixtureMatchesTally) {
  auto model = builtin_model("smoking_a");
  const auto& t = model.modified().tree;
  auto data = from_text(
      R"({"id":"p1","steps":[{"label":"services"},{"label":"quit","hold":10}],"terminal":"critical"}
{"id":"p2","steps":[{"label":"no_services"},{"label":"relapse","hold":4},{"label":"services"},{"label":"quit","hold":6}],"terminal":"critical"}
{"id":"p3","steps":[{"label":"no_services"},{"label":"relapse","hold":2.5,"censored":true}],"terminal":"censored"}
)",
      DataFormat::Jsonl);
  auto stats = sufficient_stats(data, model.modified());
  EXPECT_EQ(stats.counts[t.root()], (std::vector<std::int64_t>{2, 2}));
  EXPECT_EQ(stats.counts[t.vertex("with_services")], (std::vector<std::int64_t>{2, 0}));
  EXPECT_EQ(stats.counts[t.vertex("without_services")], (std::vector<std::int64_t>{0, 1}));
  EXPECT_EQ(stats.holds[t.edge_by_key("with_services/quit")], (std::vector<double>{10.0, 6.0}));
  EXPECT_EQ(stats.holds[t.edge_by_key("without_services/relapse")], (std::vector<double>{4.0}));
  EXPECT_EQ(stats.censored[t.edge_by_key("without_services/relapse")], (std::vector<double>{2.5}));
}

TEST(Dataset, BadRowsAreReportedWithTheirLine) {
  auto model = builtin_model("smoking_a");
  auto bad_label = from_text(
      "{\"id\":\"p1\",\"steps\":[{\"label\":\"services\"}],\"terminal\":\"censored\"}\n"
      "{\"id\":\"p2\",\"steps\":[{\"label\":\"teleport\"}],\"terminal\":\"censored\"}\n",
      DataFormat::Jsonl);
  try {
    sufficient_stats(bad_label, model.modified());
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string{e.what()}.find("p2"), std::string::npos) << e.what();
    EXPECT_NE(std::string{e.what()}.find("2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(
      from_text("id,step_index,label,hold,terminal\np1,0,services,,censored\np1,1,quit,-3,critical\n", DataFormat::Csv),
      DataError);
  EXPECT_THROW(from_text("{\"id\":\"p1\",\"steps\":[{\"label\":\"services\"}],\"terminal\"\n", DataFormat::Jsonl),
               DataError);
}

TEST(Dataset, StatisticsAreAdditiveOverConcatenation) {
  auto model = builtin_model("falls");
  auto a = simulate_population(model, 300, 1);
  auto b = simulate_population(model, 200, 2);
  auto both = a;
  both.individuals.insert(both.individuals.end(), b.individuals.begin(), b.individuals.end());
  auto sa = sufficient_stats(a, model.modified());
  sa += sufficient_stats(b, model.modified());
  EXPECT_EQ(sufficient_stats(both, model.modified()), sa);
}

TEST(Builtins, ProbabilitiesAndScalesAreValid) {
  for (const auto& name : builtin_names()) {
    auto model = builtin_model(name);
    for (const auto& p : model.stage_probabilities) {
      double total = 0.0;
      for (auto x : p) {
        EXPECT_GE(x, 0.0);
        total += x;
      }
      EXPECT_NEAR(total, 1.0, 1e-12) << name;
    }
    for (auto th : model.cluster_theta) EXPECT_GT(th, 0.0) << name;
  }
}

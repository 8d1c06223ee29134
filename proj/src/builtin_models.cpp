#include "rdceg/builtin_models.hpp"

#include <cmath>

#include "rdceg/error.hpp"

namespace rdceg {
namespace {

constexpr auto timed = EdgeFlags{.timed = true};

// Search defaults shared by the generators: kappa per edge from the truth clusters, pools by
// label set unless given.
void attach_kappa(TruthSpec& spec) {
  for (const auto& c : spec.clusters) {
    for (const auto& key : c.edges) spec.search.priors.edge_kappa[key] = c.kappa;
  }
}

auto falls() -> TruthSpec {
  auto b = TreeBuilder{};
  auto root = b.add_root("referral");
  auto c_assess = b.add_child(root, "community", "community_assess");
  auto m_assess = b.add_child(root, "communal", "communal_assess");
  auto c_high = b.add_child(c_assess, "high", "community_high");
  auto c_low = b.add_child(c_assess, "low", "community_low");
  auto m_low = b.add_child(m_assess, "low", "communal_low");
  auto m_high = b.add_child(m_assess, "high", "communal_high");

  auto c_tr = b.add_child(c_high, "treated", "community_treated");
  auto c_un = b.add_child(c_high, "untreated", "community_untreated");
  auto low_branch = [&](int low, const std::string& fell_name, int assess) {
    auto fell = b.add_child(low, "fall", fell_name, timed);
    b.add_child(low, "no_fall");
    b.add_repeat(fell, "reassess", assess, timed);
    b.add_child(fell, "dropout");
  };
  low_branch(c_low, "community_low_fell", c_assess);
  low_branch(m_low, "communal_low_fell", m_assess);
  auto m_tr = b.add_child(m_high, "treated", "communal_treated");
  auto m_un = b.add_child(m_high, "untreated", "communal_untreated");

  auto fall = [&](int at, const std::string& fell_name) {
    auto fell = b.add_child(at, "fall", fell_name, timed);
    b.add_child(at, "no_fall");
    return fell;
  };
  auto c_tr_fell = fall(c_tr, "community_treated_fell");
  auto c_un_fell = fall(c_un, "community_untreated_fell");
  auto m_tr_fell = fall(m_tr, "communal_treated_fell");
  auto m_un_fell = fall(m_un, "communal_untreated_fell");

  // After a fall in a communal establishment.
  auto communal_after = [&](int fell, int again) {
    b.add_repeat(fell, "continue", again, timed);
    b.add_child(fell, "complication", "", timed);
    b.add_child(fell, "dropout");
  };
  // After a fall in the community: as above, plus moving into a communal establishment, which
  // replays the communal subtree for the same treatment arm.
  auto community_after = [&](int fell, int again, const std::string& moved, const std::string& moved_fell,
                             int communal_again) {
    b.add_repeat(fell, "continue", again, timed);
    auto mv = b.add_child(fell, "move", moved, timed);
    b.add_child(fell, "complication", "", timed);
    b.add_child(fell, "dropout");
    communal_after(fall(mv, moved_fell), communal_again);
  };
  community_after(c_tr_fell, c_tr, "moved_treated", "moved_treated_fell", m_tr);
  community_after(c_un_fell, c_un, "moved_untreated", "moved_untreated_fell", m_un);
  communal_after(m_tr_fell, m_tr);
  communal_after(m_un_fell, m_un);

  auto spec = TruthSpec{.id = "falls", .tree = b.build()};
  spec.note = "synthetic generator for the falls referral structure";
  for (auto leaf : spec.tree.leaves()) {
    const auto& name = spec.tree.name(leaf);
    if (!name.ends_with("/dropout")) spec.critical.insert(name);
  }

  auto no_fall = [](double p) { return std::map<std::string, double>{{"fall", p}, {"no_fall", 1.0 - p}}; };
  spec.stages = {
      {{"referral"}, {{"community", 0.6}, {"communal", 0.4}}},
      {{"community_assess"}, {{"high", 0.5}, {"low", 0.5}}},
      {{"communal_assess"}, {{"high", 0.7}, {"low", 0.3}}},
      {{"community_high"}, {{"treated", 0.6}, {"untreated", 0.4}}},
      {{"communal_high"}, {{"treated", 0.75}, {"untreated", 0.25}}},
      {{"community_low", "communal_low"}, no_fall(0.2)},
      {{"community_treated", "communal_treated", "moved_treated"}, no_fall(0.5)},
      {{"community_untreated"}, no_fall(0.75)},
      {{"communal_untreated", "moved_untreated"}, no_fall(0.95)},
      {{"community_treated_fell"}, {{"continue", 0.5}, {"move", 0.35}, {"complication", 0.15}}},
      {{"community_untreated_fell"}, {{"continue", 0.2}, {"move", 0.5}, {"complication", 0.3}}},
      {{"communal_treated_fell", "moved_treated_fell"}, {{"continue", 0.8}, {"complication", 0.2}}},
      {{"communal_untreated_fell", "moved_untreated_fell"}, {{"continue", 0.45}, {"complication", 0.55}}},
  };
  // Scales s with theta = s^kappa.
  auto cluster = [](std::vector<std::string> edges, double scale, double kappa) {
    return TruthCluster{std::move(edges), std::pow(scale, kappa), kappa};
  };
  spec.clusters = {
      // assessment to fall, low risk
      cluster({"community_low/fall", "communal_low/fall"}, 1000.0, 1.0),
      // fall to reassessment, low risk
      cluster({"community_low_fell/reassess", "communal_low_fell/reassess"}, 30.0, 2.0),
      // treatment to fall, treated high risk
      cluster({"community_treated/fall", "communal_treated/fall", "moved_treated/fall"}, 300.0, 1.0),
      // assessment to fall, untreated high risk
      cluster({"community_untreated/fall", "communal_untreated/fall", "moved_untreated/fall"}, 90.0, 1.0),
      // time since last fall
      cluster({"community_treated_fell/continue", "community_untreated_fell/continue",
               "communal_treated_fell/continue", "communal_untreated_fell/continue",
               "moved_treated_fell/continue", "moved_untreated_fell/continue"},
              200.0, 1.5),
      // fall to moving into a communal establishment
      cluster({"community_treated_fell/move", "community_untreated_fell/move"}, 100.0, 2.0),
      // fall to leaving through complications
      cluster({"community_treated_fell/complication", "community_untreated_fell/complication",
               "communal_treated_fell/complication", "communal_untreated_fell/complication",
               "moved_treated_fell/complication", "moved_untreated_fell/complication"},
              50.0, 1.5),
  };
  spec.dropout = {
      {"community_low_fell", 0.03},      {"communal_low_fell", 0.03},
      {"community_treated_fell", 0.03}, {"community_untreated_fell", 0.03},
      {"communal_treated_fell", 0.03},  {"communal_untreated_fell", 0.03},
      {"moved_treated_fell", 0.03},     {"moved_untreated_fell", 0.03},
  };
  attach_kappa(spec);
  return spec;
}

auto epilepsy_like() -> TruthSpec {
  const auto ages = std::vector<std::string>{"group1", "group2", "group3"};
  const auto eegs = std::vector<std::string>{"abnormal", "normal", "unknown"};
  const auto arms = std::vector<std::string>{"immediate", "deferred"};

  auto b = TreeBuilder{};
  auto root = b.add_root("randomized");
  auto first_sit = std::vector<std::string>{};
  auto second_sit = std::vector<std::string>{};
  auto treatment_sit = std::vector<std::string>{};
  // Handles are created level by level so that breadth-first ids follow age, EEG, arm.
  auto age_nodes = std::vector<int>{};
  for (const auto& a : ages) age_nodes.push_back(b.add_child(root, a, a));
  auto eeg_nodes = std::vector<int>{};
  for (auto i = 0; i < 3; ++i) {
    for (const auto& e : eegs) {
      auto name = ages[i] + "_" + e;
      eeg_nodes.push_back(b.add_child(age_nodes[i], e, name));
      treatment_sit.push_back(name);
    }
  }
  auto arm_nodes = std::vector<int>{};
  for (auto j = 0; j < 9; ++j) {
    for (const auto& t : arms) {
      auto name = treatment_sit[j] + "_" + t;
      arm_nodes.push_back(b.add_child(eeg_nodes[j], t, name));
      first_sit.push_back(name);
    }
  }
  auto second_nodes = std::vector<int>{};
  for (auto k = 0; k < 18; ++k) {
    auto name = first_sit[k] + "_seized";
    second_nodes.push_back(b.add_child(arm_nodes[k], "seizure", name, {.timed = true, .slice_boundary = true}));
    b.add_child(arm_nodes[k], "no_more");
    second_sit.push_back(name);
  }
  for (auto k = 0; k < 18; ++k) {
    b.add_child(second_nodes[k], "seizure", "", timed);
    b.add_child(second_nodes[k], "no_more");
  }

  auto spec = TruthSpec{.id = "epilepsy_like", .tree = b.build()};
  spec.note = "synthetic two-passage-slice generator: age x EEG x treatment";
  for (auto leaf : spec.tree.leaves()) spec.critical.insert(spec.tree.name(leaf));

  auto seizure = [](double p) { return std::map<std::string, double>{{"seizure", p}, {"no_more", 1.0 - p}}; };
  spec.stages = {
      {{"randomized"}, {{"group1", 0.35}, {"group2", 0.35}, {"group3", 0.3}}},
      {{"group1"}, {{"abnormal", 0.2}, {"normal", 0.6}, {"unknown", 0.2}}},
      {{"group2"}, {{"abnormal", 0.45}, {"normal", 0.35}, {"unknown", 0.2}}},
      {{"group3"}, {{"abnormal", 0.7}, {"normal", 0.1}, {"unknown", 0.2}}},
      {treatment_sit, {{"immediate", 0.5}, {"deferred", 0.5}}},
  };
  // First seizure: raised risk for abnormal EEG on deferred treatment.
  auto low = std::vector<std::string>{};
  auto high = std::vector<std::string>{};
  for (const auto& s : first_sit) (s.find("_abnormal_deferred") != std::string::npos ? high : low).push_back(s);
  spec.stages.push_back({low, seizure(0.4)});
  spec.stages.push_back({high, seizure(0.8)});
  spec.stages.push_back({second_sit, seizure(0.55)});

  auto first_immediate = std::vector<std::string>{};
  auto first_deferred = std::vector<std::string>{};
  for (const auto& s : first_sit) {
    (s.ends_with("_immediate") ? first_immediate : first_deferred).push_back(s + "/seizure");
  }
  auto second_long = std::vector<std::string>{};
  auto second_short = std::vector<std::string>{};
  for (const auto& s : second_sit) {
    auto slow = s == "group1_normal_immediate_seized" || s == "group2_abnormal_immediate_seized" ||
                s == "group3_normal_immediate_seized";
    (slow ? second_long : second_short).push_back(s + "/seizure");
  }
  spec.clusters = {
      {first_immediate, 360.0, 1.0},
      {first_deferred, 594.0, 1.0},
      {second_short, 186.0, 1.0},
      {second_long, 584.0, 1.0},
  };
  spec.max_slices = 2;
  // First and second seizures are different variables; keep them in separate pools.
  for (const auto& cell : {treatment_sit, first_sit, second_sit}) spec.search.hyperstages.push_back(cell);
  spec.search.hyperstages.push_back({"group1", "group2", "group3"});
  auto first_edges = first_immediate;
  first_edges.insert(first_edges.end(), first_deferred.begin(), first_deferred.end());
  auto second_edges = second_short;
  second_edges.insert(second_edges.end(), second_long.begin(), second_long.end());
  spec.search.hyperclusters = {first_edges, second_edges};
  // With 18 sparse cells per seizure pool, larger phantom totals split homogeneous pools.
  spec.search.priors.alpha_total = 0.05;
  attach_kappa(spec);
  return spec;
}

auto smoking(bool dependent) -> TruthSpec {
  auto b = TreeBuilder{};
  auto root = b.add_root("registered");
  for (const auto& [label, name] : {std::pair{"services", "with_services"}, std::pair{"no_services", "without_services"}}) {
    auto attempt = b.add_child(root, label, name);
    b.add_child(attempt, "quit", "", timed);
    b.add_repeat(attempt, "relapse", root, timed);
    b.add_child(attempt, "deregister");
  }
  auto spec = TruthSpec{.id = dependent ? "smoking_a" : "smoking_b", .tree = b.build()};
  spec.note = dependent ? "synthetic parameters, quitting depends on service use"
                        : "synthetic parameters, quitting independent of service use";
  spec.critical = {"with_services/quit", "without_services/quit"};
  auto attempt = [](double quit) { return std::map<std::string, double>{{"quit", quit}, {"relapse", 1.0 - quit}}; };
  spec.stages.push_back({{"registered"}, {{"services", 0.4}, {"no_services", 0.6}}});
  if (dependent) {
    spec.stages.push_back({{"with_services"}, attempt(0.35)});
    spec.stages.push_back({{"without_services"}, attempt(0.15)});
    spec.clusters = {
        {{"with_services/quit"}, 60.0, 1.0},
        {{"without_services/quit"}, 120.0, 1.0},
        {{"with_services/relapse"}, 30.0, 1.0},
        {{"without_services/relapse"}, 20.0, 1.0},
    };
  } else {
    spec.stages.push_back({{"with_services", "without_services"}, attempt(0.25)});
    spec.clusters = {
        {{"with_services/quit", "without_services/quit"}, 90.0, 1.0},
        {{"with_services/relapse", "without_services/relapse"}, 25.0, 1.0},
    };
  }
  spec.dropout = {{"with_services", 0.05}, {"without_services", 0.05}};
  spec.max_slices = 20;
  attach_kappa(spec);
  return spec;
}

}  // namespace

auto builtin_names() -> std::vector<std::string> { return {"falls", "epilepsy_like", "smoking_a", "smoking_b"}; }

auto builtin_truth(std::string_view name) -> TruthSpec {
  if (name == "falls") return falls();
  if (name == "epilepsy_like") return epilepsy_like();
  if (name == "smoking_a") return smoking(true);
  if (name == "smoking_b") return smoking(false);
  throw ValidationError{"unknown builtin model '" + std::string{name} + "'"};
}

auto builtin_model(std::string_view name) -> GroundTruthModel { return make_ground_truth(builtin_truth(name)); }

}  // namespace rdceg

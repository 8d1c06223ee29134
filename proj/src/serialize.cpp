#include "rdceg/serialize.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

#include "rdceg/error.hpp"

namespace rdceg {

namespace {

auto moment_json(const Moment& m) -> Json { return m.is_finite() ? Json(m.value()) : Json("inf"); }

template <typename T>
auto get_or(const Json& j, const char* key, T fallback) -> T {
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? fallback : it->get<T>();
}

auto require(const Json& j, const char* key) -> const Json& {
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError{fmt::format("missing field '{}'", key)};
  return *it;
}

// Runs f, turning JSON type errors into ValidationError.
template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw ValidationError{fmt::format("malformed {}: {}", what, e.what())};
  }
}

auto names_of(const EventTree& tree, const std::vector<int>& vs) -> Json {
  auto out = Json::array();
  for (auto v : vs) out.push_back(tree.name(v));
  return out;
}

auto keys_of(const EventTree& tree, const std::vector<int>& es) -> Json {
  auto out = Json::array();
  for (auto e : es) out.push_back(tree.edge_key(e));
  return out;
}

auto node_json(const EventTree& tree, Vertex_id v) -> Json {
  auto j = Json{{"name", tree.name(v)}};
  if (tree.is_leaf(v)) return j;
  auto children = Json::array();
  for (auto e : tree.out_edges(v)) {
    const auto& edge = tree.edge(e);
    auto c = Json{{"label", edge.label}};
    if (edge.timed) c["timed"] = true;
    if (tree.is_repeat(edge.child)) {
      c["repeat"] = tree.name(tree.repeat_target(edge.child));
    } else {
      if (edge.slice_boundary) c["slice_boundary"] = true;
      c["child"] = node_json(tree, edge.child);
    }
    children.push_back(std::move(c));
  }
  j["children"] = std::move(children);
  return j;
}

void add_children(TreeBuilder& b, int handle, const Json& node) {
  auto it = node.find("children");
  if (it == node.end()) return;
  for (const auto& c : *it) {
    auto label = require(c, "label").get<std::string>();
    EdgeFlags flags{get_or(c, "timed", false), get_or(c, "slice_boundary", false)};
    if (c.contains("repeat")) {
      b.add_repeat(handle, label, c["repeat"].get<std::string>(), flags);
      continue;
    }
    auto child = c.contains("child") ? c["child"] : Json::object();
    auto h = b.add_child(handle, label, get_or(child, "name", std::string{}), flags);
    add_children(b, h, child);
  }
}

auto censoring_name(CensoringMode m) -> std::string { return m == CensoringMode::Survival ? "survival" : "ignore"; }

auto parse_censoring(const std::string& s) -> CensoringMode {
  if (s == "ignore") return CensoringMode::Ignore;
  if (s == "survival") return CensoringMode::Survival;
  throw ValidationError{fmt::format("unknown censoring mode '{}'", s)};
}

auto kind_name(CutKind k) -> std::string { return cut_kind_name(k); }

auto rolled_names(const RolledCeg& g, const std::vector<int>& vs) -> Json {
  auto out = Json::array();
  for (auto v : vs) out.push_back(g.vertex(v).name);
  return out;
}

}  // namespace

auto tree_to_json(const EventTree& tree) -> Json { return node_json(tree, tree.root()); }

auto tree_from_json(const Json& j) -> EventTree {
  return guarded("tree", [&] {
    TreeBuilder b;
    auto root = b.add_root(require(j, "name").get<std::string>());
    add_children(b, root, j);
    return b.build();
  });
}

auto search_config_to_json(const SearchConfig& c) -> Json {
  auto priors = Json{{"default_kappa", c.priors.default_kappa},
                     {"edge_kappa", c.priors.edge_kappa},
                     {"censoring", censoring_name(c.priors.censoring)}};
  priors["alpha_total"] = c.priors.alpha_total ? Json(*c.priors.alpha_total) : Json(nullptr);
  priors["tau"] = c.priors.tau ? Json(*c.priors.tau) : Json(nullptr);
  return Json{{"priors", priors},
              {"hyperstages", c.hyperstages},
              {"hyperclusters", c.hyperclusters},
              {"max_depth", c.max_depth}};
}

auto search_config_from_json(const Json& j) -> SearchConfig {
  return guarded("search config", [&] {
    SearchConfig c;
    if (auto it = j.find("priors"); it != j.end()) {
      const auto& p = *it;
      if (p.contains("alpha_total") && !p["alpha_total"].is_null()) c.priors.alpha_total = p["alpha_total"].get<double>();
      if (p.contains("tau") && !p["tau"].is_null()) c.priors.tau = p["tau"].get<double>();
      c.priors.default_kappa = get_or(p, "default_kappa", 1.0);
      c.priors.edge_kappa = get_or(p, "edge_kappa", std::map<std::string, double>{});
      c.priors.censoring = parse_censoring(get_or(p, "censoring", std::string{"ignore"}));
      if (c.priors.alpha_total && !(*c.priors.alpha_total > 0)) throw ValidationError{"alpha_total must be positive"};
      if (c.priors.tau && !(*c.priors.tau > 0)) throw ValidationError{"tau must be positive"};
      if (!(c.priors.default_kappa > 0)) throw ValidationError{"default_kappa must be positive"};
    }
    c.hyperstages = get_or(j, "hyperstages", std::vector<std::vector<std::string>>{});
    c.hyperclusters = get_or(j, "hyperclusters", std::vector<std::vector<std::string>>{});
    c.max_depth = get_or(j, "max_depth", 0);
    return c;
  });
}

auto truth_spec_to_json(const TruthSpec& s) -> Json {
  auto stages = Json::array();
  for (const auto& st : s.stages) stages.push_back(Json{{"situations", st.situations}, {"probabilities", st.probabilities}});
  auto clusters = Json::array();
  for (const auto& c : s.clusters) clusters.push_back(Json{{"edges", c.edges}, {"theta", c.theta}, {"kappa", c.kappa}});
  auto j = Json{{"id", s.id},
                {"note", s.note},
                {"tree", tree_to_json(s.tree)},
                {"critical", s.critical},
                {"stages", stages},
                {"clusters", clusters},
                {"dropout", s.dropout},
                {"max_slices", s.max_slices},
                {"search", search_config_to_json(s.search)}};
  j["study_window"] = std::isfinite(s.study_window) ? Json(s.study_window) : Json(nullptr);
  return j;
}

auto truth_spec_from_json(const Json& j) -> TruthSpec {
  return guarded("model file", [&] {
    TruthSpec s;
    s.id = get_or(j, "id", std::string{"custom"});
    s.note = get_or(j, "note", std::string{});
    s.tree = tree_from_json(require(j, "tree"));
    s.critical = require(j, "critical").get<std::set<std::string>>();
    for (const auto& st : require(j, "stages"))
      s.stages.push_back({require(st, "situations").get<std::vector<std::string>>(),
                          require(st, "probabilities").get<std::map<std::string, double>>()});
    for (const auto& c : get_or(j, "clusters", Json::array()))
      s.clusters.push_back({require(c, "edges").get<std::vector<std::string>>(), require(c, "theta").get<double>(),
                            get_or(c, "kappa", 1.0)});
    s.dropout = get_or(j, "dropout", std::map<std::string, double>{});
    s.max_slices = get_or(j, "max_slices", 20);
    if (s.max_slices < 1) throw ValidationError{"max_slices must be at least 1"};
    s.study_window = get_or(j, "study_window", std::numeric_limits<double>::infinity());
    if (j.contains("search")) s.search = search_config_from_json(j["search"]);
    return s;
  });
}

auto holding_law_to_json(const HoldingLaw& law) -> Json {
  auto j = Json{{"kind", law.kind_name()}};
  switch (law.kind()) {
    case HoldingLaw::Kind::PointMass: break;
    case HoldingLaw::Kind::Weibull:
      j["theta"] = law.theta();
      j["kappa"] = law.kappa();
      break;
    case HoldingLaw::Kind::Compound:
      j["zeta"] = law.zeta();
      j["beta"] = law.beta();
      j["kappa"] = law.kappa();
      break;
    case HoldingLaw::Kind::Mixture: {
      j["weights"] = law.weights();
      auto comps = Json::array();
      for (const auto& c : law.components()) comps.push_back(holding_law_to_json(c));
      j["components"] = comps;
      break;
    }
    case HoldingLaw::Kind::Convolution:
      j["grid_step"] = law.grid_step();
      j["grid_size"] = law.grid_size();
      break;
  }
  j["mean"] = moment_json(law.mean());
  j["variance"] = moment_json(law.variance());
  return j;
}

auto rdceg_to_json(const Rdceg& graph, const EventTree* tree) -> Json {
  auto vertices = Json::array();
  for (const auto& v : graph.vertices()) {
    auto j = Json{{"name", v.name}, {"sink", v.is_sink}};
    j["stage"] = v.stage == k_none ? Json(nullptr) : Json(v.stage);
    if (tree) j["members"] = names_of(*tree, v.members);
    vertices.push_back(std::move(j));
  }
  auto edges = Json::array();
  for (const auto& e : graph.edges()) {
    auto j = Json{{"source", graph.vertex(e.source).name},
                  {"target", graph.vertex(e.target).name},
                  {"label", e.label},
                  {"timed", e.timed},
                  {"cyclic", e.cyclic},
                  {"slice_boundary", e.slice_boundary}};
    j["cluster"] = e.cluster == k_none ? Json(nullptr) : Json(e.cluster);
    if (tree) j["members"] = keys_of(*tree, e.members);
    j["probability"] = e.probability ? Json(*e.probability) : Json(nullptr);
    if (e.law) j["law"] = holding_law_to_json(*e.law);
    edges.push_back(std::move(j));
  }
  auto slices = passage_slices(graph);
  auto sl = Json::array();
  for (const auto& s : slices.slices) {
    auto roots = Json::array();
    for (auto r : s.roots) roots.push_back(graph.vertex(r).name);
    auto vs = Json::array();
    for (auto v : s.vertices) vs.push_back(graph.vertex(v).name);
    sl.push_back(Json{{"index", s.index}, {"roots", roots}, {"vertices", vs}});
  }
  return Json{{"vertices", vertices},
              {"edges", edges},
              {"passage_slices", sl},
              {"periodic_from", slices.periodic_from}};
}

auto fitted_to_json(const FittedModel& fit) -> Json {
  const auto& tree = fit.hued.tree();
  auto stages = Json::array();
  for (std::size_t c = 0; c < fit.hued.staging.stages.size(); ++c) {
    const auto& p = fit.stage_params[c];
    stages.push_back(Json{{"situations", names_of(tree, fit.hued.staging.stages[c])},
                          {"labels", tree.out_labels(fit.hued.staging.stages[c].front())},
                          {"alpha", p.alpha},
                          {"alpha_post", p.alpha_post},
                          {"counts", p.counts},
                          {"posterior_mean", p.posterior_mean()}});
  }
  auto clusters = Json::array();
  for (std::size_t c = 0; c < fit.hued.clustering.clusters.size(); ++c) {
    const auto& p = fit.cluster_params[c];
    auto j = Json{{"edges", keys_of(tree, fit.hued.clustering.clusters[c])},
                  {"kappa", p.kappa},
                  {"zeta", p.zeta},
                  {"beta", p.beta},
                  {"zeta_post", p.zeta_post},
                  {"beta_post", p.beta_post},
                  {"visits", p.visits}};
    auto m = p.posterior_mean_theta();
    j["posterior_mean_theta"] = m ? Json(*m) : Json(nullptr);
    clusters.push_back(std::move(j));
  }
  auto positions = Json::array();
  for (const auto& cell : fit.positions.cells) positions.push_back(names_of(tree, cell));
  auto trace = [&](const std::vector<MergeStep>& steps, bool edges) {
    auto out = Json::array();
    for (const auto& s : steps)
      out.push_back(Json{{"first", edges ? keys_of(tree, s.first) : names_of(tree, s.first)},
                         {"second", edges ? keys_of(tree, s.second) : names_of(tree, s.second)},
                         {"delta", s.delta}});
    return out;
  };
  return Json{{"tree", tree_to_json(tree)},
              {"critical", fit.hued.modified.critical},
              {"priors",
               Json{{"alpha_total", fit.priors.alpha_total},
                    {"tau", fit.priors.tau},
                    {"kappa", fit.priors.kappa},
                    {"censoring", censoring_name(fit.censoring)}}},
              {"log_score", fit.log_score},
              {"stages", stages},
              {"clusters", clusters},
              {"positions", positions},
              {"stage_trace", trace(fit.stage_trace, false)},
              {"cluster_trace", trace(fit.cluster_trace, true)},
              {"rdceg", rdceg_to_json(fit.rdceg, &tree)}};
}

auto fitted_from_json(const Json& j) -> FittedModel {
  return guarded("fitted model", [&] {
    auto tree = tree_from_json(require(j, "tree"));
    auto critical = require(j, "critical").get<std::set<std::string>>();
    auto modified = modify_tree(tree, critical);
    const auto& t = modified.tree;
    const auto& pj = require(j, "priors");
    auto kappa = require(pj, "kappa").get<std::vector<double>>();
    if (static_cast<int>(kappa.size()) != t.num_edges()) throw ValidationError{"prior kappa list does not fit the tree"};
    FittedModel fit;
    fit.priors = phantom_priors(modified, require(pj, "alpha_total").get<double>(), require(pj, "tau").get<double>(), kappa);
    fit.censoring = parse_censoring(get_or(pj, "censoring", std::string{"ignore"}));
    Staging staging;
    for (const auto& s : require(j, "stages")) {
      std::vector<Vertex_id> cell;
      for (const auto& name : require(s, "situations")) cell.push_back(t.vertex(name.get<std::string>()));
      staging.stages.push_back(std::move(cell));
      DirichletParams p;
      p.alpha = require(s, "alpha").get<std::vector<double>>();
      p.alpha_post = require(s, "alpha_post").get<std::vector<double>>();
      p.counts = require(s, "counts").get<std::vector<std::int64_t>>();
      fit.stage_params.push_back(std::move(p));
    }
    Clustering clustering;
    for (const auto& c : require(j, "clusters")) {
      std::vector<Edge_id> cell;
      for (const auto& key : require(c, "edges")) cell.push_back(t.edge_by_key(key.get<std::string>()));
      clustering.clusters.push_back(std::move(cell));
      IGParams p;
      p.kappa = require(c, "kappa").get<double>();
      p.zeta = require(c, "zeta").get<double>();
      p.beta = require(c, "beta").get<double>();
      p.zeta_post = require(c, "zeta_post").get<double>();
      p.beta_post = require(c, "beta_post").get<double>();
      p.visits = get_or(c, "visits", std::int64_t{0});
      clustering.kappa.push_back(p.kappa);
      fit.cluster_params.push_back(p);
    }
    // Partitions are stored in canonical order, so the parameter lists stay aligned.
    auto hued = make_hued_tree(modified, staging, clustering);
    if (hued.staging != staging || hued.clustering != clustering)
      throw ValidationError{"fitted model partitions are not in canonical order"};
    fit.hued = std::move(hued);
    fit.log_score = get_or(j, "log_score", 0.0);
    auto read_trace = [&](const char* key, bool edges) {
      std::vector<MergeStep> steps;
      if (!j.contains(key)) return steps;
      auto cell = [&](const Json& names) {
        std::vector<int> ids;
        for (const auto& n : names)
          ids.push_back(edges ? t.edge_by_key(n.get<std::string>()) : t.vertex(n.get<std::string>()));
        return ids;
      };
      for (const auto& s : j.at(key))
        steps.push_back({cell(require(s, "first")), cell(require(s, "second")), require(s, "delta").get<double>()});
      return steps;
    };
    fit.stage_trace = read_trace("stage_trace", false);
    fit.cluster_trace = read_trace("cluster_trace", true);
    attach_rdceg(fit);
    return fit;
  });
}

auto smp_to_json(const Smp& smp) -> Json {
  auto states = Json::array();
  for (const auto& s : smp.states()) states.push_back(Json{{"name", s.name}, {"absorbing", s.absorbing}});
  auto transitions = Json::array();
  for (const auto& t : smp.transitions()) {
    auto routes = Json::array();
    for (const auto& r : t.routes) routes.push_back(Json{{"labels", r.labels}, {"probability", r.probability}});
    transitions.push_back(Json{{"from", smp.state(t.from).name},
                               {"to", smp.state(t.to).name},
                               {"probability", t.probability},
                               {"timed", t.timed},
                               {"cyclic", t.cyclic},
                               {"slice_boundary", t.slice_boundary},
                               {"law", holding_law_to_json(t.law)},
                               {"routes", routes}});
  }
  return Json{{"states", states},
              {"entry", smp.state(smp.entry()).name},
              {"initial_distribution", smp.initial_distribution()},
              {"P", smp.transition_matrix()},
              {"transitions", transitions},
              {"notes", smp.notes()}};
}

auto first_passage_to_json(const Smp& smp, const FirstPassageResult& r) -> Json {
  auto j = Json{{"from", smp.state(r.from).name},
                {"to", smp.state(r.to).name},
                {"samples", r.samples},
                {"hits", r.hits},
                {"hit_probability", r.hit_probability},
                {"hit_se", r.hit_se},
                {"quantiles", r.quantiles},
                {"curve", r.curve},
                {"truncated", r.truncated},
                {"diagnostics", r.diagnostics}};
  j["mean_time"] = r.mean_time ? Json(*r.mean_time) : Json(nullptr);
  j["mean_se"] = r.mean_se ? Json(*r.mean_se) : Json(nullptr);
  return j;
}

auto rolled_to_json(const RolledCeg& g) -> Json {
  auto vertices = Json::array();
  for (const auto& v : g.vertices()) {
    auto j = Json{{"name", v.name}, {"slice", v.slice}};
    j["stage"] = v.stage == k_none ? Json(nullptr) : Json(v.stage);
    vertices.push_back(std::move(j));
  }
  auto edges = Json::array();
  for (const auto& e : g.edges())
    edges.push_back(Json{{"source", g.vertex(e.source).name}, {"target", g.vertex(e.target).name}, {"label", e.label}});
  return Json{{"first_slice", g.first_slice()},
              {"depth", g.depth()},
              {"vertices", vertices},
              {"edges", edges},
              {"path_count", g.path_count()}};
}

auto cut_report_to_json(const RolledCeg& g, const CutReport& r) -> Json {
  auto j = Json{{"vertices", rolled_names(g, r.vertices)}, {"kind", kind_name(r.kind)}, {"reason", r.reason}};
  if (!r.color_closure.empty()) {
    auto cc = Json::array();
    for (const auto& c : r.color_closure) cc.push_back(Json{{"stage", c.stage}, {"vertices", rolled_names(g, c.vertices)}});
    j["color_closure"] = cc;
  }
  if (r.color_witness)
    j["color_witness"] = Json{{"stage", r.color_witness->stage}, {"vertices", rolled_names(g, r.color_witness->vertices)}};
  if (!r.violating_path.empty()) j["violating_path"] = rolled_names(g, r.violating_path);
  return j;
}

auto statement_to_json(const CiStatement& s) -> Json {
  return Json{{"kind", kind_name(s.kind)},
              {"given", s.given},
              {"past", s.past},
              {"future", s.future},
              {"from_slice", s.from_slice},
              {"to_slice", s.to_slice},
              {"includes_holding_times", s.includes_holding_times},
              {"vacuous", s.vacuous},
              {"dropout_caveat", s.dropout_caveat},
              {"text", s.text}};
}

auto intrinsic_to_json(const RolledCeg& g, const IntrinsicResult& r) -> Json {
  auto j = Json{{"intrinsic", r.intrinsic}};
  if (!r.intrinsic) j["counterexample"] = rolled_names(g, r.counterexample);
  return j;
}

auto error_report_to_json(const ErrorReport& r) -> Json {
  auto situations = Json::array();
  for (const auto& s : r.situations)
    situations.push_back(Json{{"situation", s.situation},
                              {"labels", s.labels},
                              {"fitted", s.fitted},
                              {"truth", s.truth},
                              {"distance", s.distance}});
  auto edges = Json::array();
  for (const auto& e : r.edges) {
    auto j = Json{{"edge", e.edge}, {"kappa", e.kappa}, {"theta_true", e.theta_true}, {"distance", e.distance}};
    j["theta_fit"] = e.theta_fit ? Json(*e.theta_fit) : Json(nullptr);
    edges.push_back(std::move(j));
  }
  return Json{{"truth", r.truth_id},
              {"fit", r.fit_id},
              {"situational_error", r.situational},
              {"cluster_error", r.cluster},
              {"situations", situations},
              {"edges", edges},
              {"notes", r.notes}};
}

auto loo_to_json(const LooReport& r) -> Json {
  auto records = Json::array();
  for (const auto& x : r.records) {
    auto sd = Json::array();
    for (const auto& m : x.sd) sd.push_back(moment_json(m));
    records.push_back(Json{{"kind", x.kind == CellKind::Stage ? "stage" : "cluster"},
                           {"cell", x.cell},
                           {"element", x.element},
                           {"members", x.members},
                           {"intact_score", x.intact_score},
                           {"without_score", x.without_score},
                           {"alone_score", x.alone_score},
                           {"split_gain", x.split_gain},
                           {"labels", x.labels},
                           {"expectation", x.expectation},
                           {"sd", sd},
                           {"band", x.band},
                           {"observed", x.observed},
                           {"observations", x.observations},
                           {"low_information", x.low_information},
                           {"outside_band", x.outside_band}});
  }
  return Json{{"records", records}, {"notes", r.notes}};
}

auto read_json_file(const std::string& path) -> Json {
  std::ifstream in{path};
  if (!in) throw ValidationError{fmt::format("cannot open '{}'", path)};
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ValidationError{fmt::format("'{}' is not valid JSON: {}", path, e.what())};
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out{path, std::ios::binary};
  if (!out) throw Error{fmt::format("cannot write '{}'", path)};
  out << text;
  if (!out) throw Error{fmt::format("failed writing '{}'", path)};
}

}  // namespace rdceg

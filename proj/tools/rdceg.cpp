#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "rdceg/builtin_models.hpp"
#include "rdceg/ci_query.hpp"
#include "rdceg/diagnostics.hpp"
#include "rdceg/error.hpp"
#include "rdceg/serialize.hpp"
#include "rdceg/smp.hpp"
#include "rdceg/study.hpp"

using namespace rdceg;

namespace {

// --config files are JSON.  Top-level keys set options of the main command, nested objects set
// options of the subcommand with that name: {"seed": 7, "fit": {"data": "pop.jsonl"}}.
class JsonConfig : public CLI::ConfigBase {
 public:
  auto from_config(std::istream& input) const -> std::vector<CLI::ConfigItem> override {
    Json j;
    try {
      j = Json::parse(input);
    } catch (const Json::parse_error& e) {
      throw CLI::ConversionError{std::string{"config is not valid JSON: "} + e.what()};
    }
    if (!j.is_object()) throw CLI::ConversionError{"config must be a JSON object"};
    std::vector<CLI::ConfigItem> items;
    flatten(j, {}, items);
    return items;
  }

 private:
  static auto scalar(const Json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static void flatten(const Json& j, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& out) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto p = parents;
        p.push_back(key);
        flatten(value, p, out);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      out.push_back(std::move(item));
    }
  }
};

struct Common {
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string format;
};

struct Source {
  std::string model;
  std::string truth;
  std::string fit;
};

auto split(const std::string& s, char sep) -> std::vector<std::string> {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is{s};
  while (std::getline(is, cur, sep)) {
    auto b = cur.find_first_not_of(" \t");
    auto e = cur.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
  }
  return out;
}

auto builtin_name(std::string name) -> std::string {
  std::ranges::replace(name, '-', '_');
  return name;
}

enum class FitSource { None, Alternative, Alongside };

void add_source(CLI::App* cmd, Source& src, FitSource fit_source) {
  auto* model = cmd->add_option("--model", src.model, "Built-in generating model (falls, epilepsy-like, smoking-a, smoking-b)");
  auto* truth = cmd->add_option("--truth", src.truth, "Ground-truth model file (JSON)")->check(CLI::ExistingFile);
  model->excludes(truth);
  if (fit_source != FitSource::None) {
    auto* fit = cmd->add_option("--fit", src.fit, "Fitted model file written by `fit`")->check(CLI::ExistingFile);
    if (fit_source == FitSource::Alternative) fit->excludes(model)->excludes(truth);
  }
}

auto has_truth(const Source& src) -> bool { return !src.model.empty() || !src.truth.empty(); }

auto load_truth(const Source& src) -> GroundTruthModel {
  if (!src.model.empty()) return builtin_model(builtin_name(src.model));
  if (!src.truth.empty()) return make_ground_truth(truth_spec_from_json(read_json_file(src.truth)));
  throw ValidationError{"one of --model or --truth is required"};
}

auto load_graph(const Source& src) -> Rdceg {
  if (!src.fit.empty()) return fitted_from_json(read_json_file(src.fit)).rdceg;
  if (has_truth(src)) return load_truth(src).rdceg();
  throw ValidationError{"one of --model, --truth or --fit is required"};
}

auto pick_format(const Common& common, const std::string& fallback, std::initializer_list<const char*> allowed)
    -> std::string {
  auto f = common.format.empty() ? fallback : common.format;
  for (const auto* a : allowed)
    if (f == a) return f;
  std::string list;
  for (const auto* a : allowed) list += (list.empty() ? "" : ", ") + std::string{a};
  throw ValidationError{"--format " + f + " is not available here (use " + list + ")"};
}

void check_output_path(const std::string& path) {
  if (path.empty()) return;
  auto parent = std::filesystem::path{path}.parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent))
    throw ValidationError{"output directory does not exist: " + parent.string()};
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

auto dump(const Json& j) -> std::string { return j.dump(2) + "\n"; }

auto find_state(const Smp& smp, const std::string& name) -> int { return smp.state_by_name(name); }

// ---- simulate

struct SimulateArgs {
  Source src;
  std::int64_t n = 0;
  std::string out;
};

auto run_simulate(const SimulateArgs& a, const Common& c) -> int {
  check_output_path(a.out);
  std::optional<DataFormat> format;
  if (!c.format.empty()) {
    auto f = pick_format(c, "json", {"json", "csv"});
    format = f == "csv" ? DataFormat::Csv : DataFormat::Jsonl;
  } else if (!a.out.empty()) {
    format = format_for_path(a.out);
  }
  if (a.n < 1) throw ValidationError{"--n must be at least 1"};
  auto truth = load_truth(a.src);
  auto data = simulate_population(truth, a.n, c.seed, c.jobs);
  if (a.out.empty()) {
    write_dataset(std::cout, data, format.value_or(DataFormat::Jsonl));
  } else {
    save_dataset(a.out, data, format);
  }
  return 0;
}

// ---- fit

struct FitArgs {
  Source src;
  std::string tree;
  std::string data;
  std::string search;
  std::optional<double> alpha_total;
  std::optional<double> tau;
  std::string censoring;
  std::string out;
  std::string dot;
};

auto fit_csv(const FittedModel& fit) -> std::string {
  const auto& tree = fit.hued.tree();
  std::ostringstream os;
  os.precision(12);
  os << "kind,cell,members,parameters\n";
  for (std::size_t s = 0; s < fit.hued.staging.stages.size(); ++s) {
    std::string members, params;
    for (auto v : fit.hued.staging.stages[s]) members += (members.empty() ? "" : ";") + tree.name(v);
    auto mean = fit.stage_params[s].posterior_mean();
    auto first = fit.hued.staging.stages[s].front();
    for (std::size_t i = 0; i < mean.size(); ++i)
      params += (params.empty() ? "" : ";") + tree.edge(tree.out_edges(first)[i]).label + "=" + fmt::format("{:.6g}", mean[i]);
    os << "stage," << s << ",\"" << members << "\",\"" << params << "\"\n";
  }
  for (std::size_t k = 0; k < fit.hued.clustering.clusters.size(); ++k) {
    std::string members;
    for (auto e : fit.hued.clustering.clusters[k]) members += (members.empty() ? "" : ";") + tree.edge_key(e);
    const auto& p = fit.cluster_params[k];
    auto theta = p.posterior_mean_theta();
    os << "cluster," << k << ",\"" << members << "\",\""
       << fmt::format("kappa={:.6g};zeta*={:.6g};beta*={:.6g};theta={}", p.kappa, p.zeta_post, p.beta_post,
                      theta ? fmt::format("{:.6g}", *theta) : std::string{"none"})
       << "\"\n";
  }
  os << "score,,,log_score=" << fit.log_score << "\n";
  return os.str();
}

auto run_fit(const FitArgs& a, const Common& c) -> int {
  check_output_path(a.out);
  check_output_path(a.dot);
  auto format = pick_format(c, "json", {"json", "csv", "dot"});

  EventTree tree;
  std::set<std::string> critical;
  SearchConfig config;
  if (!a.tree.empty()) {
    auto j = read_json_file(a.tree);
    if (!j.contains("tree")) throw ValidationError{a.tree + ": missing \"tree\""};
    tree = tree_from_json(j.at("tree"));
    if (j.contains("critical")) critical = j.at("critical").get<std::set<std::string>>();
  } else {
    auto truth = load_truth(a.src);
    tree = truth.spec.tree;
    critical = truth.spec.critical;
    config = truth.spec.search;
  }
  if (!a.search.empty()) config = search_config_from_json(read_json_file(a.search));
  if (a.alpha_total) config.priors.alpha_total = a.alpha_total;
  if (a.tau) config.priors.tau = a.tau;
  if (!a.censoring.empty()) {
    if (a.censoring == "ignore") {
      config.priors.censoring = CensoringMode::Ignore;
    } else if (a.censoring == "survival") {
      config.priors.censoring = CensoringMode::Survival;
    } else {
      throw ValidationError{"--censoring must be ignore or survival"};
    }
  }
  auto data = load_dataset(a.data);

  auto fit = select_model(data, tree, critical, config);
  auto model_json = dump(fitted_to_json(fit));
  auto dot = to_dot(fit.rdceg, &fit.hued.tree());
  if (!a.out.empty()) write_text_file(a.out, model_json);
  if (!a.dot.empty()) write_text_file(a.dot, dot);
  if (format == "dot") {
    std::cout << dot;
  } else if (format == "csv") {
    std::cout << fit_csv(fit);
  } else if (a.out.empty()) {
    std::cout << model_json;
  } else {
    Json summary{{"log_score", fit.log_score},
                 {"stages", fit.hued.staging.stages.size()},
                 {"clusters", fit.hued.clustering.clusters.size()},
                 {"positions", fit.positions.cells.size()},
                 {"model", a.out}};
    std::cout << dump(summary);
  }
  return 0;
}

// ---- query

struct QueryArgs {
  Source src;
  int slice = 0;
  int rollout = 0;
  std::string set;
  int horizon = 1;
  bool find_cuts = false;
  bool find_fine_cuts = false;
  std::vector<std::string> intrinsic;
  std::size_t max_results = 10000;
  std::string out;
};

auto run_query(const QueryArgs& a, const Common& c) -> int {
  check_output_path(a.out);
  auto format = pick_format(c, "json", {"json", "dot"});
  if (a.slice && a.rollout) throw ValidationError{"--slice and --rollout are exclusive"};
  if (a.horizon < 1) throw ValidationError{"--horizon must be at least 1"};
  auto graph = load_graph(a.src);
  if (format == "dot") {
    emit(a.out, to_dot(graph));
    return 0;
  }
  auto g = a.rollout ? roll_out(graph, a.rollout) : slice_graph(graph, a.slice ? a.slice : 1);

  std::vector<int> set;
  for (const auto& name : split(a.set, ',')) set.push_back(g.vertex_by_name(name));
  std::vector<std::vector<int>> event;
  for (const auto& p : a.intrinsic) event.push_back(parse_path(g, split(p, ',')));

  Json out{{"graph", rolled_to_json(g)}};
  if (!a.set.empty()) {
    auto report = check_cut(g, set);
    out["cut"] = cut_report_to_json(g, report);
    if (report.kind != CutKind::Neither) {
      Json statements = Json::array();
      for (const auto& s : ci_statements(graph, g, report, a.horizon)) statements.push_back(statement_to_json(s));
      out["statements"] = statements;
    }
  }
  if (a.find_cuts || a.find_fine_cuts) {
    auto search = a.find_cuts ? find_cuts(g, a.max_results) : find_fine_cuts(g, a.max_results);
    Json reports = Json::array();
    for (const auto& r : search.reports) reports.push_back(cut_report_to_json(g, r));
    out[a.find_cuts ? "cuts" : "fine_cuts"] = reports;
    out["truncated"] = search.truncated;
  }
  if (!event.empty()) out["intrinsic"] = intrinsic_to_json(g, is_intrinsic(g, event));
  emit(a.out, dump(out));
  return 0;
}

// ---- smp

struct SmpArgs {
  Source src;
  std::string policy = "renormalize";
  std::string keep;
  std::string from;
  std::string to;
  std::int64_t samples = 100000;
  double horizon = std::numeric_limits<double>::infinity();
  std::int64_t max_steps = 100000;
  std::string out;
};

auto run_smp(const SmpArgs& a, const Common& c) -> int {
  check_output_path(a.out);
  auto format = pick_format(c, "json", {"json", "csv", "dot"});
  SmpOptions options;
  if (a.policy == "renormalize") {
    options.untimed = UntimedPolicy::Renormalize;
  } else if (a.policy == "degenerate") {
    options.untimed = UntimedPolicy::Degenerate;
  } else {
    throw ValidationError{"--policy must be renormalize or degenerate"};
  }
  if (a.from.empty() != a.to.empty()) throw ValidationError{"--from and --to go together"};
  if (!a.from.empty() && format == "dot") throw ValidationError{"first passage output is json or csv"};
  if (a.samples < 1) throw ValidationError{"--samples must be at least 1"};

  auto smp = to_smp(load_graph(a.src), options);
  if (!a.keep.empty()) {
    std::vector<int> keep;
    for (const auto& name : split(a.keep, ',')) keep.push_back(find_state(smp, name));
    smp = condense_smp(smp, keep);
  }
  if (a.from.empty()) {
    if (format == "dot") {
      emit(a.out, smp_to_dot(smp));
    } else if (format == "csv") {
      emit(a.out, smp_csv(smp));
    } else {
      emit(a.out, dump(smp_to_json(smp)));
    }
    return 0;
  }
  FirstPassageOptions fp;
  fp.samples = a.samples;
  fp.horizon = a.horizon;
  fp.max_steps = a.max_steps;
  fp.seed = c.seed;
  fp.jobs = c.jobs;
  auto result = first_passage(smp, find_state(smp, a.from), find_state(smp, a.to), fp);
  for (const auto& d : result.diagnostics) std::cerr << "note: " << d << "\n";
  emit(a.out, format == "csv" ? first_passage_csv(smp, result) : dump(first_passage_to_json(smp, result)));
  return 0;
}

// ---- diagnose

struct DiagnoseArgs {
  Source src;
  Source against;  // a second generating model standing in for the fit
  std::string data;
  std::string estimate = "theta";
  std::string loo_out;
  std::string out;
};

auto run_diagnose(const DiagnoseArgs& a, const Common& c) -> int {
  check_output_path(a.out);
  check_output_path(a.loo_out);
  auto format = pick_format(c, "json", {"json", "csv"});
  if (has_truth(a.against)) {
    if (!a.src.fit.empty() || !a.data.empty())
      throw ValidationError{"--against-model/--against-truth exclude --fit and --data"};
    auto report = error_report(load_truth(a.src), load_truth(a.against));
    emit(a.out, format == "csv" ? error_report_csv(report) : dump(Json{{"errors", error_report_to_json(report)}}));
    return 0;
  }
  if (a.src.fit.empty()) throw ValidationError{"--fit is required"};
  ScaleEstimate estimate;
  if (a.estimate == "theta") {
    estimate = ScaleEstimate::PosteriorMeanTheta;
  } else if (a.estimate == "compound-mean") {
    estimate = ScaleEstimate::CompoundMean;
  } else {
    throw ValidationError{"--estimate must be theta or compound-mean"};
  }
  auto fit = fitted_from_json(read_json_file(a.src.fit));
  std::optional<ErrorReport> report;
  if (has_truth(a.src)) report = error_report(load_truth(a.src), fit, estimate, a.src.fit);
  std::optional<LooReport> loo;
  if (!a.data.empty()) loo = leave_one_out(fit, sufficient_stats(load_dataset(a.data), fit.hued.modified));
  if (!report && !loo) throw ValidationError{"nothing to diagnose: give --model/--truth and/or --data"};

  if (format == "csv") {
    if (report) emit(a.out, error_report_csv(*report));
    if (loo) {
      if (a.loo_out.empty() && report) throw ValidationError{"csv output with both reports needs --loo-out"};
      emit(a.loo_out, loo_csv(*loo));
    }
    return 0;
  }
  Json out = Json::object();
  if (report) out["errors"] = error_report_to_json(*report);
  if (loo) out["leave_one_out"] = loo_to_json(*loo);
  emit(a.out, dump(out));
  if (loo && !a.loo_out.empty()) emit(a.loo_out, loo_csv(*loo));
  return 0;
}

// ---- repro

struct ReproArgs {
  std::string model = "falls";
  double scale = 1.0;
  std::vector<std::int64_t> sizes;
  std::vector<double> alphas;
  std::vector<double> taus;
  std::string out_dir;
  bool quiet = false;
};

auto run_repro(const ReproArgs& a, const Common& c) -> int {
  auto format = pick_format(c, "csv", {"csv", "json"});
  if (!(a.scale > 0.0) || a.scale > 1.0) throw ValidationError{"--scale must be in (0, 1]"};
  if (!a.out_dir.empty() && !std::filesystem::is_directory(a.out_dir))
    throw ValidationError{"--out-dir does not exist: " + a.out_dir};
  StudyConfig config;
  config.replicates = std::max(1, static_cast<int>(std::lround(100.0 * a.scale)));
  if (!a.sizes.empty()) config.sizes = a.sizes;
  if (!a.alphas.empty()) config.alpha_totals = a.alphas;
  if (!a.taus.empty()) config.taus = a.taus;
  config.seed = c.seed;
  config.jobs = c.jobs;
  auto truth = builtin_model(builtin_name(a.model));

  auto progress = [&](int done, int total) {
    if (!a.quiet) std::cerr << "\r" << done << "/" << total << " data sets" << (done == total ? "\n" : "") << std::flush;
  };
  auto result = run_study(truth, config, progress);
  if (!a.out_dir.empty()) {
    auto dir = std::filesystem::path{a.out_dir};
    write_text_file((dir / "runs.csv").string(), study_runs_csv(result));
    write_text_file((dir / "cells.csv").string(), study_cells_csv(result));
  }
  if (format == "csv") {
    std::cout << study_cells_csv(result);
  } else {
    Json cells = Json::array();
    for (const auto& cell : result.cells)
      cells.push_back({{"n", cell.n},
                       {"alpha_total", cell.alpha_total},
                       {"tau", cell.tau},
                       {"replicates", cell.replicates},
                       {"staging_recovered", cell.staging_recovered},
                       {"clustering_recovered", cell.clustering_recovered},
                       {"both_recovered", cell.both_recovered},
                       {"mean_situational_error", cell.mean_situational_error},
                       {"sd_situational_error", cell.sd_situational_error},
                       {"mean_cluster_error", cell.mean_cluster_error},
                       {"sd_cluster_error", cell.sd_cluster_error}});
    std::cout << dump(Json{{"model", result.model}, {"seed", config.seed}, {"cells", cells}});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced dynamic chain event graphs: simulate, fit, query, convert and diagnose"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file with option values");

  Common common;
  app.add_option("--seed", common.seed, "Random seed");
  app.add_option("--jobs", common.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--format", common.format, "Output format")->check(CLI::IsMember({"json", "csv", "dot"}));
  app.fallthrough();

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Draw a population from a generating model");
  add_source(simulate, sim.src, FitSource::None);
  simulate->add_option("--n", sim.n, "Population size")->required();
  simulate->add_option("--out", sim.out, "Output file (.jsonl or .csv); stdout if omitted");

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Select staging and clustering by greedy agglomerative search");
  add_source(fit, fa.src, FitSource::None);
  fit->add_option("--tree", fa.tree, "Event tree file: {\"tree\": ..., \"critical\": [...]}")
      ->check(CLI::ExistingFile);
  fit->add_option("--data", fa.data, "Data set (.jsonl or .csv)")->required()->check(CLI::ExistingFile);
  fit->add_option("--search", fa.search, "Search config (priors, hyperstages, hyperclusters)")->check(CLI::ExistingFile);
  fit->add_option("--alpha-total", fa.alpha_total, "Phantom units entering the root");
  fit->add_option("--tau", fa.tau, "Phantom holding-time scale");
  fit->add_option("--censoring", fa.censoring, "ignore or survival");
  fit->add_option("--out", fa.out, "Fitted model file (JSON)");
  fit->add_option("--dot", fa.dot, "Also write the RDCEG as Graphviz");

  QueryArgs qa;
  auto* query = app.add_subcommand("query", "Cuts, fine cuts, intrinsic events and conditional independence");
  add_source(query, qa.src, FitSource::Alternative);
  query->add_option("--slice", qa.slice, "Passage-slice to query (default 1)")->check(CLI::PositiveNumber);
  query->add_option("--rollout", qa.rollout, "Query the rolled-out graph over this many slices")
      ->check(CLI::PositiveNumber);
  query->add_option("--set", qa.set, "Vertex set, comma separated (w1,w2)");
  query->add_option("--horizon", qa.horizon, "Slices covered by the statements");
  query->add_flag("--find-cuts", qa.find_cuts, "List every cut");
  query->add_flag("--find-fine-cuts", qa.find_fine_cuts, "List every fine cut");
  query->add_option("--intrinsic", qa.intrinsic, "Root-to-sink path of the event, comma separated; repeat per path");
  query->add_option("--max-results", qa.max_results, "Cap for cut listings");
  query->add_option("--out", qa.out, "Output file; stdout if omitted");

  SmpArgs sa;
  auto* smp = app.add_subcommand("smp", "Semi-Markov process, condensation and first passage");
  add_source(smp, sa.src, FitSource::Alternative);
  smp->add_option("--policy", sa.policy, "Untimed transitions: renormalize or degenerate");
  smp->add_option("--keep", sa.keep, "Condense onto these states, comma separated");
  smp->add_option("--from", sa.from, "First passage start state");
  smp->add_option("--to", sa.to, "First passage target state");
  smp->add_option("--samples", sa.samples, "Monte Carlo trajectories");
  smp->add_option("--horizon", sa.horizon, "Time horizon for the hit curve");
  smp->add_option("--max-steps", sa.max_steps, "Jumps per trajectory before giving up");
  smp->add_option("--out", sa.out, "Output file; stdout if omitted");

  DiagnoseArgs da;
  auto* diagnose = app.add_subcommand("diagnose", "Errors against a generating model and leave-one-out monitors");
  add_source(diagnose, da.src, FitSource::Alongside);
  auto* against_model = diagnose->add_option("--against-model", da.against.model, "Compare with a second builtin model");
  auto* against_truth =
      diagnose->add_option("--against-truth", da.against.truth, "Compare with a second truth file")->check(CLI::ExistingFile);
  against_model->excludes(against_truth);
  diagnose->add_option("--data", da.data, "Data the model was fitted on, for leave-one-out")->check(CLI::ExistingFile);
  diagnose->add_option("--estimate", da.estimate, "Fitted Weibull scale: theta or compound-mean");
  diagnose->add_option("--loo-out", da.loo_out, "Also write the leave-one-out table as CSV here");
  diagnose->add_option("--out", da.out, "Output file; stdout if omitted");

  ReproArgs ra;
  auto* repro = app.add_subcommand("repro", "Replicated simulation studies");
  repro->require_subcommand(1);
  auto* falls = repro->add_subcommand("falls-study", "Recovery and error rates over sizes and the prior grid");
  falls->add_option("--model", ra.model, "Generating model");
  falls->add_option("--scale", ra.scale, "Fraction of the 100 replicates to run");
  falls->add_option("--sizes", ra.sizes, "Population sizes")->delimiter(',');
  falls->add_option("--alpha-total", ra.alphas, "alpha_total grid")->delimiter(',');
  falls->add_option("--tau", ra.taus, "tau grid")->delimiter(',');
  falls->add_option("--out-dir", ra.out_dir, "Write runs.csv and cells.csv here");
  falls->add_flag("--quiet", ra.quiet, "No progress on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (simulate->parsed()) return run_simulate(sim, common);
    if (fit->parsed()) return run_fit(fa, common);
    if (query->parsed()) return run_query(qa, common);
    if (smp->parsed()) return run_smp(sa, common);
    if (diagnose->parsed()) return run_diagnose(da, common);
    if (falls->parsed()) return run_repro(ra, common);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#include "rdceg/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "rdceg/error.hpp"
#include "rdceg/score.hpp"
#include "rdceg/special.hpp"

namespace rdceg {

namespace {

void check_aligned(const EventTree& a, const EventTree& b) {
  if (a.num_vertices() != b.num_vertices())
    throw ValidationError{"fitted and true trees have different situations"};
  for (int v = 0; v < a.num_vertices(); ++v) {
    if (a.name(v) != b.name(v) || a.out_labels(v) != b.out_labels(v))
      throw ValidationError{fmt::format("situation '{}' does not line up between fit and truth", a.name(v))};
  }
}

auto csv_field(const std::string& s) -> std::string {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (auto c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

auto hellinger_weibull(double theta1, double theta2, double kappa) -> double {
  if (!(theta1 > 0.0) || !(theta2 > 0.0) || !(kappa > 0.0))
    throw DomainError{"Hellinger distance needs positive Weibull parameters"};
  auto bc = 2.0 * std::sqrt(theta1 * theta2) / (theta1 + theta2);
  return std::sqrt(std::max(0.0, 1.0 - bc));
}

auto situational_error(const GroundTruthModel& truth, const FittedModel& fit) -> std::vector<SituationError> {
  const auto& tree = truth.modified().tree;
  check_aligned(tree, fit.hued.tree());
  std::vector<SituationError> out;
  for (auto v : tree.situations()) {
    SituationError s;
    s.situation = tree.name(v);
    s.labels = tree.out_labels(v);
    s.fitted = fit.situation_mean(v);
    s.truth = truth.situation_probabilities(v);
    double ss = 0.0;
    for (std::size_t i = 0; i < s.fitted.size(); ++i) ss += (s.fitted[i] - s.truth[i]) * (s.fitted[i] - s.truth[i]);
    s.distance = std::sqrt(ss);
    out.push_back(std::move(s));
  }
  return out;
}

auto cluster_error(const GroundTruthModel& truth, const FittedModel& fit, ScaleEstimate estimate)
    -> std::vector<EdgeError> {
  const auto& tree = truth.modified().tree;
  check_aligned(tree, fit.hued.tree());
  auto cluster_of = fit.hued.clustering.cluster_of(tree.num_edges());
  std::vector<EdgeError> out;
  for (auto e : tree.timed_edges()) {
    EdgeError err;
    err.edge = tree.edge_key(e);
    err.kappa = truth.edge_kappa(e);
    err.theta_true = truth.edge_theta(e);
    auto c = cluster_of.at(e);
    if (c == k_none) throw ValidationError{fmt::format("edge {} is timed in the truth but not in the fit", err.edge)};
    const auto& p = fit.cluster_params[c];
    if (std::abs(p.kappa - err.kappa) > 1e-12)
      throw ValidationError{
          fmt::format("edge {}: fitted shape {} differs from the true shape {}", err.edge, p.kappa, err.kappa)};
    if (estimate == ScaleEstimate::PosteriorMeanTheta) {
      err.theta_fit = p.posterior_mean_theta();
    } else {
      auto m = compound_moments(p.zeta_post, p.beta_post, p.kappa).mean;
      if (m.is_finite()) err.theta_fit = std::pow(m.value() / std::tgamma(1.0 + 1.0 / p.kappa), p.kappa);
    }
    err.distance = err.theta_fit ? hellinger_weibull(*err.theta_fit, err.theta_true, err.kappa) : 1.0;
    out.push_back(std::move(err));
  }
  return out;
}

auto error_report(const GroundTruthModel& truth, const FittedModel& fit, ScaleEstimate estimate, std::string fit_id)
    -> ErrorReport {
  ErrorReport r;
  r.truth_id = truth.id();
  r.fit_id = std::move(fit_id);
  r.situations = situational_error(truth, fit);
  r.edges = cluster_error(truth, fit, estimate);
  for (const auto& s : r.situations) r.situational += s.distance;
  for (const auto& e : r.edges) {
    r.cluster += e.distance;
    if (!e.theta_fit) r.notes.push_back(fmt::format("{}: no finite scale estimate, counted as distance 1", e.edge));
  }
  return r;
}

auto error_report(const GroundTruthModel& truth, const GroundTruthModel& other) -> ErrorReport {
  const auto& tree = truth.modified().tree;
  check_aligned(tree, other.modified().tree);
  ErrorReport r;
  r.truth_id = truth.id();
  r.fit_id = other.id();
  for (auto v : tree.situations()) {
    SituationError s;
    s.situation = tree.name(v);
    s.labels = tree.out_labels(v);
    s.fitted = other.situation_probabilities(v);
    s.truth = truth.situation_probabilities(v);
    double ss = 0.0;
    for (std::size_t i = 0; i < s.fitted.size(); ++i) ss += (s.fitted[i] - s.truth[i]) * (s.fitted[i] - s.truth[i]);
    s.distance = std::sqrt(ss);
    r.situational += s.distance;
    r.situations.push_back(std::move(s));
  }
  for (auto e : tree.timed_edges()) {
    EdgeError err;
    err.edge = tree.edge_key(e);
    err.kappa = truth.edge_kappa(e);
    err.theta_true = truth.edge_theta(e);
    if (!other.modified().tree.edge(e).timed)
      throw ValidationError{fmt::format("edge {} is timed in one model only", err.edge)};
    if (std::abs(other.edge_kappa(e) - err.kappa) > 1e-12)
      throw ValidationError{fmt::format("edge {}: shapes {} and {} differ", err.edge, other.edge_kappa(e), err.kappa)};
    err.theta_fit = other.edge_theta(e);
    err.distance = hellinger_weibull(*err.theta_fit, err.theta_true, err.kappa);
    r.cluster += err.distance;
    r.edges.push_back(std::move(err));
  }
  return r;
}

auto leave_one_out(const FittedModel& fit, const SufficientStats& stats) -> LooReport {
  const auto& tree = fit.hued.tree();
  ScoreContext ctx{tree, fit.priors, stats, fit.censoring};
  LooReport rep;

  const auto& stages = fit.hued.staging.stages;
  for (int c = 0; c < static_cast<int>(stages.size()); ++c) {
    const auto& cell = stages[c];
    std::vector<std::string> members;
    for (auto v : cell) members.push_back(tree.name(v));
    if (cell.size() < 2) {
      rep.notes.push_back(fmt::format("stage {{{}}}: single situation, nothing to leave out", members.front()));
      continue;
    }
    auto params = ctx.stage_params(cell);
    auto intact = ctx.stage_term(cell);
    auto total = std::accumulate(params.alpha_post.begin(), params.alpha_post.end(), 0.0);
    auto labels = tree.out_labels(cell.front());
    for (auto v : cell) {
      LooRecord r;
      r.kind = CellKind::Stage;
      r.cell = c;
      r.element = tree.name(v);
      r.members = members;
      std::vector<Vertex_id> rest;
      for (auto u : cell)
        if (u != v) rest.push_back(u);
      std::vector<Vertex_id> self{v};
      r.intact_score = intact;
      r.without_score = ctx.stage_term(rest);
      r.alone_score = ctx.stage_term(self);
      r.split_gain = r.without_score + r.alone_score - r.intact_score;
      r.labels = labels;
      r.band = 2.0;
      for (auto a : params.alpha_post) {
        r.expectation.push_back(a / total);
        r.sd.push_back(Moment::finite(std::sqrt(a * (total - a) / (total * total * (total + 1.0)))));
      }
      // The element's counts in the order of the cell's labels.
      std::vector<double> counts(labels.size(), 0.0);
      for (std::size_t i = 0; i < tree.out_edges(v).size(); ++i) {
        auto e = tree.out_edges(v)[i];
        auto k = std::ranges::find(labels, tree.edge(e).label) - labels.begin();
        counts[k] = static_cast<double>(stats.counts[v][i]);
      }
      auto n = std::accumulate(counts.begin(), counts.end(), 0.0);
      r.observations = static_cast<std::int64_t>(n);
      if (n == 0) {
        r.low_information = true;
      } else {
        for (std::size_t k = 0; k < counts.size(); ++k) {
          r.observed.push_back(counts[k] / n);
          if (std::abs(r.observed[k] - r.expectation[k]) > r.band * r.sd[k].value()) r.outside_band = true;
        }
      }
      rep.records.push_back(std::move(r));
    }
  }

  const auto& clusters = fit.hued.clustering.clusters;
  for (int c = 0; c < static_cast<int>(clusters.size()); ++c) {
    const auto& cell = clusters[c];
    std::vector<std::string> members;
    for (auto e : cell) members.push_back(tree.edge_key(e));
    if (cell.size() < 2) {
      rep.notes.push_back(fmt::format("cluster {{{}}}: single edge, nothing to leave out", members.front()));
      continue;
    }
    auto params = ctx.cluster_params(cell);
    auto intact = ctx.cluster_term(cell);
    auto moments = compound_moments(params.zeta_post, params.beta_post, params.kappa);
    if (!moments.variance.is_finite())
      rep.notes.push_back(fmt::format("cluster {}: posterior holding-time variance is infinite", c));
    for (auto e : cell) {
      LooRecord r;
      r.kind = CellKind::Cluster;
      r.cell = c;
      r.element = tree.edge_key(e);
      r.members = members;
      std::vector<Edge_id> rest;
      for (auto f : cell)
        if (f != e) rest.push_back(f);
      std::vector<Edge_id> self{e};
      r.intact_score = intact;
      r.without_score = ctx.cluster_term(rest);
      r.alone_score = ctx.cluster_term(self);
      r.split_gain = r.without_score + r.alone_score - r.intact_score;
      r.labels = {"hold"};
      r.band = 1.0;
      r.expectation.push_back(moments.mean.is_finite() ? moments.mean.value()
                                                       : std::numeric_limits<double>::infinity());
      r.sd.push_back(moments.variance.is_finite() ? Moment::finite(std::sqrt(moments.variance.value()))
                                                  : Moment::infinite());
      const auto& holds = stats.holds[e];
      r.observations = static_cast<std::int64_t>(holds.size());
      if (holds.empty()) {
        r.low_information = true;
      } else {
        auto mean = std::accumulate(holds.begin(), holds.end(), 0.0) / static_cast<double>(holds.size());
        r.observed.push_back(mean);
        if (moments.mean.is_finite() && r.sd[0].is_finite())
          r.outside_band = std::abs(mean - r.expectation[0]) > r.band * r.sd[0].value();
      }
      rep.records.push_back(std::move(r));
    }
  }
  return rep;
}

auto error_report_csv(const ErrorReport& report) -> std::string {
  std::ostringstream os;
  os.precision(12);
  os << "kind,element,distance\n";
  os << "total,situational," << report.situational << "\n";
  os << "total,cluster," << report.cluster << "\n";
  for (const auto& s : report.situations) os << "situation," << csv_field(s.situation) << "," << s.distance << "\n";
  for (const auto& e : report.edges) os << "edge," << csv_field(e.edge) << "," << e.distance << "\n";
  return os.str();
}

auto loo_csv(const LooReport& report) -> std::string {
  std::ostringstream os;
  os.precision(12);
  os << "kind,cell,element,label,intact_score,without_score,alone_score,split_gain,expectation,sd,band,"
        "observed,observations,low_information,outside_band\n";
  for (const auto& r : report.records) {
    for (std::size_t k = 0; k < r.labels.size(); ++k) {
      os << (r.kind == CellKind::Stage ? "stage" : "cluster") << "," << r.cell << "," << csv_field(r.element) << ","
         << csv_field(r.labels[k]) << "," << r.intact_score << "," << r.without_score << "," << r.alone_score << ","
         << r.split_gain << "," << r.expectation[k] << ",";
      if (r.sd[k].is_finite()) {
        os << r.sd[k].value();
      } else {
        os << "inf";
      }
      os << "," << r.band << ",";
      if (!r.observed.empty()) os << r.observed[k];
      os << "," << r.observations << "," << (r.low_information ? 1 : 0) << "," << (r.outside_band ? 1 : 0) << "\n";
    }
  }
  return os.str();
}

}  // namespace rdceg

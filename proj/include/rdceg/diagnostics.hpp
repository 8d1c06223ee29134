#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rdceg/dataset.hpp"
#include "rdceg/holding_law.hpp"
#include "rdceg/search.hpp"
#include "rdceg/simulate.hpp"

namespace rdceg {

// Hellinger distance between Weibull(theta1, kappa) and Weibull(theta2, kappa):
// sqrt(1 - 2 sqrt(theta1 theta2) / (theta1 + theta2)).  The shape drops out since t -> t^kappa
// maps both onto exponentials.
auto hellinger_weibull(double theta1, double theta2, double kappa) -> double;

// How the fitted Weibull scale of an edge is read off its posterior.
//   PosteriorMeanTheta  E[theta | data] = beta* / (zeta* - 1)
//   CompoundMean        the scale whose Weibull mean equals the compound law's mean
enum class ScaleEstimate { PosteriorMeanTheta, CompoundMean };

struct SituationError {
  std::string situation;
  std::vector<std::string> labels;
  std::vector<double> fitted;
  std::vector<double> truth;
  double distance = 0.0;
};

struct EdgeError {
  std::string edge;  // key
  double kappa = 1.0;
  double theta_true = 0.0;
  std::optional<double> theta_fit;  // empty when the estimate does not exist; distance is then 1
  double distance = 0.0;
};

struct ErrorReport {
  std::string truth_id;
  std::string fit_id;
  double situational = 0.0;
  double cluster = 0.0;
  std::vector<SituationError> situations;
  std::vector<EdgeError> edges;
  std::vector<std::string> notes;
};

// Sum over situations of the Euclidean distance between fitted posterior-mean and true transition
// probabilities.  Throws ValidationError if the two trees do not line up.
auto situational_error(const GroundTruthModel& truth, const FittedModel& fit) -> std::vector<SituationError>;
// Sum over timed edges of the Hellinger distance between the fitted and true Weibulls.
// Throws ValidationError on a kappa mismatch.
auto cluster_error(const GroundTruthModel& truth, const FittedModel& fit,
                   ScaleEstimate estimate = ScaleEstimate::PosteriorMeanTheta) -> std::vector<EdgeError>;
auto error_report(const GroundTruthModel& truth, const FittedModel& fit,
                  ScaleEstimate estimate = ScaleEstimate::PosteriorMeanTheta, std::string fit_id = "fit")
    -> ErrorReport;

// Both models' true parameters compared the same way; `other` plays the fit.
auto error_report(const GroundTruthModel& truth, const GroundTruthModel& other) -> ErrorReport;

enum class CellKind { Stage, Cluster };

struct LooRecord {
  CellKind kind = CellKind::Stage;
  int cell = 0;
  std::string element;               // situation name or edge key
  std::vector<std::string> members;  // the whole cell
  double intact_score = 0.0;         // cell term with every member
  double without_score = 0.0;        // cell term without the element
  double alone_score = 0.0;          // the element as its own cell
  double split_gain = 0.0;           // without + alone - intact; negative when the cell fits better whole
  // Stages: per out-label (labels of the cell's first member).  Clusters: one entry, the holding time.
  std::vector<std::string> labels;
  std::vector<double> expectation;
  std::vector<Moment> sd;
  double band = 2.0;                // expectation +- band * sd
  std::vector<double> observed;     // the element's own mean; empty without observations
  std::int64_t observations = 0;
  bool low_information = false;     // nothing observed
  bool outside_band = false;
};

struct LooReport {
  std::vector<LooRecord> records;
  std::vector<std::string> notes;  // skipped singleton cells, infinite moments
};

auto leave_one_out(const FittedModel& fit, const SufficientStats& stats) -> LooReport;

auto error_report_csv(const ErrorReport& report) -> std::string;
auto loo_csv(const LooReport& report) -> std::string;

}  // namespace rdceg

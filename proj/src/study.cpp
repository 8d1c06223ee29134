#include "rdceg/study.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "rdceg/diagnostics.hpp"
#include "rdceg/error.hpp"
#include "rdceg/random.hpp"

namespace rdceg {

auto study_data_seed(std::uint64_t seed, std::int64_t n, int replicate) -> std::uint64_t {
  return derive_seed(derive_seed(seed, static_cast<std::uint64_t>(n)), static_cast<std::uint64_t>(replicate));
}

auto run_study(const GroundTruthModel& truth, const StudyConfig& config, const std::function<void(int, int)>& progress)
    -> StudyResult {
  if (config.replicates < 1) throw ValidationError{"replicates must be at least 1"};
  if (config.sizes.empty() || config.alpha_totals.empty() || config.taus.empty())
    throw ValidationError{"study grid is empty"};
  for (auto n : config.sizes)
    if (n < 1) throw ValidationError{"population sizes must be at least 1"};
  for (auto a : config.alpha_totals)
    if (!(a > 0)) throw ValidationError{"alpha_total values must be positive"};
  for (auto t : config.taus)
    if (!(t > 0)) throw ValidationError{"tau values must be positive"};

  const auto grid = config.alpha_totals.size() * config.taus.size();
  const auto pairs = static_cast<int>(config.sizes.size()) * config.replicates;
  StudyResult result;
  result.model = truth.id();
  result.runs.resize(static_cast<std::size_t>(pairs) * grid);

  std::atomic<int> next{0};
  std::atomic<int> done{0};
  std::mutex progress_mutex;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      auto p = next++;
      if (p >= pairs) return;
      try {
        auto n = config.sizes[static_cast<std::size_t>(p / config.replicates)];
        auto r = p % config.replicates;
        auto data_seed = study_data_seed(config.seed, n, r);
        auto data = simulate_population(truth, n, data_seed);
        auto stats = sufficient_stats(data, truth.modified());
        std::size_t k = 0;
        for (auto alpha : config.alpha_totals) {
          for (auto tau : config.taus) {
            auto search = truth.spec.search;
            search.priors.alpha_total = alpha;
            search.priors.tau = tau;
            auto fit = select_model(stats, truth.modified(), search);
            auto report = error_report(truth, fit);
            auto& run = result.runs[static_cast<std::size_t>(p) * grid + k++];
            run.n = n;
            run.alpha_total = alpha;
            run.tau = tau;
            run.replicate = r;
            run.data_seed = data_seed;
            run.staging_recovered = fit.hued.staging == truth.hued.staging;
            run.clustering_recovered = fit.hued.clustering.clusters == truth.hued.clustering.clusters;
            run.situational_error = report.situational;
            run.cluster_error = report.cluster;
            run.log_score = fit.log_score;
          }
        }
      } catch (...) {
        std::scoped_lock lock{failure_mutex};
        if (!failure) failure = std::current_exception();
        next = pairs;
        return;
      }
      auto d = ++done;
      if (progress) {
        std::scoped_lock lock{progress_mutex};
        progress(d, pairs);
      }
    }
  };
  auto jobs = std::max(1, config.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  for (auto n : config.sizes) {
    for (auto alpha : config.alpha_totals) {
      for (auto tau : config.taus) {
        StudyCell cell;
        cell.n = n;
        cell.alpha_total = alpha;
        cell.tau = tau;
        std::vector<const ReplicateResult*> rows;
        for (const auto& run : result.runs)
          if (run.n == n && run.alpha_total == alpha && run.tau == tau) rows.push_back(&run);
        cell.replicates = static_cast<int>(rows.size());
        double s1 = 0, s2 = 0, c1 = 0, c2 = 0;
        for (const auto* run : rows) {
          cell.staging_recovered += run->staging_recovered;
          cell.clustering_recovered += run->clustering_recovered;
          cell.both_recovered += run->staging_recovered && run->clustering_recovered;
          s1 += run->situational_error;
          s2 += run->situational_error * run->situational_error;
          c1 += run->cluster_error;
          c2 += run->cluster_error * run->cluster_error;
        }
        auto m = static_cast<double>(rows.size());
        cell.mean_situational_error = s1 / m;
        cell.mean_cluster_error = c1 / m;
        if (rows.size() > 1) {
          cell.sd_situational_error = std::sqrt(std::max(0.0, (s2 - s1 * s1 / m) / (m - 1)));
          cell.sd_cluster_error = std::sqrt(std::max(0.0, (c2 - c1 * c1 / m) / (m - 1)));
        }
        result.cells.push_back(cell);
      }
    }
  }
  return result;
}

auto study_runs_csv(const StudyResult& result) -> std::string {
  std::ostringstream os;
  os.precision(12);
  os << "model,n,alpha_total,tau,replicate,data_seed,staging_recovered,clustering_recovered,situational_error,"
        "cluster_error,log_score\n";
  for (const auto& r : result.runs)
    os << result.model << "," << r.n << "," << r.alpha_total << "," << r.tau << "," << r.replicate << ","
       << r.data_seed << "," << r.staging_recovered << "," << r.clustering_recovered << "," << r.situational_error
       << "," << r.cluster_error << "," << r.log_score << "\n";
  return os.str();
}

auto study_cells_csv(const StudyResult& result) -> std::string {
  std::ostringstream os;
  os.precision(12);
  os << "model,n,alpha_total,tau,replicates,staging_recovered,clustering_recovered,both_recovered,"
        "mean_situational_error,sd_situational_error,mean_cluster_error,sd_cluster_error\n";
  for (const auto& c : result.cells)
    os << result.model << "," << c.n << "," << c.alpha_total << "," << c.tau << "," << c.replicates << ","
       << c.staging_recovered << "," << c.clustering_recovered << "," << c.both_recovered << ","
       << c.mean_situational_error << "," << c.sd_situational_error << "," << c.mean_cluster_error << ","
       << c.sd_cluster_error << "\n";
  return os.str();
}

}  // namespace rdceg

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pvs/bench/config.hpp"
#include "pvs/mimo.hpp"

namespace pvs::bench {

/// Outcome of one detector on one instance. `estimate` is the real-lifted symbol
/// vector (for the polar model, F(r, theta) of the final iterate).
struct MethodRun {
  std::string method;
  Vec estimate;
  std::vector<IterationRecord> trajectory;
  double runtime_s = 0.0;
  long iterations = 0;
  StopReason stop_reason = StopReason::max_iterations;
};

/// Starting points for the iterative methods are derived from the LMMSE estimate.
/// Timing covers the solver loop only.
MethodRun run_method(const std::string& method, const mimo::MimoInstance& inst,
                     const ExperimentConfig& cfg);

struct BerRow {
  std::string method;
  double snr_db = 0.0;
  int trial = 0;
  double ber = 0.0;
  long iterations = 0;
  double runtime_s = 0.0;
};

/// Scores every (snr, trial, method) without touching the filesystem. Rows are
/// ordered by snr, then trial, then method as listed in the config.
std::vector<BerRow> ber_trials(const ExperimentConfig& cfg);

/// Mean BER per method at one SNR, methods in config order.
std::vector<std::pair<std::string, double>> mean_ber(const std::vector<BerRow>& rows, double snr_db);

struct GridPoint {
  std::string method;
  double lambda_a = 0.0;  ///< pvs: lambda_r, soav: lambda
  double lambda_b = 0.0;  ///< pvs: lambda_theta, soav: unused (0)
  double mean_ber = 0.0;
  double mean_mse = 0.0;  ///< mean ||estimate - s||^2 / (2U) over validation seeds
};

struct GridSelection {
  double snr_db = 0.0;
  PvsParams pvs;
  SoavParams soav;
  std::vector<GridPoint> log;
};

/// Evaluates every grid point of the parametrized methods in cfg.methods on the
/// validation seeds at `snr_db` and keeps the lowest mean BER; ties go to the
/// smaller parameter values (lambda_r before lambda_theta).
GridSelection grid_select(const ExperimentConfig& cfg, double snr_db);

struct Report {
  std::vector<std::string> files;
  std::vector<std::string> warnings;
};

/// Trajectory CSV per (method, trial), convergence_mean.csv on a uniform time
/// grid, and convergence.svg.
Report run_convergence(const ExperimentConfig& cfg);

/// ber.csv (method, snr_db, trial, ber, iterations), ber.svg, runtime.csv when
/// output.timing is set and, with grid.auto_select, grid_select.csv.
Report run_ber_sweep(const ExperimentConfig& cfg);

/// grid_select.csv with one block per SNR.
Report run_grid_select(const ExperimentConfig& cfg);

/// One instance (seed_base, first SNR): trajectory CSVs and summary.csv.
Report run_single_solve(const ExperimentConfig& cfg, const mimo::MimoInstance* instance = nullptr);

/// Calls f(i) for i in [0, n) on up to `threads` workers.
void parallel_for(int n, int threads, const std::function<void(int)>& f);

/// Metadata common to every CSV the harness writes.
CsvMetadata base_metadata(const ExperimentConfig& cfg);

}  // namespace pvs::bench

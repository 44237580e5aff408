#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pvs/composite.hpp"

namespace pvs {

/// mu_n = scale * n^(-1/alpha), with scale <= 1/(2 eta).
struct SmoothingSchedule {
  double eta = 1.0;
  double alpha = 3.0;
  double scale = 0.5;

  /// Schedule with the default scale 1/(2 eta).
  static SmoothingSchedule standard(double eta, double alpha);

  /// Throws ParameterError unless eta > 0, alpha >= 1 and 0 < scale <= 1/(2 eta).
  void validate() const;
};

double mu_at(const SmoothingSchedule& schedule, long n);

enum class StepsizeMode { fixed, backtracking };

/// Shared stopping rule: first of max_iterations, time budget, or
/// ||x_{n+1} - x_n|| <= x_change_tolerance.
struct StopRule {
  long max_iterations = 10000;
  std::optional<double> time_budget_s;
  double x_change_tolerance = 0.0;
};

struct SolverConfig {
  double c = 0x1p-13;
  StepsizeMode stepsize_mode = StepsizeMode::backtracking;
  double gamma_initial = 1.0;
  double rho = 0.5;
  int backtrack_cap = 60;
  StopRule stop;
  /// Keep every iterate x_n in the trajectory (memory heavy; used by checks).
  bool keep_iterates = false;

  void validate() const;
};

/// Diagnostics for iterate x_n and the step that leaves it.
struct IterationRecord {
  long n = 0;
  double mu = 0.0;
  double gamma = 0.0;
  double cost_surrogate = 0.0;  ///< (f_n + phi)(x_n)
  double cost_true = 0.0;       ///< (f + phi)(x_n)
  double measure = 0.0;         ///< stationarity measure of f_n at x_n, evaluated at gamma_bar
  double x_change = 0.0;        ///< ||x_{n+1} - x_n||
  double elapsed_s = 0.0;       ///< solver time spent before x_n became available
  int backtracks = 0;           ///< rejected stepsize trials at iteration n
};

enum class StopReason { max_iterations, time_budget, x_change };

std::string to_string(StopReason reason);

struct Trajectory {
  std::vector<IterationRecord> records;
  Vec final_x;
  double min_measure = 0.0;  ///< min_k record[k].measure
  double gamma_bar = 0.0;    ///< max accepted stepsize
  double solve_time_s = 0.0;
  StopReason stop_reason = StopReason::max_iterations;
  /// x_1, ..., x_N when SolverConfig::keep_iterates is set; final_x is x_{N+1}.
  std::vector<Vec> iterates;
};

/// Sufficient-decrease test shared by the solver and by checks:
///   cost_next <= cost_x - c * gamma * (||x - x_next|| / gamma)^2.
bool armijo_test(double cost_x, double cost_next, const Vec& x, const Vec& x_next, double gamma,
                 double c);

/// Evaluates the sufficient-decrease condition for the surrogate total cost at x.
bool armijo_holds(const CompositeProblem& P, double mu, const Vec& x, double gamma, double c);

struct BacktrackResult {
  double gamma = 0.0;
  Vec next_x;
  int trials = 0;      ///< stepsizes tried, including the accepted one
  int reductions = 0;  ///< k in gamma = gamma_initial * rho^k
};

/// Largest gamma_initial * rho^k passing the sufficient-decrease test.
/// Throws StepsizeError when `cap` trials all fail.
BacktrackResult backtrack_stepsize(const CompositeProblem& P, double mu, const Vec& x,
                                   double gamma_initial, double rho, double c, int cap);

/// 2(1-c) / (varpi1 + varpi2/mu).
double fixed_stepsize(double varpi1, double varpi2, double mu, double c);

/// Proximal variable smoothing:
///   x_{n+1} = prox_{gamma_n phi}(x_n - gamma_n grad f_n(x_n)),  f_n = h + g^{mu_n} o S.
Trajectory run(const CompositeProblem& P, const Vec& x1, const SmoothingSchedule& schedule,
               const SolverConfig& config);

using CsvMetadata = std::vector<std::pair<std::string, std::string>>;

/// Columns: n, mu, gamma, cost_surrogate, cost_true, measure, x_change, elapsed_s, backtracks.
/// Metadata lines are emitted first as "# key=value".
void write_trajectory_csv(std::ostream& out, const std::vector<IterationRecord>& records,
                          const CsvMetadata& metadata = {});

/// Parses the format written by write_trajectory_csv (metadata lines are skipped).
std::vector<IterationRecord> read_trajectory_csv(std::istream& in);

}  // namespace pvs

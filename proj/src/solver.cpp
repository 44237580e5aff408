#include "pvs/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include "pvs/csv.hpp"

namespace pvs {

SmoothingSchedule SmoothingSchedule::standard(double eta, double alpha) {
  SmoothingSchedule s{eta, alpha, 0.5 / eta};
  s.validate();
  return s;
}

void SmoothingSchedule::validate() const {
  if (!(eta > 0.0)) throw ParameterError("schedule eta must be positive");
  if (!(alpha >= 1.0)) throw ParameterError("schedule alpha must be >= 1");
  if (!(scale > 0.0) || scale > 0.5 / eta)
    throw ParameterError("schedule scale must lie in (0, 1/(2 eta)]");
}

double mu_at(const SmoothingSchedule& schedule, long n) {
  if (n < 1) throw ParameterError("schedule index n must be >= 1");
  return schedule.scale * std::pow(static_cast<double>(n), -1.0 / schedule.alpha);
}

void SolverConfig::validate() const {
  if (!(c > 0.0 && c < 1.0)) throw ParameterError("Armijo constant c must lie in (0,1)");
  if (!(rho > 0.0 && rho < 1.0)) throw ParameterError("backtracking rho must lie in (0,1)");
  if (!(gamma_initial > 0.0)) throw ParameterError("gamma_initial must be positive");
  if (backtrack_cap < 1) throw ParameterError("backtrack_cap must be >= 1");
  if (stop.max_iterations < 1) throw ParameterError("max_iterations must be >= 1");
  if (stop.x_change_tolerance < 0.0) throw ParameterError("x_change_tolerance must be >= 0");
  if (stop.time_budget_s && !(*stop.time_budget_s > 0.0))
    throw ParameterError("time budget must be positive");
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::max_iterations: return "max_iterations";
    case StopReason::time_budget: return "time_budget";
    case StopReason::x_change: return "x_change";
  }
  return "unknown";
}

bool armijo_test(double cost_x, double cost_next, const Vec& x, const Vec& x_next, double gamma,
                 double c) {
  const double measure = (x - x_next).norm() / gamma;
  return cost_next <= cost_x - c * gamma * (measure * measure);
}

bool armijo_holds(const CompositeProblem& P, double mu, const Vec& x, double gamma, double c) {
  const Vec next = prox_grad_step(P, mu, gamma, x);
  return armijo_test(surrogate_total(P, mu, x), surrogate_total(P, mu, next), x, next, gamma, c);
}

namespace {

BacktrackResult backtrack_from(const CompositeProblem& P, double mu, const Vec& x, double cost_x,
                               const Vec& grad, double gamma_initial, double rho, double c,
                               int cap) {
  double gamma = gamma_initial;
  for (int k = 0; k < cap; ++k) {
    Vec next = prox_grad_step_from(P, gamma, x, grad);
    if (armijo_test(cost_x, surrogate_total(P, mu, next), x, next, gamma, c))
      return {gamma, std::move(next), k + 1, k};
    gamma *= rho;
  }
  throw StepsizeError("backtracking failed after " + std::to_string(cap) +
                          " trials (last gamma " + csv::format_double(gamma / rho) +
                          "); check eta or the smoothness of h and S",
                      gamma / rho, cap);
}

}  // namespace

BacktrackResult backtrack_stepsize(const CompositeProblem& P, double mu, const Vec& x,
                                   double gamma_initial, double rho, double c, int cap) {
  if (!(gamma_initial > 0.0)) throw ParameterError("gamma_initial must be positive");
  if (!(rho > 0.0 && rho < 1.0)) throw ParameterError("rho must lie in (0,1)");
  if (!(c > 0.0 && c < 1.0)) throw ParameterError("c must lie in (0,1)");
  if (cap < 1) throw ParameterError("backtrack cap must be >= 1");
  if (!P.phi.contains(x)) throw ParameterError("backtracking requires x in dom phi");
  const SurrogateEval ev = surrogate_eval(P, mu, x);
  return backtrack_from(P, mu, x, ev.value + P.phi.eval(x), ev.grad, gamma_initial, rho, c, cap);
}

double fixed_stepsize(double varpi1, double varpi2, double mu, double c) {
  if (varpi1 < 0.0 || varpi2 < 0.0 || !(varpi1 + varpi2 > 0.0))
    throw ParameterError("Lipschitz constants must be nonnegative and not both zero");
  if (!(mu > 0.0)) throw ParameterError("mu must be positive");
  if (!(c > 0.0 && c < 1.0)) throw ParameterError("c must lie in (0,1)");
  return 2.0 * (1.0 - c) / (varpi1 + varpi2 / mu);
}

Trajectory run(const CompositeProblem& P, const Vec& x1, const SmoothingSchedule& schedule,
               const SolverConfig& config) {
  schedule.validate();
  config.validate();
  if (!P.phi.contains(x1)) throw ParameterError("initial point must lie in dom phi");
  if (schedule.scale >= P.g.max_index())
    throw IndexError("schedule exceeds the admissible Moreau index of g");
  if (config.stepsize_mode == StepsizeMode::fixed && (!P.varpi1 || !P.varpi2))
    throw ParameterError("fixed stepsizes need varpi1 and varpi2");

  using clock = std::chrono::steady_clock;
  Trajectory traj;
  traj.min_measure = std::numeric_limits<double>::infinity();
  Vec x = x1;
  double solver_time = 0.0;

  for (long n = 1;; ++n) {
    const auto t0 = clock::now();
    const double mu = mu_at(schedule, n);
    const SurrogateEval ev = surrogate_eval(P, mu, x);
    const double cost = ev.value + P.phi.eval(x);
    if (!std::isfinite(cost))
      throw DivergenceError("non-finite surrogate cost at iteration " + std::to_string(n));

    double gamma = 0.0;
    int backtracks = 0;
    Vec next;
    if (config.stepsize_mode == StepsizeMode::fixed) {
      gamma = fixed_stepsize(*P.varpi1, *P.varpi2, mu, config.c);
      next = prox_grad_step_from(P, gamma, x, ev.grad);
    } else {
      BacktrackResult bt = backtrack_from(P, mu, x, cost, ev.grad, config.gamma_initial,
                                          config.rho, config.c, config.backtrack_cap);
      gamma = bt.gamma;
      backtracks = bt.reductions;
      next = std::move(bt.next_x);
    }
    const double elapsed_before = solver_time;
    solver_time += std::chrono::duration<double>(clock::now() - t0).count();

    traj.gamma_bar = std::max(traj.gamma_bar, gamma);
    const double x_change = (next - x).norm();
    const double measure =
        traj.gamma_bar == gamma
            ? x_change / gamma
            : (x - prox_grad_step_from(P, traj.gamma_bar, x, ev.grad)).norm() / traj.gamma_bar;
    traj.min_measure = std::min(traj.min_measure, measure);

    traj.records.push_back({n, mu, gamma, cost, true_cost(P, x), measure, x_change,
                            elapsed_before, backtracks});
    if (config.keep_iterates) traj.iterates.push_back(x);
    x = std::move(next);

    if (x_change <= config.stop.x_change_tolerance) {
      traj.stop_reason = StopReason::x_change;
      break;
    }
    if (config.stop.time_budget_s && solver_time >= *config.stop.time_budget_s) {
      traj.stop_reason = StopReason::time_budget;
      break;
    }
    if (n >= config.stop.max_iterations) {
      traj.stop_reason = StopReason::max_iterations;
      break;
    }
  }
  traj.final_x = std::move(x);
  traj.solve_time_s = solver_time;
  return traj;
}

void write_trajectory_csv(std::ostream& out, const std::vector<IterationRecord>& records,
                          const CsvMetadata& metadata) {
  using csv::format_double;
  csv::write_metadata(out, metadata);
  out << "n,mu,gamma,cost_surrogate,cost_true,measure,x_change,elapsed_s,backtracks\n";
  for (const auto& r : records) {
    out << r.n << ',' << format_double(r.mu) << ',' << format_double(r.gamma) << ','
        << format_double(r.cost_surrogate) << ',' << format_double(r.cost_true) << ','
        << format_double(r.measure) << ',' << format_double(r.x_change) << ','
        << format_double(r.elapsed_s) << ',' << r.backtracks << '\n';
  }
}

std::vector<IterationRecord> read_trajectory_csv(std::istream& in) {
  const csv::Table t = csv::read_table(in);
  const std::size_t cn = t.column("n"), cmu = t.column("mu"), cg = t.column("gamma"),
                    cs = t.column("cost_surrogate"), ct = t.column("cost_true"),
                    cm = t.column("measure"), cx = t.column("x_change"),
                    ce = t.column("elapsed_s"), cb = t.column("backtracks");
  std::vector<IterationRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::size_t line = t.row_lines[i];
    out.push_back({csv::parse_long(row[cn], line), csv::parse_double(row[cmu], line),
                   csv::parse_double(row[cg], line), csv::parse_double(row[cs], line),
                   csv::parse_double(row[ct], line), csv::parse_double(row[cm], line),
                   csv::parse_double(row[cx], line), csv::parse_double(row[ce], line),
                   static_cast<int>(csv::parse_long(row[cb], line))});
  }
  return out;
}

}  // namespace pvs

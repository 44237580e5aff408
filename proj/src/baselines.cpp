#include "pvs/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "pvs/mimo.hpp"

namespace pvs::baselines {

namespace {

using clock = std::chrono::steady_clock;

double seconds_since(clock::time_point t0) {
  return std::chrono::duration<double>(clock::now() - t0).count();
}

void validate_stop(const StopRule& stop) {
  if (stop.max_iterations < 1) throw ParameterError("max_iterations must be >= 1");
  if (stop.x_change_tolerance < 0.0) throw ParameterError("x_change_tolerance must be >= 0");
}

void validate_system(const Mat& H, const Vec& y) {
  if (H.rows() != y.size()) throw ParameterError("H and y dimensions disagree");
  if (H.cols() % 2 != 0) throw ParameterError("real-lifted H must have an even column count");
}

// Returns the reason to stop after an iteration, if any.
std::optional<StopReason> should_stop(const StopRule& stop, long n, double x_change,
                                      double solver_time) {
  if (x_change <= stop.x_change_tolerance) return StopReason::x_change;
  if (stop.time_budget_s && solver_time >= *stop.time_budget_s) return StopReason::time_budget;
  if (n >= stop.max_iterations) return StopReason::max_iterations;
  return std::nullopt;
}

double least_squares(const Mat& H, const Vec& y, const Vec& s) {
  return 0.5 * (y - H * s).squaredNorm();
}

}  // namespace

Vec lmmse_detect(const Mat& H, const Vec& y, double sigma2) {
  validate_system(H, y);
  if (!(sigma2 >= 0.0)) throw ParameterError("noise variance must be nonnegative");
  Mat A = H.transpose() * H;
  A.diagonal().array() += sigma2;
  Eigen::LLT<Mat> llt(A);
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-13)
    throw LinAlgError("LMMSE normal matrix is singular");
  return llt.solve(H.transpose() * y);
}

Vec project_unit_modulus_pairs(const Vec& s) {
  const Eigen::Index U = s.size() / 2;
  Vec out(s.size());
  for (Eigen::Index u = 0; u < U; ++u) {
    const auto [re, im] = project_unit_modulus({s[u], s[U + u]});
    out[u] = re;
    out[U + u] = im;
  }
  return out;
}

Vec project_constellation_hull(const Vec& s, int M) {
  if (M < 2) throw ParameterError("constellation order must be >= 2");
  const Eigen::Index U = s.size() / 2;
  Vec out(s.size());
  for (Eigen::Index u = 0; u < U; ++u) {
    if (M == 2) {
      out[u] = std::clamp(s[u], -1.0, 1.0);
      out[U + u] = 0.0;
    } else {
      const auto [re, im] = project_regular_polygon({s[u], s[U + u]}, M);
      out[u] = re;
      out[U + u] = im;
    }
  }
  return out;
}

bool in_constellation_hull(const Vec& s, int M, double slack) {
  const Eigen::Index U = s.size() / 2;
  for (Eigen::Index u = 0; u < U; ++u) {
    if (M == 2) {
      if (std::abs(s[u]) > 1.0 + slack || std::abs(s[U + u]) > slack) return false;
    } else if (!in_regular_polygon({s[u], s[U + u]}, M, slack)) {
      return false;
    }
  }
  return true;
}

double gram_op_norm(const Mat& H) {
  const double sv = Eigen::JacobiSVD<Mat>(H).singularValues()(0);
  return sv * sv;
}

BaselineResult modulus_pgd(const Mat& H, const Vec& y, const Vec& x1,
                           std::optional<double> gamma, const StopRule& stop) {
  validate_system(H, y);
  validate_stop(stop);
  if (x1.size() != H.cols()) throw ParameterError("x1 dimension mismatch");
  const Eigen::Index U = x1.size() / 2;
  for (Eigen::Index u = 0; u < U; ++u)
    if (std::abs(std::hypot(x1[u], x1[U + u]) - 1.0) > 1e-9)
      throw ParameterError("modulus_pgd needs a unit-modulus starting point");
  const double step = gamma ? *gamma : 1.0 / gram_op_norm(H);
  if (!(step > 0.0)) throw ParameterError("stepsize must be positive");

  BaselineResult res;
  res.method_tag = "modulus";
  Vec x = x1;
  double solver_time = 0.0;
  for (long n = 1;; ++n) {
    const auto t0 = clock::now();
    Vec next = project_unit_modulus_pairs(x - step * (H.transpose() * (H * x - y)));
    const double elapsed_before = solver_time;
    solver_time += seconds_since(t0);

    const double cost = least_squares(H, y, x);
    const double dx = (next - x).norm();
    res.trajectory.push_back({n, 0.0, step, cost, cost, dx / step, dx, elapsed_before, 0});
    x = std::move(next);
    if (auto why = should_stop(stop, n, dx, solver_time)) {
      res.stop_reason = *why;
      break;
    }
  }
  res.estimate = std::move(x);
  res.solve_time_s = solver_time;
  return res;
}

double soav_objective(const Mat& H, const Vec& y, double lambda, int M, const Vec& s) {
  double val = least_squares(H, y, s);
  if (lambda > 0.0) {
    const auto shifts = mimo::constellation_shifts(static_cast<int>(s.size() / 2), M);
    val += soav_value(s, shifts, lambda);
  }
  return val;
}

BaselineResult soav_primal_dual(const Mat& H, const Vec& y, double lambda, int M,
                                const SoavConfig& config) {
  validate_system(H, y);
  validate_stop(config.stop);
  if (lambda < 0.0) throw ParameterError("SOAV weight must be nonnegative");
  if (M < 2) throw ParameterError("constellation order must be >= 2");
  if (!(config.sigma > 0.0)) throw ParameterError("dual stepsize sigma must be positive");

  const double lip = gram_op_norm(H);
  const double tau = config.tau ? *config.tau : 0.9 / (0.5 * lip + config.sigma);
  // Convergence of the splitting needs tau (sigma ||K||^2 + L/2) <= 1 with K = I.
  if (!(tau > 0.0) || tau * (config.sigma + 0.5 * lip) > 1.0)
    throw ParameterError("primal-dual stepsizes violate tau (sigma + L/2) <= 1");

  const int U = static_cast<int>(H.cols() / 2);
  const auto shifts = mimo::constellation_shifts(U, M);
  const double sigma = config.sigma;

  BaselineResult res;
  res.method_tag = "soav";
  Vec x = config.x1 ? project_constellation_hull(*config.x1, M) : Vec(Vec::Zero(2 * U));
  if (x.size() != 2 * U) throw ParameterError("x1 dimension mismatch");
  Vec u = Vec::Zero(2 * U);
  const Vec hty = H.transpose() * y;
  const Mat gram = H.transpose() * H;

  double solver_time = 0.0;
  for (long n = 1;; ++n) {
    const auto t0 = clock::now();
    Vec next = project_constellation_hull(x - tau * (gram * x - hty + u), M);
    if (lambda > 0.0) {
      // prox of sigma h^* via Moreau's identity, h = lambda psi_SOAV.
      const Vec v = u + sigma * (2.0 * next - x);
      u = v - sigma * prox_soav(v / sigma, shifts, 1.0 / sigma, lambda);
    }
    const double elapsed_before = solver_time;
    solver_time += seconds_since(t0);

    const double cost = lambda > 0.0 ? least_squares(H, y, x) + soav_value(x, shifts, lambda)
                                     : least_squares(H, y, x);
    const double dx = (next - x).norm();
    res.trajectory.push_back({n, 0.0, tau, cost, cost, dx / tau, dx, elapsed_before, 0});
    x = std::move(next);
    if (auto why = should_stop(config.stop, n, dx, solver_time)) {
      res.stop_reason = *why;
      break;
    }
  }
  res.estimate = std::move(x);
  res.solve_time_s = solver_time;
  return res;
}

double subgradient_stepsize(SubgradientRule rule, double varpi1, long n) {
  if (n < 1) throw ParameterError("iteration index must be >= 1");
  if (rule == SubgradientRule::lipschitz) {
    if (!(varpi1 > 0.0)) throw ParameterError("varpi1 must be positive");
    return 1.0 / (2.0 * varpi1 * static_cast<double>(n));
  }
  return 1.0 / (2.0 * static_cast<double>(n));
}

BaselineResult prox_subgradient(const CompositeProblem& P, const Vec& x1, SubgradientRule rule,
                                double varpi1, const StopRule& stop) {
  validate_stop(stop);
  if (!P.g.subgradient) throw ParameterError("g has no subgradient selection");
  if (!P.phi.contains(x1)) throw ParameterError("initial point must lie in dom phi");
  if (rule == SubgradientRule::lipschitz && !(varpi1 > 0.0))
    throw ParameterError("varpi1 must be positive");

  BaselineResult res;
  res.method_tag = rule == SubgradientRule::lipschitz ? "sub_lipschitz" : "sub_heuristic";
  Vec x = x1;
  double solver_time = 0.0;
  for (long n = 1;; ++n) {
    const auto t0 = clock::now();
    const double gamma = subgradient_stepsize(rule, varpi1, n);
    const Vec v = P.h.grad(x) + P.S.jac_adjoint_apply(x, P.g.subgradient(P.S.eval(x)));
    Vec next = P.phi.prox(x - gamma * v, gamma);
    const double elapsed_before = solver_time;
    solver_time += seconds_since(t0);

    const double cost = true_cost(P, x);
    if (!std::isfinite(cost))
      throw DivergenceError("non-finite cost at iteration " + std::to_string(n));
    const double dx = (next - x).norm();
    res.trajectory.push_back({n, 0.0, gamma, cost, cost, dx / gamma, dx, elapsed_before, 0});
    x = std::move(next);
    if (auto why = should_stop(stop, n, dx, solver_time)) {
      res.stop_reason = *why;
      break;
    }
  }
  res.estimate = std::move(x);
  res.solve_time_s = solver_time;
  return res;
}

}  // namespace pvs::baselines

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pvs/solver.hpp"

namespace pvs::baselines {

// Comparison detectors on the real-lifted model y = H s + e, with s in R^{2U}
// stored as [Re; Im], so symbol u is the pair (s[u], s[u+U]).

struct BaselineResult {
  Vec estimate;
  std::vector<IterationRecord> trajectory;
  std::string method_tag;
  StopReason stop_reason = StopReason::max_iterations;
  double solve_time_s = 0.0;
};

/// (H^T H + sigma2 I)^{-1} H^T y by Cholesky. Throws LinAlgError when the
/// system is singular (only possible for sigma2 = 0).
Vec lmmse_detect(const Mat& H, const Vec& y, double sigma2);

/// Per-symbol radial projection onto the unit circle; the origin maps to (1, 0).
Vec project_unit_modulus_pairs(const Vec& s);

/// Per-symbol projection onto the convex hull of the M-PSK constellation
/// (a regular M-gon, or the segment [-1, 1] for M = 2).
Vec project_constellation_hull(const Vec& s, int M);

bool in_constellation_hull(const Vec& s, int M, double slack = 1e-9);

/// Spectral norm squared of H, ||H^T H||_op.
double gram_op_norm(const Mat& H);

/// Projected gradient on 0.5||y - Hs||^2 over per-symbol unit modulus.
/// gamma defaults to 1/||H^T H||_op.
BaselineResult modulus_pgd(const Mat& H, const Vec& y, const Vec& x1,
                           std::optional<double> gamma, const StopRule& stop);

struct SoavConfig {
  StopRule stop;
  double sigma = 1.0;
  /// Defaults to 0.9 / (||H^T H||_op / 2 + sigma).
  std::optional<double> tau;
  /// Defaults to the origin.
  std::optional<Vec> x1;
};

/// SOAV objective 0.5||y - Hs||^2 + lambda (1/M) sum_m ||s - s_m||_1.
double soav_objective(const Mat& H, const Vec& y, double lambda, int M, const Vec& s);

/// Condat-Vu primal-dual splitting for
///   min 0.5||y - Hs||^2 + lambda psi_SOAV(s) + indicator_C(s),
/// with the hull constraint applied on the primal update, so every iterate is in C.
BaselineResult soav_primal_dual(const Mat& H, const Vec& y, double lambda, int M,
                                const SoavConfig& config);

enum class SubgradientRule { lipschitz, heuristic };

/// gamma_n = 1/(2 varpi1 n) for lipschitz, 1/(2n) for heuristic.
double subgradient_stepsize(SubgradientRule rule, double varpi1, long n);

/// x_{n+1} = prox_{gamma_n phi}(x_n - gamma_n v_n),
/// v_n = grad h(x_n) + DS(x_n)^*[u_n],  u_n = g.subgradient(S(x_n)).
BaselineResult prox_subgradient(const CompositeProblem& P, const Vec& x1, SubgradientRule rule,
                                double varpi1, const StopRule& stop);

}  // namespace pvs::baselines

#pragma once

#include <functional>
#include <optional>

#include "pvs/prox.hpp"
#include "pvs/types.hpp"

namespace pvs {

/// Differentiable function with Lipschitz gradient on dom phi.
struct SmoothFn {
  std::function<double(const Vec&)> eval;
  std::function<Vec(const Vec&)> grad;
};

/// Continuously differentiable map S: X -> Z with forward and adjoint Jacobian actions.
struct SmoothMap {
  std::function<Vec(const Vec&)> eval;
  /// DS(x)[v]
  std::function<Vec(const Vec&, const Vec&)> jac_apply;
  /// DS(x)^*[w]
  std::function<Vec(const Vec&, const Vec&)> jac_adjoint_apply;
};

/// minimize h(x) + g(S(x)) + phi(x).
///
/// `varpi1`, `varpi2` give the gradient Lipschitz constant varpi1 + varpi2/mu of
/// the smoothed surrogate h + g^mu o S. They are only required for the fixed
/// stepsize rule.
struct CompositeProblem {
  SmoothFn h;
  SmoothMap S;
  WeaklyConvexFn g;
  ProxFriendlyConvexFn phi;
  std::optional<double> varpi1;
  std::optional<double> varpi2;

  /// varpi1 + varpi2/mu; throws ParameterError when the constants are absent.
  double surrogate_lipschitz(double mu) const;
};

/// f_mu(x) = h(x) + g^mu(S(x)).
double surrogate_value(const CompositeProblem& P, double mu, const Vec& x);

/// f_mu(x) + phi(x); +inf outside dom phi.
double surrogate_total(const CompositeProblem& P, double mu, const Vec& x);

/// h(x) + g(S(x)) + phi(x), the unsmoothed objective.
double true_cost(const CompositeProblem& P, const Vec& x);

/// grad h(x) + DS(x)^*[grad g^mu(S(x))].
Vec surrogate_grad(const CompositeProblem& P, double mu, const Vec& x);

/// Value and gradient of f_mu sharing one evaluation of S and of the prox of g.
struct SurrogateEval {
  double value;
  Vec grad;
};
SurrogateEval surrogate_eval(const CompositeProblem& P, double mu, const Vec& x);

/// prox_{gamma phi}(x - gamma grad f_mu(x)).
Vec prox_grad_step(const CompositeProblem& P, double mu, double gamma, const Vec& x);

/// Same step from a precomputed surrogate gradient.
Vec prox_grad_step_from(const CompositeProblem& P, double gamma, const Vec& x, const Vec& grad);

/// gamma^{-1} ||x - prox_grad_step(P, mu, gamma, x)||. Zero exactly at fixed points
/// of the prox-gradient map.
double stationarity_measure(const CompositeProblem& P, double mu, double gamma, const Vec& x);

/// The identity map on R^n.
SmoothMap identity_map();

/// h(x) = 0.5 * scale * ||x||^2.
SmoothFn half_squared_norm(double scale = 1.0);

/// h = 0.
SmoothFn zero_smooth();

}  // namespace pvs

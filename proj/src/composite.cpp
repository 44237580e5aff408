#include "pvs/composite.hpp"

#include <cmath>
#include <limits>

namespace pvs {

namespace {

void require_positive_step(double gamma) {
  if (!(gamma > 0.0)) throw ParameterError("stepsize gamma must be positive");
}

}  // namespace

double CompositeProblem::surrogate_lipschitz(double mu) const {
  if (!varpi1 || !varpi2)
    throw ParameterError("Lipschitz constants varpi1/varpi2 are not set for this problem");
  return *varpi1 + *varpi2 / mu;
}

double surrogate_value(const CompositeProblem& P, double mu, const Vec& x) {
  return P.h.eval(x) + moreau_value(P.g, mu, P.S.eval(x));
}

double surrogate_total(const CompositeProblem& P, double mu, const Vec& x) {
  check_index(P.g, mu);
  // h may be undefined off dom phi.
  if (!P.phi.contains(x)) return std::numeric_limits<double>::infinity();
  return surrogate_value(P, mu, x) + P.phi.eval(x);
}

double true_cost(const CompositeProblem& P, const Vec& x) {
  if (!P.phi.contains(x)) return std::numeric_limits<double>::infinity();
  return P.h.eval(x) + P.g.eval(P.S.eval(x)) + P.phi.eval(x);
}

SurrogateEval surrogate_eval(const CompositeProblem& P, double mu, const Vec& x) {
  const MoreauEval env = moreau(P.g, mu, P.S.eval(x));
  return {P.h.eval(x) + env.value, P.h.grad(x) + P.S.jac_adjoint_apply(x, env.grad)};
}

Vec surrogate_grad(const CompositeProblem& P, double mu, const Vec& x) {
  return P.h.grad(x) + P.S.jac_adjoint_apply(x, moreau_grad(P.g, mu, P.S.eval(x)));
}

Vec prox_grad_step_from(const CompositeProblem& P, double gamma, const Vec& x, const Vec& grad) {
  require_positive_step(gamma);
  return P.phi.prox(x - gamma * grad, gamma);
}

Vec prox_grad_step(const CompositeProblem& P, double mu, double gamma, const Vec& x) {
  return prox_grad_step_from(P, gamma, x, surrogate_grad(P, mu, x));
}

double stationarity_measure(const CompositeProblem& P, double mu, double gamma, const Vec& x) {
  return (x - prox_grad_step(P, mu, gamma, x)).norm() / gamma;
}

SmoothMap identity_map() {
  SmoothMap S;
  S.eval = [](const Vec& x) { return x; };
  S.jac_apply = [](const Vec&, const Vec& v) { return v; };
  S.jac_adjoint_apply = [](const Vec&, const Vec& w) { return w; };
  return S;
}

SmoothFn half_squared_norm(double scale) {
  SmoothFn h;
  h.eval = [scale](const Vec& x) { return 0.5 * scale * x.squaredNorm(); };
  h.grad = [scale](const Vec& x) { return Vec(scale * x); };
  return h;
}

SmoothFn zero_smooth() {
  SmoothFn h;
  h.eval = [](const Vec&) { return 0.0; };
  h.grad = [](const Vec& x) { return Vec(Vec::Zero(x.size())); };
  return h;
}

}  // namespace pvs

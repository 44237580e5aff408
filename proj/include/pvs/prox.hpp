#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pvs/types.hpp"

namespace pvs {

// Proximity operators, projections and Moreau envelopes.
//
// Throughout, prox of index mu of a function g maps z to the minimizer of
//
//     g(x) + (2 mu)^{-1} ||x - z||^2,
//
// and the Moreau envelope g^mu(z) is the minimum value.

/// Real-valued, Lipschitz, eta-weakly convex function with a closed-form prox.
///
/// `prox(z, mu)` must be single-valued for every 0 < mu < 1/eta (all mu > 0 when
/// eta == 0). `subgradient` is optional and only used by subgradient-type
/// baselines; it returns one fixed element of the limiting subdifferential.
struct WeaklyConvexFn {
  std::function<double(const Vec&)> eval;
  std::function<Vec(const Vec&, double)> prox;
  double eta = 0.0;
  std::function<Vec(const Vec&)> subgradient;
  std::string name;

  /// Largest admissible index (exclusive); +inf for convex functions.
  double max_index() const;
};

/// Proper lsc convex function (possibly extended-valued) with a closed-form prox.
struct ProxFriendlyConvexFn {
  std::function<double(const Vec&)> eval;
  std::function<Vec(const Vec&, double)> prox;
  std::function<bool(const Vec&)> contains;
  std::string name;
};

// --- elementwise prox operators ------------------------------------------

/// Soft thresholding: prox of weight*||.||_1 with index mu.
Vec prox_l1(const Vec& z, double mu, double weight);

/// Minimax concave penalty with parameters (lambda, theta):
///   lambda|x| - x^2/(2 theta)   for |x| <= theta*lambda,
///   theta*lambda^2/2            otherwise.
/// It is (1/theta)-weakly convex, so the prox is unique for mu < theta.
double mcp_value(double x, double lambda, double theta);
Vec prox_mcp(const Vec& z, double mu, double lambda, double theta);

/// Smoothly clipped absolute deviation with parameters (lambda, a > 2).
/// It is 1/(a-1)-weakly convex, so the prox is unique for mu < a - 1.
double scad_value(double x, double lambda, double a);
Vec prox_scad(const Vec& z, double mu, double lambda, double a);

/// Projection onto the box [lo, hi]; infinite bounds leave a coordinate free.
Vec prox_box(const Vec& z, const Vec& lo, const Vec& hi);

/// Value of weight * (1/M) sum_m ||x - shift_m||_1.
double soav_value(const Vec& x, std::span<const Vec> shifts, double weight);

/// Exact prox of weight * (1/M) sum_m ||. - shift_m||_1, coordinatewise.
Vec prox_soav(const Vec& z, std::span<const Vec> shifts, double mu, double weight);

// --- planar projections ----------------------------------------------------

using Point2 = std::pair<double, double>;

/// Euclidean projection onto the regular M-gon with vertices exp(i 2 pi m / M).
Point2 project_regular_polygon(Point2 p, int M);

/// True if p lies in the regular M-gon (up to `slack` on the support function).
bool in_regular_polygon(Point2 p, int M, double slack = 1e-12);

/// Radial projection onto the unit circle. The origin maps to (1, 0).
Point2 project_unit_modulus(Point2 p);

// --- Moreau envelope -------------------------------------------------------

/// g(p) + (2 mu)^{-1} ||p - z||^2 with p = prox_{mu g}(z).
double moreau_value(const WeaklyConvexFn& g, double mu, const Vec& z);

/// (z - prox_{mu g}(z)) / mu.
Vec moreau_grad(const WeaklyConvexFn& g, double mu, const Vec& z);

/// Envelope value and gradient sharing one prox evaluation.
struct MoreauEval {
  double value;
  Vec grad;
};
MoreauEval moreau(const WeaklyConvexFn& g, double mu, const Vec& z);

/// Throws IndexError unless 0 < mu < g.max_index().
void check_index(const WeaklyConvexFn& g, double mu);

// --- function factories ----------------------------------------------------

/// weight * ||.||_1. `eta` may be set above zero to declare a (looser) modulus.
WeaklyConvexFn l1_norm(double weight, double eta = 0.0);
WeaklyConvexFn mcp_penalty(double lambda, double theta);
WeaklyConvexFn scad_penalty(double lambda, double a);
WeaklyConvexFn soav_penalty(std::vector<Vec> shifts, double weight);
WeaklyConvexFn zero_weakly_convex();

ProxFriendlyConvexFn zero_convex();
ProxFriendlyConvexFn box_indicator(Vec lo, Vec hi);

}  // namespace pvs

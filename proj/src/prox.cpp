#include "pvs/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace pvs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sign(double x) { return (x > 0.0) - (x < 0.0); }

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw ParameterError(std::string(what) + " must be positive");
}

// Minimizes (w/M) sum_m |x - b_m| + (x - z)^2 / (2 mu) over x for sorted b.
double soav_scalar_prox(double z, std::vector<double>& b, double mu, double w) {
  std::sort(b.begin(), b.end());
  const int M = static_cast<int>(b.size());
  const double t = mu * w / M;

  // Open linear pieces: with k breakpoints strictly below x the objective is
  // smooth and its stationary point is z - t (2k - M).
  for (int k = 0; k <= M; ++k) {
    const double lo = (k == 0) ? -kInf : b[k - 1];
    const double hi = (k == M) ? kInf : b[k];
    if (!(lo < hi)) continue;
    const double x = z - t * (2 * k - M);
    if (x > lo && x < hi) return x;
  }

  // Otherwise the minimizer sits on a kink: 0 must lie in the subdifferential
  //   (v - z)/mu + (w/M)(below - above) + (w/M)[-equal, equal].
  const double slope = w / M;
  double best = b.front();
  double best_val = kInf;
  for (int i = 0; i < M;) {
    int j = i;
    while (j < M && b[j] == b[i]) ++j;
    const double v = b[i];
    const int below = i;
    const int equal = j - i;
    const int above = M - j;
    const double center = (v - z) / mu + slope * (below - above);
    const double radius = slope * equal;
    if (center - radius <= 0.0 && 0.0 <= center + radius) return v;
    // Rounding can leave the inclusion test marginally false everywhere.
    double val = 0.0;
    for (double bm : b) val += std::abs(v - bm);
    val = slope * val + 0.5 * (v - z) * (v - z) / mu;
    if (val < best_val) {
      best_val = val;
      best = v;
    }
    i = j;
  }
  return best;
}

}  // namespace

double WeaklyConvexFn::max_index() const { return eta > 0.0 ? 1.0 / eta : kInf; }

Vec prox_l1(const Vec& z, double mu, double weight) {
  require_positive(mu, "prox index mu");
  require_positive(weight, "l1 weight");
  const double thr = mu * weight;
  return z.unaryExpr([thr](double v) { return sign(v) * std::max(std::abs(v) - thr, 0.0); });
}

double mcp_value(double x, double lambda, double theta) {
  const double a = std::abs(x);
  if (a <= theta * lambda) return lambda * a - 0.5 * a * a / theta;
  return 0.5 * theta * lambda * lambda;
}

Vec prox_mcp(const Vec& z, double mu, double lambda, double theta) {
  require_positive(mu, "prox index mu");
  require_positive(lambda, "MCP lambda");
  require_positive(theta, "MCP theta");
  if (mu >= theta) throw IndexError("MCP prox requires mu < theta (index below 1/eta)");
  const double shrink = 1.0 - mu / theta;
  return z.unaryExpr([=](double v) {
    const double a = std::abs(v);
    if (a <= mu * lambda) return 0.0;
    if (a <= theta * lambda) return sign(v) * (a - mu * lambda) / shrink;
    return v;
  });
}

double scad_value(double x, double lambda, double a) {
  const double t = std::abs(x);
  if (t <= lambda) return lambda * t;
  if (t <= a * lambda) return (2.0 * a * lambda * t - t * t - lambda * lambda) / (2.0 * (a - 1.0));
  return 0.5 * (a + 1.0) * lambda * lambda;
}

Vec prox_scad(const Vec& z, double mu, double lambda, double a) {
  require_positive(mu, "prox index mu");
  require_positive(lambda, "SCAD lambda");
  if (!(a > 2.0)) throw ParameterError("SCAD shape a must exceed 2");
  if (mu >= a - 1.0) throw IndexError("SCAD prox requires mu < a - 1 (index below 1/eta)");
  return z.unaryExpr([=](double v) {
    const double t = std::abs(v);
    if (t <= lambda * (1.0 + mu)) return sign(v) * std::max(t - mu * lambda, 0.0);
    if (t <= a * lambda) return ((a - 1.0) * v - sign(v) * mu * a * lambda) / (a - 1.0 - mu);
    return v;
  });
}

Vec prox_box(const Vec& z, const Vec& lo, const Vec& hi) {
  if (lo.size() != z.size() || hi.size() != z.size())
    throw ParameterError("box bounds must match the input dimension");
  if ((lo.array() > hi.array()).any()) throw ParameterError("box requires lo <= hi");
  return z.cwiseMax(lo).cwiseMin(hi);
}

double soav_value(const Vec& x, std::span<const Vec> shifts, double weight) {
  if (shifts.empty()) throw ParameterError("SOAV needs at least one shift");
  double total = 0.0;
  for (const Vec& s : shifts) total += (x - s).lpNorm<1>();
  return weight * total / static_cast<double>(shifts.size());
}

Vec prox_soav(const Vec& z, std::span<const Vec> shifts, double mu, double weight) {
  if (shifts.empty()) throw ParameterError("SOAV needs at least one shift");
  require_positive(mu, "prox index mu");
  require_positive(weight, "SOAV weight");
  for (const Vec& s : shifts)
    if (s.size() != z.size()) throw ParameterError("SOAV shift dimension mismatch");

  Vec out(z.size());
  std::vector<double> breaks(shifts.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    for (std::size_t m = 0; m < shifts.size(); ++m) breaks[m] = shifts[m][j];
    out[j] = soav_scalar_prox(z[j], breaks, mu, weight);
  }
  return out;
}

Point2 project_regular_polygon(Point2 p, int M) {
  if (M < 3) throw ParameterError("regular polygon needs M >= 3");
  const double delta = 2.0 * std::numbers::pi / M;
  double phi = std::atan2(p.second, p.first);
  if (phi < 0.0) phi += 2.0 * std::numbers::pi;
  const int k = std::clamp(static_cast<int>(std::floor(phi / delta)), 0, M - 1);

  // Rotate the wedge [k delta, (k+1) delta] onto [0, delta].
  const double c = std::cos(k * delta), s = std::sin(k * delta);
  const double x = c * p.first + s * p.second;
  const double y = -s * p.first + c * p.second;

  const double nx = std::cos(0.5 * delta), ny = std::sin(0.5 * delta);
  if (x * nx + y * ny <= nx) return p;

  const double ex = std::cos(delta) - 1.0, ey = std::sin(delta);
  const double t = std::clamp(((x - 1.0) * ex + y * ey) / (ex * ex + ey * ey), 0.0, 1.0);
  const double qx = 1.0 + t * ex, qy = t * ey;
  return {c * qx - s * qy, s * qx + c * qy};
}

bool in_regular_polygon(Point2 p, int M, double slack) {
  if (M < 3) throw ParameterError("regular polygon needs M >= 3");
  const double delta = 2.0 * std::numbers::pi / M;
  const double apothem = std::cos(0.5 * delta);
  for (int m = 0; m < M; ++m) {
    const double a = (m + 0.5) * delta;
    if (p.first * std::cos(a) + p.second * std::sin(a) > apothem + slack) return false;
  }
  return true;
}

Point2 project_unit_modulus(Point2 p) {
  const double n = std::hypot(p.first, p.second);
  if (n == 0.0) return {1.0, 0.0};
  return {p.first / n, p.second / n};
}

void check_index(const WeaklyConvexFn& g, double mu) {
  if (!(mu > 0.0) || !(mu < g.max_index()))
    throw IndexError("Moreau index must lie in (0, 1/eta) for " +
                     (g.name.empty() ? std::string("g") : g.name));
}

MoreauEval moreau(const WeaklyConvexFn& g, double mu, const Vec& z) {
  check_index(g, mu);
  const Vec p = g.prox(z, mu);
  const Vec d = z - p;
  return {g.eval(p) + 0.5 * d.squaredNorm() / mu, d / mu};
}

double moreau_value(const WeaklyConvexFn& g, double mu, const Vec& z) {
  check_index(g, mu);
  const Vec p = g.prox(z, mu);
  return g.eval(p) + 0.5 * (p - z).squaredNorm() / mu;
}

Vec moreau_grad(const WeaklyConvexFn& g, double mu, const Vec& z) {
  check_index(g, mu);
  return (z - g.prox(z, mu)) / mu;
}

WeaklyConvexFn l1_norm(double weight, double eta) {
  require_positive(weight, "l1 weight");
  if (eta < 0.0) throw ParameterError("weak-convexity modulus must be nonnegative");
  WeaklyConvexFn g;
  g.eval = [weight](const Vec& x) { return weight * x.lpNorm<1>(); };
  g.prox = [weight](const Vec& z, double mu) { return prox_l1(z, mu, weight); };
  g.eta = eta;
  // sign(0) = 0 picks the minimal-norm subgradient.
  g.subgradient = [weight](const Vec& x) {
    return Vec(x.unaryExpr([weight](double v) { return weight * sign(v); }));
  };
  g.name = "l1";
  return g;
}

WeaklyConvexFn mcp_penalty(double lambda, double theta) {
  require_positive(lambda, "MCP lambda");
  require_positive(theta, "MCP theta");
  WeaklyConvexFn g;
  g.eval = [=](const Vec& x) {
    double s = 0.0;
    for (double v : x) s += mcp_value(v, lambda, theta);
    return s;
  };
  g.prox = [=](const Vec& z, double mu) { return prox_mcp(z, mu, lambda, theta); };
  g.eta = 1.0 / theta;
  g.subgradient = [=](const Vec& x) {
    return Vec(x.unaryExpr([=](double v) {
      return std::abs(v) <= theta * lambda ? lambda * sign(v) - v / theta : 0.0;
    }));
  };
  g.name = "mcp";
  return g;
}

WeaklyConvexFn scad_penalty(double lambda, double a) {
  require_positive(lambda, "SCAD lambda");
  if (!(a > 2.0)) throw ParameterError("SCAD shape a must exceed 2");
  WeaklyConvexFn g;
  g.eval = [=](const Vec& x) {
    double s = 0.0;
    for (double v : x) s += scad_value(v, lambda, a);
    return s;
  };
  g.prox = [=](const Vec& z, double mu) { return prox_scad(z, mu, lambda, a); };
  g.eta = 1.0 / (a - 1.0);
  g.subgradient = [=](const Vec& x) {
    return Vec(x.unaryExpr([=](double v) {
      const double t = std::abs(v);
      if (t <= lambda) return lambda * sign(v);
      if (t <= a * lambda) return (a * lambda * sign(v) - v) / (a - 1.0);
      return 0.0;
    }));
  };
  g.name = "scad";
  return g;
}

WeaklyConvexFn soav_penalty(std::vector<Vec> shifts, double weight) {
  if (shifts.empty()) throw ParameterError("SOAV needs at least one shift");
  require_positive(weight, "SOAV weight");
  WeaklyConvexFn g;
  g.eval = [shifts, weight](const Vec& x) { return soav_value(x, shifts, weight); };
  g.prox = [shifts, weight](const Vec& z, double mu) {
    return prox_soav(z, shifts, mu, weight);
  };
  g.eta = 0.0;
  g.subgradient = [shifts, weight](const Vec& x) {
    Vec u = Vec::Zero(x.size());
    for (const Vec& s : shifts) u += (x - s).unaryExpr([](double v) { return sign(v); });
    return Vec(weight * u / static_cast<double>(shifts.size()));
  };
  g.name = "soav";
  return g;
}

WeaklyConvexFn zero_weakly_convex() {
  WeaklyConvexFn g;
  g.eval = [](const Vec&) { return 0.0; };
  g.prox = [](const Vec& z, double) { return z; };
  g.eta = 0.0;
  g.subgradient = [](const Vec& x) { return Vec(Vec::Zero(x.size())); };
  g.name = "zero";
  return g;
}

ProxFriendlyConvexFn zero_convex() {
  ProxFriendlyConvexFn phi;
  phi.eval = [](const Vec&) { return 0.0; };
  phi.prox = [](const Vec& v, double) { return v; };
  phi.contains = [](const Vec&) { return true; };
  phi.name = "zero";
  return phi;
}

ProxFriendlyConvexFn box_indicator(Vec lo, Vec hi) {
  if (lo.size() != hi.size()) throw ParameterError("box bounds size mismatch");
  if ((lo.array() > hi.array()).any()) throw ParameterError("box requires lo <= hi");
  ProxFriendlyConvexFn phi;
  phi.contains = [lo, hi](const Vec& x) {
    return x.size() == lo.size() && (x.array() >= lo.array()).all() &&
           (x.array() <= hi.array()).all();
  };
  phi.eval = [contains = phi.contains](const Vec& x) { return contains(x) ? 0.0 : kInf; };
  phi.prox = [lo, hi](const Vec& v, double) { return prox_box(v, lo, hi); };
  phi.name = "box";
  return phi;
}

}  // namespace pvs

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "pvs/baselines.hpp"
#include "pvs/bench/experiments.hpp"
#include "pvs/mimo.hpp"
#include "pvs/prox.hpp"
#include "pvs/solver.hpp"

#ifndef PVS_BENCH_EXE
#error "PVS_BENCH_EXE must name the CLI binary"
#endif

using namespace pvs;
namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail.clear();
    pass = false;
    detail += (detail.empty() ? "" : "; ") + why;
  }
  void note(const std::string& s) {
    if (pass) detail += (detail.empty() ? "" : "; ") + s;
  }
};

std::string num(double v, const char* fmt = "%.3g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

Vec scalar(double x) { return Vec::Constant(1, x); }

int hardware_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// 1. Prox oracle suite.
Outcome prox_oracles() {
  Outcome out;
  std::mt19937_64 rng(20240101);
  std::uniform_real_distribution<double> U01(0, 1);
  auto uni = [&](double a, double b) { return a + (b - a) * U01(rng); };
  constexpr int kCases = 1000;
  constexpr double kStep = 1e-4, kTol = 5e-4;
  double worst = 0.0;

  auto scalar_case = [&](const char* name, const std::function<double(double)>& g, double z, double mu,
                         double p, double lo, double hi) {
    const auto obj = oracle::prox_objective(g, z, mu);
    const auto ref = oracle::grid_min(obj, lo, hi, kStep);
    const double gap = std::abs(obj(p) - ref.value);
    worst = std::max(worst, gap);
    if (gap > kTol) out.fail(std::string(name) + " z=" + num(z) + " gap " + num(gap));
  };

  for (int k = 0; k < kCases; ++k) {
    const double z = uni(-8, 8), mu = uni(0.05, 2), w = uni(0.1, 3);
    scalar_case("l1", [w](double x) { return w * std::abs(x); }, z, mu, prox_l1(scalar(z), mu, w)[0], -10, 10);
  }
  for (int k = 0; k < kCases; ++k) {
    const double lam = uni(0.2, 2), theta = uni(1.5, 4), mu = uni(0.02, 0.95) * theta, z = uni(-8, 8);
    scalar_case("mcp", [=](double x) { return oracle::mcp(x, lam, theta); }, z, mu,
                prox_mcp(scalar(z), mu, lam, theta)[0], -10, 10);
  }
  for (int k = 0; k < kCases; ++k) {
    const double lam = uni(0.2, 2), a = uni(2.5, 5), mu = uni(0.02, 0.95) * (a - 1), z = uni(-8, 8);
    scalar_case("scad", [=](double x) { return oracle::scad(x, lam, a); }, z, mu,
                prox_scad(scalar(z), mu, lam, a)[0], -10, 10);
  }
  for (int k = 0; k < kCases; ++k) {
    const int M = 2 + static_cast<int>(U01(rng) * 7);
    std::vector<double> raw(M);
    std::vector<Vec> shifts;
    for (double& c : raw) {
      c = uni(-3, 3);
      shifts.push_back(scalar(c));
    }
    const double z = uni(-6, 6), mu = uni(0.05, 2), w = uni(0.1, 3);
    scalar_case("soav", [&raw, w](double x) { return oracle::soav(x, raw, w); }, z, mu,
                prox_soav(scalar(z), shifts, mu, w)[0], -10, 10);
  }
  for (int k = 0; k < kCases; ++k) {
    double lo = uni(-5, 5), hi = uni(-5, 5);
    if (lo > hi) std::swap(lo, hi);
    const double z = uni(-8, 8);
    // The indicator restricts the search to [lo, hi].
    scalar_case("box", [](double) { return 0.0; }, z, 1.0, prox_box(scalar(z), scalar(lo), scalar(hi))[0], lo, hi);
  }
  for (int k = 0; k < kCases; ++k) {
    const int M = 3 + static_cast<int>(U01(rng) * 10);
    const double px = uni(-3, 3), py = uni(-3, 3);
    const auto [qx, qy] = project_regular_polygon({px, py}, M);
    const double got = (qx - px) * (qx - px) + (qy - py) * (qy - py);
    const double ref = oracle::polygon_sq_dist(px, py, M, kStep);
    const double gap = std::abs(got - ref);
    worst = std::max(worst, gap);
    if (gap > kTol) out.fail("polygon gap " + num(gap));
    if (!oracle::inside_polygon(qx * (1 - 1e-12), qy * (1 - 1e-12), M)) out.fail("polygon output outside the set");
  }
  for (int k = 0; k < kCases; ++k) {
    const double px = uni(-3, 3), py = uni(-3, 3);
    const auto [qx, qy] = project_unit_modulus({px, py});
    const double got = (qx - px) * (qx - px) + (qy - py) * (qy - py);
    const double gap = std::abs(got - oracle::circle_sq_dist(px, py, kStep));
    worst = std::max(worst, gap);
    if (gap > kTol || std::abs(std::hypot(qx, qy) - 1) > 1e-14) out.fail("modulus gap " + num(gap));
  }
  out.note("7000 cases, worst objective gap " + num(worst));
  return out;
}

// 2. Moreau calculus.
Outcome moreau_calculus() {
  Outcome out;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> U01(0, 1);
  auto uni = [&](double a, double b) { return a + (b - a) * U01(rng); };
  double worst = 0.0;
  int dom = 0, mono = 0;
  for (int k = 0; k < 500; ++k) {
    WeaklyConvexFn g;
    switch (k % 4) {
      case 0: g = l1_norm(uni(0.1, 3)); break;
      case 1: g = mcp_penalty(uni(0.2, 2), uni(1.5, 4)); break;
      case 2: g = scad_penalty(uni(0.2, 2), uni(2.5, 5)); break;
      default: {
        std::vector<Vec> sh;
        for (int m = 0; m < 4; ++m) sh.push_back(scalar(uni(-2, 2)));
        g = soav_penalty(sh, uni(0.1, 3));
      }
    }
    const double cap = std::min(3.0, 0.95 * g.max_index());
    const double mu = uni(0.02, 1) * cap;
    // Draw z where the prox is affine on a neighbourhood much wider than the
    // difference step, so the envelope is locally quadratic.
    double z = 0.0;
    for (int tries = 0; tries < 1000; ++tries) {
      z = uni(-6, 6);
      const double d = 1e-4;
      const double curv = g.prox(scalar(z + d), mu)[0] - 2 * g.prox(scalar(z), mu)[0] + g.prox(scalar(z - d), mu)[0];
      if (std::abs(curv) < 1e-12) break;
    }
    const double grad = moreau_grad(g, mu, scalar(z))[0];
    const double fd = oracle::central_diff([&](double t) { return moreau_value(g, mu, scalar(t)); }, z, 1e-6);
    const double rel = std::abs(fd - grad) / std::max(1.0, std::abs(grad));
    worst = std::max(worst, rel);
    if (rel >= 1e-6) out.fail("fd mismatch on " + g.name + " at z=" + num(z) + " (" + num(rel) + ")");

    const double env = moreau_value(g, mu, scalar(z)), gz = g.eval(scalar(z));
    if (env > gz + 1e-12) ++dom;
    const double mu2 = uni(0.01, 0.99) * mu;
    if (moreau_value(g, mu2, scalar(z)) < env - 1e-12) ++mono;
  }
  if (dom) out.fail(std::to_string(dom) + " domination violations");
  if (mono) out.fail(std::to_string(mono) + " monotonicity violations");
  out.note("500 cases, worst relative error " + num(worst));
  return out;
}

// 3. Surrogate chain rule.
Outcome chain_rule() {
  Outcome out;
  const auto inst = mimo::generate_instance(8, 8, 8, 20, 1);
  const auto P = mimo::build_polar_problem(inst, {0.1, 0.1, 0.1});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ur(0.1, 1), ut(-pi, pi), um(0.01, 0.5);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    Vec x(16);
    for (int i = 0; i < 8; ++i) {
      x[i] = ur(rng);
      x[8 + i] = ut(rng);
    }
    const double mu = um(rng);
    const Vec g = surrogate_grad(P, mu, x);
    Vec fd(16);
    for (int i = 0; i < 16; ++i)
      fd[i] = oracle::central_diff(
          [&](double t) {
            Vec z = x;
            z[i] = t;
            return surrogate_value(P, mu, z);
          },
          x[i], 1e-6);
    const double rel = (fd - g).norm() / std::max(1.0, g.norm());
    worst = std::max(worst, rel);
    if (rel >= 1e-6) out.fail("point " + std::to_string(k) + " relative error " + num(rel));
  }
  out.note("100 points, worst relative error " + num(worst));
  return out;
}

Vec lmmse_polar_start(const mimo::MimoInstance& inst, double r_lower) {
  const Vec s = baselines::lmmse_detect(mimo::realify_matrix(inst.H), mimo::realify_vector(inst.y), inst.sigma2);
  return mimo::polar_initial_point(s, r_lower);
}

// 4. Sufficient decrease, stationarity and feasibility.
Outcome armijo_suite() {
  Outcome out;
  SolverConfig cfg;
  cfg.c = std::ldexp(1.0, -13);
  cfg.gamma_initial = 1.0;
  cfg.rho = 0.5;
  cfg.stop.max_iterations = 3000;
  cfg.keep_iterates = true;
  const auto sched = SmoothingSchedule::standard(1.0, 3.0);
  double worst_min = 0.0;
  long checked = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto inst = mimo::generate_instance(16, 16, 8, 20, seed);
    const auto P = mimo::build_polar_problem(inst, {0.1, 0.1, 0.1});
    const auto t = run(P, lmmse_polar_start(inst, 0.1), sched, cfg);
    double running = HUGE_VAL;
    for (std::size_t k = 0; k < t.records.size(); ++k) {
      const auto& r = t.records[k];
      const Vec& x = t.iterates[k];
      const Vec& next = k + 1 < t.iterates.size() ? t.iterates[k + 1] : t.final_x;
      if (!P.phi.contains(x)) out.fail("infeasible iterate (seed " + std::to_string(seed) + ")");
      if (!armijo_test(r.cost_surrogate, surrogate_total(P, r.mu, next), x, next, r.gamma, cfg.c))
        out.fail("sufficient decrease violated at n=" + std::to_string(r.n));
      const double before = running;
      running = std::min(running, r.measure);
      if (running > before) out.fail("running minimum increased");
      ++checked;
    }
    if (!P.phi.contains(t.final_x)) out.fail("infeasible final iterate");
    if (!(t.min_measure <= 1e-3))
      out.fail("seed " + std::to_string(seed) + " min measure " + num(t.min_measure));
    worst_min = std::max(worst_min, t.min_measure);
  }
  out.note(std::to_string(checked) + " steps checked, largest min-measure " + num(worst_min));
  return out;
}

// 5. Convergence ordering against the subgradient baselines.
Outcome convergence_ordering() {
  Outcome out;
  const int trials = 20;
  std::vector<double> pvs(trials), lip(trials), heu(trials);
  bench::parallel_for(trials, hardware_threads(), [&](int t) {
    const auto inst = mimo::generate_instance(32, 32, 8, 20, static_cast<std::uint64_t>(t + 1));
    const auto P = mimo::build_polar_problem(inst, {0.1, 0.1, 0.1});
    const Vec x1 = lmmse_polar_start(inst, 0.1);
    StopRule stop;
    stop.max_iterations = 500;
    SolverConfig cfg;
    cfg.stop = stop;
    pvs[t] = true_cost(P, run(P, x1, SmoothingSchedule::standard(1, 3), cfg).final_x);
    lip[t] = true_cost(P, baselines::prox_subgradient(P, x1, baselines::SubgradientRule::lipschitz,
                                                      *P.varpi1, stop).estimate);
    heu[t] = true_cost(P, baselines::prox_subgradient(P, x1, baselines::SubgradientRule::heuristic,
                                                      *P.varpi1, stop).estimate);
  });
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  const double a = mean(pvs), b = mean(lip), c = mean(heu);
  if (!(a < b)) out.fail("pvs " + num(a, "%.6g") + " not below Sub(lipschitz) " + num(b, "%.6g"));
  if (!(a <= 1.05 * c)) out.fail("pvs " + num(a, "%.6g") + " above 1.05 x Sub(heuristic) " + num(c, "%.6g"));
  out.note("mean cost after 500 iterations: pvs " + num(a, "%.5g") + ", sub_lipschitz " + num(b, "%.5g") +
           ", sub_heuristic " + num(c, "%.5g"));
  return out;
}

// 6. BER ordering with grid-selected parameters.
Outcome ber_ordering() {
  Outcome out;
  bench::ExperimentConfig cfg;
  cfg.U = 32;
  cfg.M = 8;
  cfg.trials = 50;
  cfg.seed_base = 1;
  cfg.methods = {"pvs", "lmmse", "modulus", "soav"};
  cfg.stop.max_iterations = 2000;
  cfg.grid.validation_trials = 20;
  cfg.parallel_trials = hardware_threads();
  std::string summary;
  for (int B : {32, 24}) {
    cfg.B = B;
    for (double snr : {15.0, 20.0}) {
      const auto sel = bench::grid_select(cfg, snr);
      auto local = cfg;
      local.snr_list = {snr};
      local.pvs = sel.pvs;
      local.soav = sel.soav;
      const auto means = bench::mean_ber(bench::ber_trials(local), snr);
      auto get = [&](const std::string& m) {
        for (const auto& [k, v] : means)
          if (k == m) return v;
        return HUGE_VAL;
      };
      const double p = get("pvs"), l = get("lmmse"), mo = get("modulus"), so = get("soav");
      const std::string where = "B=" + std::to_string(B) + " SNR=" + num(snr, "%g");
      for (const auto& [name, v] : {std::pair{"soav", so}, std::pair{"modulus", mo}, std::pair{"lmmse", l}})
        if (!(p <= v)) out.fail(where + ": pvs " + num(p) + " > " + name + " " + num(v));
      for (const auto& [name, v] : {std::pair{"pvs", p}, std::pair{"modulus", mo}, std::pair{"soav", so}})
        if (!(v <= l)) out.fail(where + ": " + name + " " + num(v) + " > lmmse " + num(l));
      summary += (summary.empty() ? "" : " | ") + where + " pvs " + num(p) + " soav " + num(so) + " mod " +
                 num(mo) + " lmmse " + num(l);
    }
  }
  out.note(summary);
  return out;
}

// 7. Regularizer minimizers.
Outcome regularizer_minimizers() {
  Outcome out;
  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> ur(0.1, 1), ut(-10, 10), ul(0.01, 2);
  std::uniform_int_distribution<int> um(-50, 50);
  const int U = 8;
  const std::vector<int> orders = {4, 8, 16};
  int below = 0, equal = 0, inexact = 0, perturbed = 0;
  for (int k = 0; k < 100000; ++k) {
    const int M = orders[k % 3];
    const double lr = ul(rng), lt = ul(rng);
    Vec r(U), t(U);
    for (int u = 0; u < U; ++u) {
      r[u] = ur(rng);
      t[u] = ut(rng);
    }
    const double v = mimo::regularizer_value(r, t, lr, lt, M);
    if (v < lr * U) ++below;
    if (v == lr * U) ++equal;

    for (int u = 0; u < U; ++u) t[u] = 2 * pi * um(rng) / M;
    if (mimo::regularizer_value(Vec::Ones(U), t, lr, lt, M) != lr * U) ++inexact;
    t[k % U] += 1e-7;
    if (!(mimo::regularizer_value(Vec::Ones(U), t, lr, lt, M) > lr * U)) ++perturbed;
  }
  if (below) out.fail(std::to_string(below) + " samples below lambda_r U");
  if (equal) out.fail(std::to_string(equal) + " random samples attained the minimum");
  if (inexact) out.fail(std::to_string(inexact) + " constructed minimizers not exactly lambda_r U");
  if (perturbed) out.fail(std::to_string(perturbed) + " perturbed minimizers not strictly above");
  out.note("1e5 random samples, 1e5 constructed minimizers");
  return out;
}

// 8. Schedule invariants.
Outcome schedule_invariants() {
  Outcome out;
  const double eta = 1.0;
  for (double alpha : {1.0, 2.0, 3.0}) {
    const auto s = SmoothingSchedule::standard(eta, alpha);
    double prev = mu_at(s, 1);
    if (prev > 1 / (2 * eta)) out.fail("first term above 1/(2 eta)");
    for (long n = 2; n <= 10000; ++n) {
      const double m = mu_at(s, n);
      if (!(m < prev)) out.fail("not decreasing at n=" + std::to_string(n));
      if (m > 1 / (2 * eta)) out.fail("bound violated");
      const double q = m / prev;
      if (q < std::pow(2.0, -1 / alpha) || q > 1) out.fail("ratio out of range at n=" + std::to_string(n));
      prev = m;
    }
  }
  out.note("alpha in {1,2,3}, 1e4 terms each");
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 9. Determinism of the CLI.
Outcome cli_determinism() {
  Outcome out;
  const fs::path root = fs::temp_directory_path() / "pvs_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  const fs::path config = root / "sweep.ini";
  {
    std::ofstream c(config);
    c << "[experiment]\ntype = ber_sweep\nU = 8\nB = 8\nM = 8\nsnr_list = 10, 20\ntrials = 3\n"
         "methods = pvs, lmmse, modulus, soav\n"
         "[stop]\nmax_iters = 300\n"
         "[grid]\nauto_select = true\nvalidation_trials = 2\nlambda_r = 1e-3, 1e-1\n"
         "lambda_theta = 1e-3, 1e-1\nlambda_soav = 1e-3, 1e-1\n";
  }
  std::vector<fs::path> dirs = {root / "run1", root / "run2"};
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const std::string cmd = std::string("\"") + PVS_BENCH_EXE + "\" ber-sweep --config \"" + config.string() +
                            "\" --out \"" + dirs[i].string() + "\" --threads " + std::to_string(i + 1) +
                            " > \"" + (root / ("log" + std::to_string(i))).string() + "\" 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) out.fail("CLI run " + std::to_string(i + 1) + " exited with " + std::to_string(rc));
  }
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(dirs[0])) {
    const auto name = entry.path().filename();
    const fs::path other = dirs[1] / name;
    if (!fs::exists(other)) {
      out.fail(name.string() + " missing from second run");
      continue;
    }
    if (slurp(entry.path()) != slurp(other)) out.fail(name.string() + " differs");
    ++compared;
  }
  if (compared < 3) out.fail("expected ber.csv, grid_select.csv and ber.svg");
  out.note(std::to_string(compared) + " files byte-identical across runs (1 and 2 threads)");
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    Outcome (*fn)();
  };
  const std::vector<Criterion> criteria = {
      {1, "prox oracle suite", 30, prox_oracles},
      {2, "Moreau calculus", 10, moreau_calculus},
      {3, "surrogate chain rule", 10, chain_rule},
      {4, "sufficient decrease and stationarity", 20, armijo_suite},
      {5, "convergence ordering vs Sub", 180, convergence_ordering},
      {6, "BER ordering with grid selection", 900, ber_ordering},
      {7, "regularizer minimizers", 5, regularizer_minimizers},
      {8, "schedule invariants", 1, schedule_invariants},
      {9, "CLI determinism", 60, cli_determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= c.limit_s) o.fail("runtime " + num(secs) + " s exceeds " + num(c.limit_s, "%g") + " s");
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << c.id << ": " << c.name << " ["
              << num(secs, "%.2f") << " s / " << num(c.limit_s, "%g") << " s] " << o.detail << std::endl;
  }
  std::cout << (failures ? std::to_string(failures) + " criteria failed" : "all criteria passed") << std::endl;
  return failures ? 1 : 0;
}

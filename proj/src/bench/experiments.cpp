#include "pvs/bench/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "pvs/baselines.hpp"
#include "pvs/bench/plot.hpp"
#include "pvs/csv.hpp"

namespace pvs::bench {

namespace fs = std::filesystem;
using csv::format_double;

namespace {

std::string experiment_name(Experiment e) {
  switch (e) {
    case Experiment::convergence: return "convergence";
    case Experiment::ber_sweep: return "ber_sweep";
    case Experiment::single_solve: return "single_solve";
  }
  return "unknown";
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? ";" : "") + items[i];
  return out;
}

std::string join_numbers(const std::vector<double>& items) {
  std::vector<std::string> s;
  for (double v : items) s.push_back(format_double(v));
  return join(s);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

fs::path prepare_dir(const ExperimentConfig& cfg) {
  fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  return dir;
}

double cost_at(const std::vector<IterationRecord>& recs, double t) {
  auto it = std::upper_bound(recs.begin(), recs.end(), t,
                             [](double v, const IterationRecord& r) { return v < r.elapsed_s; });
  if (it == recs.begin()) return recs.front().cost_true;
  return std::prev(it)->cost_true;
}

Vec lmmse_start(const Mat& H, const Vec& y, double sigma2) {
  // A tiny ridge keeps the start well defined for noiseless underdetermined systems.
  return baselines::lmmse_detect(H, y, std::max(sigma2, 1e-9));
}

SolverConfig pvs_solver_config(const ExperimentConfig& cfg) {
  SolverConfig sc;
  sc.c = cfg.pvs.c;
  sc.stepsize_mode = StepsizeMode::backtracking;
  sc.gamma_initial = cfg.pvs.gamma_initial;
  sc.rho = cfg.pvs.rho;
  sc.backtrack_cap = cfg.pvs.backtrack_cap;
  sc.stop = cfg.stop;
  return sc;
}

void write_trajectory_file(const fs::path& path, const ExperimentConfig& cfg,
                           const std::string& method, int trial, std::uint64_t seed,
                           const std::vector<IterationRecord>& recs) {
  CsvMetadata meta = base_metadata(cfg);
  meta.emplace_back("method", method);
  meta.emplace_back("trial", std::to_string(trial));
  meta.emplace_back("seed", std::to_string(seed));
  auto out = open_out(path);
  write_trajectory_csv(out, recs, meta);
}

}  // namespace

void parallel_for(int n, int threads, const std::function<void(int)>& f) {
  const int workers = std::max(1, std::min(threads, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

CsvMetadata base_metadata(const ExperimentConfig& cfg) {
  return {{"library_version", kLibraryVersion},
          {"config_hash", cfg.config_hash},
          {"experiment", experiment_name(cfg.experiment)},
          {"U", std::to_string(cfg.U)},
          {"B", std::to_string(cfg.B)},
          {"M", std::to_string(cfg.M)},
          {"snr_list", join_numbers(cfg.snr_list)},
          {"trials", std::to_string(cfg.trials)},
          {"seed_base", std::to_string(cfg.seed_base)},
          {"seed_rule", "seed_base+trial"},
          {"methods", join(cfg.methods)},
          {"bit_mapping", "gray"}};
}

MethodRun run_method(const std::string& method, const mimo::MimoInstance& inst,
                     const ExperimentConfig& cfg) {
  using clock = std::chrono::steady_clock;
  const Mat H = mimo::realify_matrix(inst.H);
  const Vec y = mimo::realify_vector(inst.y);
  MethodRun out;
  out.method = method;

  if (method == "lmmse") {
    const auto t0 = clock::now();
    out.estimate = baselines::lmmse_detect(H, y, inst.sigma2);
    out.runtime_s = std::chrono::duration<double>(clock::now() - t0).count();
    out.stop_reason = StopReason::x_change;
    return out;
  }

  const Vec start = lmmse_start(H, y, inst.sigma2);
  baselines::BaselineResult base;
  if (method == "modulus") {
    base = baselines::modulus_pgd(H, y, baselines::project_unit_modulus_pairs(start),
                                  cfg.modulus.gamma, cfg.stop);
  } else if (method == "soav") {
    baselines::SoavConfig sc;
    sc.stop = cfg.stop;
    sc.sigma = cfg.soav.sigma;
    sc.x1 = start;
    base = baselines::soav_primal_dual(H, y, cfg.soav.lambda, inst.M, sc);
  } else if (method == "pvs" || method == "sub_lipschitz" || method == "sub_heuristic") {
    const mimo::PolarParams pp{cfg.pvs.lambda_r, cfg.pvs.lambda_theta, cfg.pvs.r_lower};
    const CompositeProblem P = mimo::build_polar_problem(H, y, inst.M, pp);
    const Vec x1 = mimo::polar_initial_point(start, pp.r_lower);
    if (method == "pvs") {
      const SmoothingSchedule sched{cfg.pvs.eta, cfg.pvs.alpha, 0.5 / cfg.pvs.eta};
      Trajectory traj = run(P, x1, sched, pvs_solver_config(cfg));
      out.estimate = mimo::polar_estimate(traj.final_x);
      out.iterations = static_cast<long>(traj.records.size());
      out.runtime_s = traj.solve_time_s;
      out.stop_reason = traj.stop_reason;
      out.trajectory = std::move(traj.records);
      return out;
    }
    const auto rule = method == "sub_lipschitz" ? baselines::SubgradientRule::lipschitz
                                                : baselines::SubgradientRule::heuristic;
    base = baselines::prox_subgradient(P, x1, rule, *P.varpi1, cfg.stop);
    base.estimate = mimo::polar_estimate(base.estimate);
  } else {
    throw ConfigError("unknown method '" + method + "'");
  }
  out.estimate = std::move(base.estimate);
  out.iterations = static_cast<long>(base.trajectory.size());
  out.runtime_s = base.solve_time_s;
  out.stop_reason = base.stop_reason;
  out.trajectory = std::move(base.trajectory);
  return out;
}

std::vector<BerRow> ber_trials(const ExperimentConfig& cfg) {
  const int nsnr = static_cast<int>(cfg.snr_list.size());
  const int jobs = nsnr * cfg.trials;
  std::vector<std::vector<BerRow>> slots(jobs);
  parallel_for(jobs, cfg.parallel_trials, [&](int j) {
    const double snr = cfg.snr_list[j / cfg.trials];
    const int trial = j % cfg.trials;
    const auto inst = mimo::generate_instance(cfg.U, cfg.B, cfg.M, snr, cfg.trial_seed(trial));
    for (const auto& m : cfg.methods) {
      const MethodRun r = run_method(m, inst, cfg);
      const double ber =
          mimo::bit_error_rate(mimo::psk_demodulate(r.estimate, cfg.M), inst.s_indices, cfg.M);
      slots[j].push_back({m, snr, trial, ber, r.iterations, r.runtime_s});
    }
  });
  std::vector<BerRow> rows;
  for (auto& s : slots)
    for (auto& r : s) rows.push_back(std::move(r));
  return rows;
}

std::vector<std::pair<std::string, double>> mean_ber(const std::vector<BerRow>& rows,
                                                     double snr_db) {
  std::vector<std::pair<std::string, double>> out;
  std::vector<int> counts;
  for (const auto& r : rows) {
    if (r.snr_db != snr_db) continue;
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& p) { return p.first == r.method; });
    if (it == out.end()) {
      out.emplace_back(r.method, 0.0);
      counts.push_back(0);
      it = std::prev(out.end());
    }
    it->second += r.ber;
    ++counts[static_cast<std::size_t>(it - out.begin())];
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].second /= counts[i];
  return out;
}

GridSelection grid_select(const ExperimentConfig& cfg, double snr_db) {
  const auto uses = [&](const char* m) {
    return std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end();
  };
  const bool do_pvs = uses("pvs"), do_soav = uses("soav");
  auto sorted = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  const auto lr = sorted(cfg.grid.lambda_r), lt = sorted(cfg.grid.lambda_theta),
             ls = sorted(cfg.grid.lambda_soav);
  if (do_pvs && (lr.empty() || lt.empty())) throw ConfigError("empty pvs parameter grid");
  if (do_soav && ls.empty()) throw ConfigError("empty soav parameter grid");

  struct Candidate {
    std::string method;
    double a, b;
  };
  std::vector<Candidate> cands;
  if (do_pvs)
    for (double a : lr)
      for (double b : lt) cands.push_back({"pvs", a, b});
  if (do_soav)
    for (double a : ls) cands.push_back({"soav", a, 0.0});

  const int T = cfg.grid.validation_trials;
  std::vector<std::vector<double>> ber(T, std::vector<double>(cands.size(), 0.0));
  std::vector<std::vector<double>> mse = ber;
  parallel_for(T, cfg.parallel_trials, [&](int t) {
    const auto inst = mimo::generate_instance(cfg.U, cfg.B, cfg.M, snr_db,
                                              cfg.grid.validation_seed_base + static_cast<std::uint64_t>(t));
    const Vec truth = mimo::realify_vector(inst.symbols());
    ExperimentConfig local = cfg;
    for (std::size_t k = 0; k < cands.size(); ++k) {
      const auto& c = cands[k];
      if (c.method == "pvs") {
        local.pvs.lambda_r = c.a;
        local.pvs.lambda_theta = c.b;
      } else {
        local.soav.lambda = c.a;
      }
      const MethodRun r = run_method(c.method, inst, local);
      ber[t][k] = mimo::bit_error_rate(mimo::psk_demodulate(r.estimate, cfg.M), inst.s_indices, cfg.M);
      mse[t][k] = (r.estimate - truth).squaredNorm() / static_cast<double>(truth.size());
    }
  });

  GridSelection sel;
  sel.snr_db = snr_db;
  sel.pvs = cfg.pvs;
  sel.soav = cfg.soav;
  double best_pvs = HUGE_VAL, best_soav = HUGE_VAL;
  for (std::size_t k = 0; k < cands.size(); ++k) {
    double mean = 0.0, mean_mse = 0.0;
    for (int t = 0; t < T; ++t) {
      mean += ber[t][k];
      mean_mse += mse[t][k];
    }
    mean /= T;
    mean_mse /= T;
    const auto& c = cands[k];
    sel.log.push_back({c.method, c.a, c.b, mean, mean_mse});
    // Candidates are visited in ascending order, so strict improvement keeps the
    // smaller values on ties.
    if (c.method == "pvs" && mean < best_pvs) {
      best_pvs = mean;
      sel.pvs.lambda_r = c.a;
      sel.pvs.lambda_theta = c.b;
    } else if (c.method == "soav" && mean < best_soav) {
      best_soav = mean;
      sel.soav.lambda = c.a;
    }
  }
  return sel;
}

namespace {

void write_grid_log(std::ostream& out, const ExperimentConfig& cfg,
                    const std::vector<GridSelection>& sels) {
  CsvMetadata meta = base_metadata(cfg);
  meta.emplace_back("validation_trials", std::to_string(cfg.grid.validation_trials));
  meta.emplace_back("validation_seed_base", std::to_string(cfg.grid.validation_seed_base));
  csv::write_metadata(out, meta);
  out << "snr_db,method,lambda_a,lambda_b,mean_ber,mean_mse,selected\n";
  for (const auto& s : sels)
    for (const auto& p : s.log) {
      const bool chosen = p.method == "pvs"
                              ? (p.lambda_a == s.pvs.lambda_r && p.lambda_b == s.pvs.lambda_theta)
                              : p.lambda_a == s.soav.lambda;
      out << format_double(s.snr_db) << ',' << p.method << ',' << format_double(p.lambda_a) << ','
          << format_double(p.lambda_b) << ',' << format_double(p.mean_ber) << ',' << format_double(p.mean_mse) << ',' << (chosen ? 1 : 0)
          << '\n';
    }
}

}  // namespace

Report run_grid_select(const ExperimentConfig& cfg) {
  const fs::path dir = prepare_dir(cfg);
  std::vector<GridSelection> sels;
  for (double snr : cfg.snr_list) sels.push_back(grid_select(cfg, snr));
  Report rep;
  const fs::path path = dir / "grid_select.csv";
  auto out = open_out(path);
  write_grid_log(out, cfg, sels);
  rep.files.push_back(path.string());
  return rep;
}

Report run_ber_sweep(const ExperimentConfig& cfg) {
  const fs::path dir = prepare_dir(cfg);
  Report rep;
  std::vector<BerRow> rows;
  if (cfg.grid.auto_select) {
    std::vector<GridSelection> sels;
    for (double snr : cfg.snr_list) {
      GridSelection sel = grid_select(cfg, snr);
      ExperimentConfig local = cfg;
      local.snr_list = {snr};
      local.pvs = sel.pvs;
      local.soav = sel.soav;
      for (auto& r : ber_trials(local)) rows.push_back(std::move(r));
      sels.push_back(std::move(sel));
    }
    const fs::path gpath = dir / "grid_select.csv";
    auto gout = open_out(gpath);
    write_grid_log(gout, cfg, sels);
    rep.files.push_back(gpath.string());
  } else {
    rows = ber_trials(cfg);
  }

  const CsvMetadata meta = base_metadata(cfg);
  const fs::path ber_path = dir / "ber.csv";
  {
    auto out = open_out(ber_path);
    csv::write_metadata(out, meta);
    out << "method,snr_db,trial,ber,iterations\n";
    for (const auto& r : rows)
      out << r.method << ',' << format_double(r.snr_db) << ',' << r.trial << ','
          << format_double(r.ber) << ',' << r.iterations << '\n';
  }
  rep.files.push_back(ber_path.string());

  if (cfg.write_timing) {
    const fs::path rt_path = dir / "runtime.csv";
    auto out = open_out(rt_path);
    csv::write_metadata(out, meta);
    out << "method,snr_db,trial,runtime_s\n";
    for (const auto& r : rows)
      out << r.method << ',' << format_double(r.snr_db) << ',' << r.trial << ','
          << format_double(r.runtime_s) << '\n';
    rep.files.push_back(rt_path.string());
  }

  const fs::path svg_path = dir / "ber.svg";
  PlotSpec spec = default_plot_spec(PlotKind::ber);
  spec.title = "Mean BER vs SNR (U=" + std::to_string(cfg.U) + ", B=" + std::to_string(cfg.B) + ")";
  for (auto& w : emit_plot(ber_path.string(), spec, svg_path.string())) rep.warnings.push_back(w);
  rep.files.push_back(svg_path.string());
  return rep;
}

Report run_convergence(const ExperimentConfig& cfg) {
  const fs::path dir = prepare_dir(cfg);
  const double snr = cfg.snr_list.front();
  const int nm = static_cast<int>(cfg.methods.size());
  std::vector<std::vector<MethodRun>> runs(cfg.trials);
  parallel_for(cfg.trials, cfg.parallel_trials, [&](int t) {
    const auto inst = mimo::generate_instance(cfg.U, cfg.B, cfg.M, snr, cfg.trial_seed(t));
    for (const auto& m : cfg.methods) runs[t].push_back(run_method(m, inst, cfg));
  });

  Report rep;
  for (int t = 0; t < cfg.trials; ++t)
    for (int k = 0; k < nm; ++k) {
      const fs::path p = dir / ("traj_" + cfg.methods[k] + "_t" + std::to_string(t) + ".csv");
      write_trajectory_file(p, cfg, cfg.methods[k], t, cfg.trial_seed(t), runs[t][k].trajectory);
      rep.files.push_back(p.string());
    }

  double horizon = cfg.stop.time_budget_s.value_or(0.0);
  if (!cfg.stop.time_budget_s)
    for (const auto& tr : runs)
      for (const auto& r : tr) horizon = std::max(horizon, r.trajectory.back().elapsed_s);

  const fs::path agg = dir / "convergence_mean.csv";
  {
    auto out = open_out(agg);
    CsvMetadata meta = base_metadata(cfg);
    meta.emplace_back("time_grid_points", std::to_string(cfg.time_grid_points));
    csv::write_metadata(out, meta);
    out << "time_s";
    for (const auto& m : cfg.methods) out << ',' << m;
    out << '\n';
    const int G = cfg.time_grid_points;
    for (int i = 0; i < G; ++i) {
      const double t = horizon * i / (G - 1);
      out << format_double(t);
      for (int k = 0; k < nm; ++k) {
        double mean = 0.0;
        for (int tr = 0; tr < cfg.trials; ++tr) mean += cost_at(runs[tr][k].trajectory, t);
        out << ',' << format_double(mean / cfg.trials);
      }
      out << '\n';
    }
  }
  rep.files.push_back(agg.string());

  const fs::path svg = dir / "convergence.svg";
  PlotSpec spec = default_plot_spec(PlotKind::convergence);
  spec.title = "Mean cost vs time (U=" + std::to_string(cfg.U) + ", B=" + std::to_string(cfg.B) + ")";
  for (auto& w : emit_plot(agg.string(), spec, svg.string())) rep.warnings.push_back(w);
  rep.files.push_back(svg.string());
  return rep;
}

Report run_single_solve(const ExperimentConfig& cfg, const mimo::MimoInstance* instance) {
  const fs::path dir = prepare_dir(cfg);
  mimo::MimoInstance generated;
  if (!instance) {
    generated = mimo::generate_instance(cfg.U, cfg.B, cfg.M, cfg.snr_list.front(), cfg.seed_base);
    instance = &generated;
  }
  Report rep;
  const fs::path summary = dir / "summary.csv";
  auto sout = open_out(summary);
  CsvMetadata meta = base_metadata(cfg);
  meta.emplace_back("instance_seed", std::to_string(instance->seed));
  csv::write_metadata(sout, meta);
  sout << "method,ber,iterations,stop_reason,runtime_s\n";
  for (const auto& m : cfg.methods) {
    const MethodRun r = run_method(m, *instance, cfg);
    const double ber = mimo::bit_error_rate(mimo::psk_demodulate(r.estimate, instance->M),
                                            instance->s_indices, instance->M);
    sout << m << ',' << format_double(ber) << ',' << r.iterations << ','
         << to_string(r.stop_reason) << ',' << format_double(r.runtime_s) << '\n';
    if (!r.trajectory.empty()) {
      const fs::path p = dir / ("traj_" + m + ".csv");
      write_trajectory_file(p, cfg, m, 0, instance->seed, r.trajectory);
      rep.files.push_back(p.string());
    }
  }
  rep.files.push_back(summary.string());
  return rep;
}

}  // namespace pvs::bench

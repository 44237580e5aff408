#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pvs/bench/config.hpp"
#include "pvs/bench/experiments.hpp"
#include "pvs/bench/plot.hpp"
#include "pvs/csv.hpp"

using namespace pvs;
using namespace pvs::bench;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pvs_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

csv::Table table(const fs::path& p) {
  std::ifstream in(p);
  return csv::read_table(in);
}

ExperimentConfig small(Experiment e) {
  ExperimentConfig cfg;
  cfg.experiment = e;
  cfg.U = cfg.B = 8;
  cfg.trials = 2;
  cfg.snr_list = {10, 20};
  cfg.stop.max_iterations = 200;
  return cfg;
}

}  // namespace

TEST_CASE("csv helpers") {
  CHECK(csv::format_double(0.1) == "0.10000000000000001");
  CHECK(csv::format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(csv::parse_double("0.10000000000000001", 1) == 0.1);
  CHECK_THROWS_AS(csv::parse_double("abc", 4), csv::ParseError);
  CHECK(csv::split("a,b,,c") == std::vector<std::string>{"a", "b", "", "c"});
  std::stringstream ss("# k=v\nx,y\n1,2\n3\n");
  try {
    csv::read_table(ss);
    FAIL("expected ParseError");
  } catch (const csv::ParseError& e) {
    CHECK(e.line() == 4);
  }
}

TEST_CASE("config parsing") {
  const std::string text =
      "# comment\n"
      "type = convergence\n"
      "[experiment]\n"
      "U = 16\nB=12\nM = 8\n"
      "snr_list = 5, 10\n"
      "methods = pvs, sub_heuristic\n"
      "; another comment\n"
      "[pvs]\nc = 2^-13\nlambda_r = 0.01\n"
      "[stop]\nmax_iters = 300\ntime_budget_s = none\n"
      "[output]\ndir = somewhere\n";
  const auto cfg = parse_config(text);
  CHECK(cfg.experiment == Experiment::convergence);
  CHECK(cfg.U == 16);
  CHECK(cfg.B == 12);
  CHECK(cfg.snr_list == std::vector<double>{5, 10});
  CHECK(cfg.methods == std::vector<std::string>{"pvs", "sub_heuristic"});
  CHECK(cfg.pvs.c == std::ldexp(1.0, -13));
  CHECK(cfg.pvs.lambda_r == 0.01);
  CHECK(cfg.stop.max_iterations == 300);
  CHECK_FALSE(cfg.stop.time_budget_s.has_value());
  CHECK(cfg.output_dir == "somewhere");
  CHECK(cfg.config_hash.size() == 16);

  // The output location does not change the hash; parameters do.
  auto map = parse_config_map(text);
  apply_override(map, "output.dir=elsewhere");
  CHECK(config_from_map(map).config_hash == cfg.config_hash);
  apply_override(map, "U=32");
  const auto changed = config_from_map(map);
  CHECK(changed.U == 32);
  CHECK(changed.config_hash != cfg.config_hash);

  CHECK_THROWS_AS(parse_config("[pvs]\nbogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("methods = pvs, nope\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("type = convergence\nmethods = lmmse\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("trials = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("M = 6\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("U = x\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.ini"), ConfigError);
  CHECK(decade_grid(-2, 0) == std::vector<double>{1e-2, 1e-1, 1.0});
  CHECK(ExperimentConfig{}.trial_seed(3) == 4);
}

TEST_CASE("plot rendering") {
  SUBCASE("empty data draws axes with a warning") {
    std::stringstream ss("method,snr_db,ber\n");
    const auto res = render_plot(csv::read_table(ss), default_plot_spec(PlotKind::ber));
    CHECK(res.warnings.size() == 1);
    CHECK(res.svg.find("<svg") != std::string::npos);
    CHECK(res.svg.find("<polyline") == std::string::npos);
  }
  SUBCASE("one polyline per convergence method") {
    std::stringstream ss("time_s,pvs,sub_lipschitz,sub_heuristic\n0,3,4,5\n0.5,2,3.5,4\n1,1,3,2\n");
    const auto res = render_plot(csv::read_table(ss), default_plot_spec(PlotKind::convergence));
    std::size_t count = 0;
    for (auto pos = res.svg.find("<polyline"); pos != std::string::npos; pos = res.svg.find("<polyline", pos + 1))
      ++count;
    CHECK(count == 3);
    CHECK(res.warnings.empty());
  }
  SUBCASE("zero BER is drawn at machine epsilon") {
    std::stringstream a("method,snr_db,ber\npvs,0,0.1\npvs,10,0\n");
    const auto with_zero = render_plot(csv::read_table(a), default_plot_spec(PlotKind::ber));
    CHECK(with_zero.warnings.empty());
    CHECK(with_zero.svg.find("1e-16") != std::string::npos);
  }
  SUBCASE("schema mismatch names the line") {
    std::stringstream ss("method,snr_db,ber\npvs,zero,0.1\n");
    try {
      render_plot(csv::read_table(ss), default_plot_spec(PlotKind::ber));
      FAIL("expected ParseError");
    } catch (const csv::ParseError& e) {
      CHECK(e.line() == 2);
    }
    std::stringstream missing("method,ber\npvs,0.1\n");
    CHECK_THROWS_AS(render_plot(csv::read_table(missing), default_plot_spec(PlotKind::ber)), csv::ParseError);
  }
  SUBCASE("deterministic output") {
    const std::string data = "method,snr_db,ber\npvs,0,0.1\nlmmse,0,0.2\npvs,5,0.01\nlmmse,5,0.05\n";
    std::stringstream a(data), b(data);
    CHECK(render_plot(csv::read_table(a), default_plot_spec(PlotKind::ber)).svg ==
          render_plot(csv::read_table(b), default_plot_spec(PlotKind::ber)).svg);
  }
}

TEST_CASE("run_convergence file contract") {
  auto cfg = small(Experiment::convergence);
  cfg.trials = 1;
  cfg.methods = {"pvs", "sub_lipschitz", "sub_heuristic"};
  cfg.stop.max_iterations = 1000000;
  cfg.stop.time_budget_s = 0.05;
  cfg.time_grid_points = 37;
  cfg.output_dir = scratch("conv").string();
  const auto rep = run_convergence(cfg);
  CHECK(rep.files.size() == 5);
  for (const auto& m : cfg.methods) CHECK(fs::exists(fs::path(cfg.output_dir) / ("traj_" + m + "_t0.csv")));
  const auto agg = table(fs::path(cfg.output_dir) / "convergence_mean.csv");
  CHECK(agg.rows.size() == 37);
  CHECK(agg.header == std::vector<std::string>{"time_s", "pvs", "sub_lipschitz", "sub_heuristic"});
  bool has_hash = false;
  for (const auto& [k, v] : agg.metadata) has_hash |= (k == "config_hash" && v == cfg.config_hash);
  CHECK(has_hash);
  CHECK(fs::exists(fs::path(cfg.output_dir) / "convergence.svg"));
}

TEST_CASE("run_ber_sweep row count, metadata and determinism") {
  auto cfg = small(Experiment::ber_sweep);
  cfg.config_hash = "abc";
  cfg.output_dir = scratch("ber1").string();
  run_ber_sweep(cfg);
  const auto t = table(fs::path(cfg.output_dir) / "ber.csv");
  CHECK(t.rows.size() == cfg.methods.size() * cfg.snr_list.size() * cfg.trials);
  CHECK(t.header == std::vector<std::string>{"method", "snr_db", "trial", "ber", "iterations"});
  CHECK_FALSE(fs::exists(fs::path(cfg.output_dir) / "runtime.csv"));
  const std::string first = slurp(fs::path(cfg.output_dir) / "ber.csv");

  cfg.parallel_trials = 3;
  cfg.write_timing = true;
  cfg.output_dir = scratch("ber2").string();
  run_ber_sweep(cfg);
  CHECK(slurp(fs::path(cfg.output_dir) / "ber.csv") == first);
  CHECK(table(fs::path(cfg.output_dir) / "runtime.csv").rows.size() == t.rows.size());
}

TEST_CASE("noiseless sweep recovers every symbol") {
  auto cfg = small(Experiment::ber_sweep);
  cfg.snr_list = {std::numeric_limits<double>::infinity()};
  cfg.stop.max_iterations = 3000;
  cfg.stop.x_change_tolerance = 1e-9;
  cfg.pvs.lambda_r = cfg.pvs.lambda_theta = 1e-3;
  cfg.soav.lambda = 1e-3;
  for (const auto& r : ber_trials(cfg)) CHECK_MESSAGE(r.ber == 0.0, r.method);
}

TEST_CASE("grid_select") {
  auto cfg = small(Experiment::ber_sweep);
  cfg.methods = {"pvs", "soav"};
  cfg.grid.validation_trials = 2;

  SUBCASE("singleton grid") {
    cfg.grid.lambda_r = {0.01};
    cfg.grid.lambda_theta = {0.1};
    cfg.grid.lambda_soav = {0.5};
    const auto sel = grid_select(cfg, 10);
    CHECK(sel.pvs.lambda_r == 0.01);
    CHECK(sel.pvs.lambda_theta == 0.1);
    CHECK(sel.soav.lambda == 0.5);
    CHECK(sel.log.size() == 2);
  }
  SUBCASE("ties go to the smaller value") {
    // Noiseless and easy, so every grid point reaches BER 0.
    cfg.U = cfg.B = 4;
    cfg.stop.max_iterations = 2000;
    cfg.grid.lambda_r = {1e-2, 1e-3};
    cfg.grid.lambda_theta = {1e-2, 1e-3};
    cfg.grid.lambda_soav = {1e-2, 1e-3};
    const auto sel = grid_select(cfg, std::numeric_limits<double>::infinity());
    for (const auto& p : sel.log) REQUIRE(p.mean_ber == 0.0);
    CHECK(sel.pvs.lambda_r == 1e-3);
    CHECK(sel.pvs.lambda_theta == 1e-3);
    CHECK(sel.soav.lambda == 1e-3);
  }
  SUBCASE("default grid has 7 x 7 points") {
    cfg.methods = {"pvs"};
    cfg.grid.validation_trials = 1;
    cfg.stop.max_iterations = 20;
    CHECK(grid_select(cfg, 10).log.size() == 49);
  }
  SUBCASE("empty grid") {
    cfg.grid.lambda_soav.clear();
    CHECK_THROWS_AS(grid_select(cfg, 10), ConfigError);
  }
}

TEST_CASE("run_single_solve") {
  auto cfg = small(Experiment::single_solve);
  cfg.output_dir = scratch("single").string();
  const auto rep = run_single_solve(cfg);
  const auto t = table(fs::path(cfg.output_dir) / "summary.csv");
  CHECK(t.rows.size() == cfg.methods.size());
  CHECK(fs::exists(fs::path(cfg.output_dir) / "traj_pvs.csv"));
}

TEST_CASE("parallel_for propagates exceptions") {
  std::vector<int> hits(10, 0);
  parallel_for(10, 4, [&](int i) { hits[i] = 1; });
  CHECK(std::count(hits.begin(), hits.end(), 1) == 10);
  CHECK_THROWS_AS(parallel_for(10, 3, [](int i) {
                    if (i == 7) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}

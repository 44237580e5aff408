#include "pvs/bench/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "pvs/mimo.hpp"

namespace pvs::bench {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

double parse_number(const std::string& key, const std::string& raw) {
  const std::string v = lower(trim(raw));
  if (v == "inf" || v == "+inf") return HUGE_VAL;
  if (v == "-inf") return -HUGE_VAL;
  // base^exponent, e.g. 2^-13
  if (const auto caret = v.find('^'); caret != std::string::npos)
    return std::pow(parse_number(key, v.substr(0, caret)), parse_number(key, v.substr(caret + 1)));
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("'" + key + "': expected a number, got '" + raw + "'");
  return out;
}

long parse_integer(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("'" + key + "': expected an integer, got '" + raw + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& raw) {
  const std::string v = lower(trim(raw));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("'" + key + "': expected a boolean, got '" + raw + "'");
}

std::vector<std::string> parse_list(const std::string& raw) {
  std::vector<std::string> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_number_list(const std::string& key, const std::string& raw) {
  std::vector<double> out;
  for (const auto& item : parse_list(raw)) out.push_back(parse_number(key, item));
  return out;
}

// Keys that do not change results and are left out of the config hash.
const std::set<std::string> kUnhashed = {"output.dir", "output.timing", "experiment.parallel_trials"};

}  // namespace

ConfigMap parse_config_map(const std::string& text) {
  ConfigMap map;
  std::stringstream in(text);
  std::string line;
  std::string section = "experiment";
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#' || t.front() == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3)
        throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      section = lower(trim(t.substr(1, t.size() - 2)));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    map[section + "." + key] = trim(t.substr(eq + 1));
  }
  return map;
}

void apply_override(ConfigMap& map, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override must look like section.key=value");
  std::string key = trim(assignment.substr(0, eq));
  if (key.find('.') == std::string::npos) key = "experiment." + key;
  map[key] = trim(assignment.substr(eq + 1));
}

ExperimentConfig config_from_map(const ConfigMap& map) {
  ExperimentConfig cfg;
  std::set<std::string> used;
  auto get = [&](const std::string& key) -> const std::string* {
    auto it = map.find(key);
    if (it == map.end()) return nullptr;
    used.insert(key);
    return &it->second;
  };
  auto num = [&](const std::string& key, double& dst) {
    if (auto v = get(key)) dst = parse_number(key, *v);
  };
  auto integer = [&](const std::string& key, auto& dst) {
    if (auto v = get(key)) dst = static_cast<std::remove_reference_t<decltype(dst)>>(parse_integer(key, *v));
  };

  if (auto v = get("experiment.type")) {
    const std::string t = lower(*v);
    if (t == "convergence") cfg.experiment = Experiment::convergence;
    else if (t == "ber_sweep" || t == "ber-sweep") cfg.experiment = Experiment::ber_sweep;
    else if (t == "single_solve" || t == "solve") cfg.experiment = Experiment::single_solve;
    else throw ConfigError("unknown experiment type '" + *v + "'");
  }
  integer("experiment.U", cfg.U);
  integer("experiment.B", cfg.B);
  integer("experiment.M", cfg.M);
  if (auto v = get("experiment.snr_list")) cfg.snr_list = parse_number_list("experiment.snr_list", *v);
  integer("experiment.trials", cfg.trials);
  if (auto v = get("experiment.seed_base"))
    cfg.seed_base = static_cast<std::uint64_t>(parse_integer("experiment.seed_base", *v));
  if (auto v = get("experiment.methods")) cfg.methods = parse_list(*v);
  integer("experiment.parallel_trials", cfg.parallel_trials);
  if (auto v = get("experiment.allow_any_M")) cfg.allow_any_M = parse_bool("experiment.allow_any_M", *v);

  integer("stop.max_iters", cfg.stop.max_iterations);
  num("stop.x_change_tol", cfg.stop.x_change_tolerance);
  if (auto v = get("stop.time_budget_s")) {
    const std::string t = lower(trim(*v));
    if (t == "none" || t == "off") {
      cfg.stop.time_budget_s.reset();
    } else {
      const double b = parse_number("stop.time_budget_s", *v);
      if (b > 0.0) cfg.stop.time_budget_s = b;
      else cfg.stop.time_budget_s.reset();
    }
  }
  integer("stop.time_grid_points", cfg.time_grid_points);

  num("pvs.lambda_r", cfg.pvs.lambda_r);
  num("pvs.lambda_theta", cfg.pvs.lambda_theta);
  num("pvs.r_lower", cfg.pvs.r_lower);
  num("pvs.c", cfg.pvs.c);
  num("pvs.alpha", cfg.pvs.alpha);
  num("pvs.eta", cfg.pvs.eta);
  num("pvs.gamma_initial", cfg.pvs.gamma_initial);
  num("pvs.rho", cfg.pvs.rho);
  integer("pvs.backtrack_cap", cfg.pvs.backtrack_cap);

  num("soav.lambda", cfg.soav.lambda);
  num("soav.sigma", cfg.soav.sigma);

  if (auto v = get("modulus.gamma")) {
    if (lower(trim(*v)) == "auto") cfg.modulus.gamma.reset();
    else cfg.modulus.gamma = parse_number("modulus.gamma", *v);
  }

  if (auto v = get("grid.lambda_r")) cfg.grid.lambda_r = parse_number_list("grid.lambda_r", *v);
  if (auto v = get("grid.lambda_theta"))
    cfg.grid.lambda_theta = parse_number_list("grid.lambda_theta", *v);
  if (auto v = get("grid.lambda_soav"))
    cfg.grid.lambda_soav = parse_number_list("grid.lambda_soav", *v);
  integer("grid.validation_trials", cfg.grid.validation_trials);
  if (auto v = get("grid.validation_seed_base"))
    cfg.grid.validation_seed_base =
        static_cast<std::uint64_t>(parse_integer("grid.validation_seed_base", *v));
  if (auto v = get("grid.auto_select")) cfg.grid.auto_select = parse_bool("grid.auto_select", *v);

  if (auto v = get("output.dir")) cfg.output_dir = *v;
  if (auto v = get("output.timing")) cfg.write_timing = parse_bool("output.timing", *v);

  for (const auto& [k, v] : map)
    if (!used.count(k)) throw ConfigError("unknown config key '" + k + "'");

  ConfigMap hashed;
  for (const auto& [k, v] : map)
    if (!kUnhashed.count(k)) hashed[k] = v;
  cfg.config_hash = fnv1a_hex(canonical_text(hashed));

  validate(cfg);
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.U < 1 || cfg.B < 1) throw ConfigError("U and B must be >= 1");
  if (!mimo::is_power_of_two(cfg.M)) throw ConfigError("M must be a power of two >= 2");
  if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
  if (cfg.parallel_trials < 1) throw ConfigError("parallel_trials must be >= 1");
  if (cfg.snr_list.empty()) throw ConfigError("snr_list must not be empty");
  if (cfg.methods.empty()) throw ConfigError("methods must not be empty");
  if (cfg.time_grid_points < 2) throw ConfigError("time_grid_points must be >= 2");
  if (cfg.stop.max_iterations < 1) throw ConfigError("stop.max_iters must be >= 1");
  if (cfg.stop.x_change_tolerance < 0.0) throw ConfigError("stop.x_change_tol must be >= 0");
  for (const auto& m : cfg.methods)
    if (std::find(kKnownMethods.begin(), kKnownMethods.end(), m) == kKnownMethods.end())
      throw ConfigError("unknown method '" + m + "'");

  const auto uses = [&](const char* m) {
    return std::find(cfg.methods.begin(), cfg.methods.end(), m) != cfg.methods.end();
  };
  const bool polar = uses("pvs") || uses("sub_lipschitz") || uses("sub_heuristic");
  if (polar) {
    const auto& p = cfg.pvs;
    if (!(p.lambda_r > 0 && p.lambda_theta > 0)) throw ConfigError("pvs weights must be positive");
    if (!(p.r_lower > 0 && p.r_lower <= 1)) throw ConfigError("pvs.r_lower must lie in (0, 1]");
    if (!(p.c > 0 && p.c < 1)) throw ConfigError("pvs.c must lie in (0, 1)");
    if (!(p.rho > 0 && p.rho < 1)) throw ConfigError("pvs.rho must lie in (0, 1)");
    if (!(p.alpha >= 1)) throw ConfigError("pvs.alpha must be >= 1");
    if (!(p.eta > 0)) throw ConfigError("pvs.eta must be positive");
    if (!(p.gamma_initial > 0)) throw ConfigError("pvs.gamma_initial must be positive");
    if (p.backtrack_cap < 1) throw ConfigError("pvs.backtrack_cap must be >= 1");
    if (cfg.M % 4 != 0 && !cfg.allow_any_M)
      throw ConfigError("the polar model needs M divisible by 4 (set allow_any_M to override)");
  }
  if (uses("soav") && !(cfg.soav.lambda >= 0 && cfg.soav.sigma > 0))
    throw ConfigError("soav.lambda must be >= 0 and soav.sigma > 0");
  if (cfg.modulus.gamma && !(*cfg.modulus.gamma > 0)) throw ConfigError("modulus.gamma must be positive");
  if (cfg.grid.validation_trials < 1) throw ConfigError("grid.validation_trials must be >= 1");

  if (cfg.experiment == Experiment::convergence) {
    for (const auto& m : cfg.methods)
      if (m != "pvs" && m != "sub_lipschitz" && m != "sub_heuristic")
        throw ConfigError("convergence experiments accept pvs, sub_lipschitz, sub_heuristic; got '" +
                          m + "'");
  } else if (cfg.experiment == Experiment::ber_sweep) {
    for (const auto& m : cfg.methods)
      if (m != "pvs" && m != "lmmse" && m != "modulus" && m != "soav")
        throw ConfigError("ber sweeps accept pvs, lmmse, modulus, soav; got '" + m + "'");
  }
}

ExperimentConfig parse_config(const std::string& text) { return config_from_map(parse_config_map(text)); }

ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
  ConfigMap map;
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    map = parse_config_map(ss.str());
  }
  for (const auto& o : overrides) apply_override(map, o);
  return config_from_map(map);
}

std::string canonical_text(const ConfigMap& map) {
  std::string out;
  for (const auto& [k, v] : map) out += k + "=" + v + "\n";
  return out;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<double> decade_grid(int lo, int hi) {
  std::vector<double> out;
  for (int k = lo; k <= hi; ++k) out.push_back(std::pow(10.0, k));
  return out;
}

}  // namespace pvs::bench

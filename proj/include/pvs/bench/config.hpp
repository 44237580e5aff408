#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pvs/solver.hpp"

namespace pvs::bench {

inline constexpr const char* kLibraryVersion = "1.0.0";

/// Invalid or incomplete experiment configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Experiment { convergence, ber_sweep, single_solve };

/// Method tags understood by the harness.
inline const std::vector<std::string> kKnownMethods = {
    "pvs", "sub_lipschitz", "sub_heuristic", "lmmse", "modulus", "soav"};

struct PvsParams {
  double lambda_r = 0.1;
  double lambda_theta = 0.1;
  double r_lower = 0.1;
  double c = 0x1p-13;
  double alpha = 3.0;
  double eta = 1.0;
  double gamma_initial = 1.0;
  double rho = 0.5;
  int backtrack_cap = 60;
};

struct SoavParams {
  double lambda = 1e-2;
  double sigma = 1.0;
};

struct ModulusParams {
  std::optional<double> gamma;  ///< nullopt: 1/||H^T H||
};

struct GridParams {
  std::vector<double> lambda_r = {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  std::vector<double> lambda_theta = {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0};
  std::vector<double> lambda_soav = {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0};
  int validation_trials = 20;
  std::uint64_t validation_seed_base = 1000000;
  /// Run grid selection per SNR inside ber_sweep before scoring.
  bool auto_select = false;
};

struct ExperimentConfig {
  Experiment experiment = Experiment::ber_sweep;
  int U = 32;
  int B = 32;
  int M = 8;
  std::vector<double> snr_list = {0, 5, 10, 15, 20, 25};
  int trials = 10;
  std::uint64_t seed_base = 1;
  std::vector<std::string> methods = {"pvs", "lmmse", "modulus", "soav"};
  PvsParams pvs;
  SoavParams soav;
  ModulusParams modulus;
  GridParams grid;
  StopRule stop;
  int time_grid_points = 101;
  std::string output_dir = "out";
  /// Also write wall-clock timings (runtime.csv); off so that default outputs are reproducible.
  bool write_timing = false;
  int parallel_trials = 1;
  /// Permit M not divisible by 4 for the polar model.
  bool allow_any_M = false;
  /// Hash of the canonical key/value set, recorded in every CSV.
  std::string config_hash;

  /// Seed of trial t.
  std::uint64_t trial_seed(int t) const { return seed_base + static_cast<std::uint64_t>(t); }
};

/// Flat "section.key" -> value view of a config file.
using ConfigMap = std::map<std::string, std::string>;

/// Grammar:
///   line    := blank | comment | section | entry
///   comment := ('#' | ';') any*
///   section := '[' name ']'
///   entry   := key '=' value          (whitespace around key and value is trimmed)
/// Entries before any section belong to "experiment". Lists are comma separated.
ConfigMap parse_config_map(const std::string& text);

/// Applies "section.key=value".
void apply_override(ConfigMap& map, const std::string& assignment);

/// Builds and validates a config; unknown keys raise ConfigError.
ExperimentConfig config_from_map(const ConfigMap& map);

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Throws ConfigError on inconsistent settings (unknown methods, bad sizes, ...).
void validate(const ExperimentConfig& cfg);

/// Canonical "section.key=value" lines, sorted.
std::string canonical_text(const ConfigMap& map);

/// 64-bit FNV-1a of `text`, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

/// Decade grid {10^k | k = lo..hi}.
std::vector<double> decade_grid(int lo, int hi);

}  // namespace pvs::bench

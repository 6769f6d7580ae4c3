#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "firesale/montecarlo.hpp"
#include "firesale/stability.hpp"

namespace firesale::cli {

inline constexpr char kVersion[] = "0.1.0";

// Anything wrong with user input (flags, config files, value lists) maps to
// exit code 2; runtime failures map to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fully resolved experiment configuration. Defaults are the model's standard
// conventions: alpha = 1.0536, leverage = 20, a 35% shock on one asset, a 5%
// global-cascade threshold.
struct Config {
  int n_banks = 10000;
  int n_assets = 10000;
  double mean_bank_degree = 5.0;
  double leverage = 20.0;
  double alpha = 1.0536;
  ShockKind shock_kind = ShockKind::AssetDevaluation;
  double shock_magnitude = 0.35;
  std::optional<int> shock_target;  // omitted: drawn uniformly from the seed
  int runs = 1000;
  double threshold = 0.05;
  std::uint64_t seed = 1;
};

Config config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const Config& cfg);
Config load_config(const std::filesystem::path& path);

struct CascadeOptions {
  std::filesystem::path config_path;
  std::optional<std::uint64_t> seed;
  std::filesystem::path output;
};

struct SweepOptions {
  std::filesystem::path config_path;
  std::string axis = "mean_bank_degree";
  std::vector<double> values;
  std::optional<int> runs;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::filesystem::path output;
};

struct PhaseOptions {
  std::filesystem::path config_path;
  std::string axis1 = "mu_b";
  std::vector<double> values1;
  std::string axis2 = "lambda";
  std::vector<double> values2;
  int k_max = 200;
  int samples = 10000;
  std::optional<std::uint64_t> seed;
  std::filesystem::path output;
};

// Each command writes its output file plus "<output>.manifest.json" holding
// the resolved config and seeds; replaying a manifest regenerates the output
// byte for byte.
int cmd_cascade(const CascadeOptions& opts);
int cmd_sweep(const SweepOptions& opts);
int cmd_phase(const PhaseOptions& opts);
int cmd_replay(const std::filesystem::path& manifest_path);

}  // namespace firesale::cli

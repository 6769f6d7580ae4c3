#include "firesale/cli.hpp"

#include <ctime>
#include <fstream>
#include <sstream>

#include "firesale/network.hpp"

namespace firesale::cli {

namespace {

ShockKind shock_kind_from_string(const std::string& s) {
  if (s == "asset") return ShockKind::AssetDevaluation;
  if (s == "bank") return ShockKind::BankFailure;
  throw ConfigError("config: shock.kind must be \"asset\" or \"bank\", got \"" + s + "\"");
}

std::string shock_kind_to_string(ShockKind kind) {
  return kind == ShockKind::AssetDevaluation ? "asset" : "bank";
}

std::string iso_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void validate_config(const Config& cfg) {
  if (cfg.n_banks < 1 || cfg.n_assets < 1)
    throw ConfigError("config: n_banks and n_assets must be >= 1");
  if (!(cfg.mean_bank_degree >= 0.0) || cfg.mean_bank_degree > cfg.n_assets)
    throw ConfigError("config: mean_bank_degree must be in [0, n_assets]");
  if (!(cfg.leverage > 0.0)) throw ConfigError("config: leverage must be > 0");
  if (!(cfg.alpha > 0.0)) throw ConfigError("config: alpha must be > 0");
  if (cfg.shock_kind == ShockKind::AssetDevaluation &&
      !(cfg.shock_magnitude > 0.0 && cfg.shock_magnitude <= 1.0))
    throw ConfigError("config: shock.magnitude must be in (0, 1]");
  if (cfg.runs < 1) throw ConfigError("config: runs must be >= 1");
  if (!(cfg.threshold > 0.0 && cfg.threshold <= 1.0))
    throw ConfigError("config: threshold must be in (0, 1]");
}

}  // namespace

Config config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be a JSON object");
  Config cfg;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "n_banks") cfg.n_banks = value.get<int>();
      else if (key == "n_assets") cfg.n_assets = value.get<int>();
      else if (key == "mean_bank_degree") cfg.mean_bank_degree = value.get<double>();
      else if (key == "leverage") cfg.leverage = value.get<double>();
      else if (key == "alpha") cfg.alpha = value.get<double>();
      else if (key == "runs") cfg.runs = value.get<int>();
      else if (key == "threshold") cfg.threshold = value.get<double>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "shock") {
        if (!value.is_object()) throw ConfigError("config: shock must be an object");
        for (const auto& [skey, svalue] : value.items()) {
          if (skey == "kind") cfg.shock_kind = shock_kind_from_string(svalue.get<std::string>());
          else if (skey == "magnitude") cfg.shock_magnitude = svalue.get<double>();
          else if (skey == "target") cfg.shock_target = svalue.get<int>();
          else throw ConfigError("config: unknown shock key '" + skey + "'");
        }
      } else {
        throw ConfigError("config: unknown key '" + key + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config: bad value for '" + key + "': " + e.what());
    }
  }
  validate_config(cfg);
  return cfg;
}

nlohmann::json config_to_json(const Config& cfg) {
  nlohmann::json shock = {{"kind", shock_kind_to_string(cfg.shock_kind)},
                          {"magnitude", cfg.shock_magnitude}};
  if (cfg.shock_target) shock["target"] = *cfg.shock_target;
  return {{"n_banks", cfg.n_banks},
          {"n_assets", cfg.n_assets},
          {"mean_bank_degree", cfg.mean_bank_degree},
          {"leverage", cfg.leverage},
          {"alpha", cfg.alpha},
          {"shock", std::move(shock)},
          {"runs", cfg.runs},
          {"threshold", cfg.threshold},
          {"seed", cfg.seed}};
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config: invalid JSON in " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

namespace {

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing output file: " + path.string());
}

void write_manifest(const std::filesystem::path& output, const std::string& command,
                    const Config& cfg, nlohmann::json options) {
  nlohmann::json manifest = {{"tool", "firesale"},
                             {"version", kVersion},
                             {"command", command},
                             {"created_utc", iso_utc_now()},
                             {"config", config_to_json(cfg)},
                             {"options", std::move(options)},
                             {"outputs", {output.string()}}};
  write_text_file(output.string() + ".manifest.json", manifest.dump(2) + "\n");
}

int run_cascade_command(const Config& cfg, const std::filesystem::path& output) {
  Rng rng(cfg.seed);
  auto net = gen_poisson_bipartite(cfg.n_banks, cfg.n_assets, cfg.mean_bank_degree, rng);
  auto sys = build_uniform_system(std::move(net), cfg.leverage, cfg.alpha);

  Shock shock;
  shock.kind = cfg.shock_kind;
  shock.magnitude = cfg.shock_magnitude;
  const std::uint64_t domain = shock.kind == ShockKind::AssetDevaluation
                                   ? static_cast<std::uint64_t>(cfg.n_assets)
                                   : static_cast<std::uint64_t>(cfg.n_banks);
  shock.target =
      cfg.shock_target ? *cfg.shock_target : static_cast<int>(uniform_below(rng, domain));
  const int limit = shock.kind == ShockKind::AssetDevaluation ? cfg.n_assets : cfg.n_banks;
  if (shock.target < 0 || shock.target >= limit)
    throw ConfigError("config: shock.target out of range");

  const auto result = run_cascade(sys, shock, cfg.threshold);
  nlohmann::json out = to_json(result, sys);
  out["shock"] = {{"kind", shock_kind_to_string(shock.kind)},
                  {"target", shock.target},
                  {"magnitude", shock.magnitude}};
  write_text_file(output, out.dump(2) + "\n");
  write_manifest(output, "cascade", cfg, nlohmann::json::object());
  return 0;
}

ExperimentConfig to_experiment(const Config& cfg, int threads) {
  ExperimentConfig ec;
  ec.n_banks = cfg.n_banks;
  ec.n_assets = cfg.n_assets;
  ec.mean_bank_degree = cfg.mean_bank_degree;
  ec.leverage = cfg.leverage;
  ec.alpha = cfg.alpha;
  ec.shock = {cfg.shock_kind, cfg.shock_magnitude};
  ec.runs = cfg.runs;
  ec.global_threshold = cfg.threshold;
  ec.base_seed = cfg.seed;
  ec.threads = threads;
  return ec;
}

int run_sweep_command(const Config& cfg, const std::string& axis_str,
                      const std::vector<double>& values, int threads,
                      const std::filesystem::path& output) {
  if (values.empty()) throw ConfigError("sweep: --values must be nonempty");
  const auto axis = axis_from_name(axis_str);
  if (!axis)
    throw ConfigError("sweep: unknown axis '" + axis_str +
                      "' (expected mean_bank_degree, leverage, alpha or crowding)");
  const auto table = sweep(to_experiment(cfg, threads), *axis, values);
  std::ostringstream csv;
  write_sweep_csv(csv, table);
  write_text_file(output, csv.str());
  write_manifest(output, "sweep", cfg,
                 {{"axis", axis_str}, {"values", values}, {"threads", threads}});
  return 0;
}

struct PhaseAxisSpec {
  PhaseAxis axis;
  std::string name;
};

PhaseAxisSpec phase_axis_from_name(const std::string& name) {
  if (name == "mu_b") return {PhaseAxis::MuB, name};
  if (name == "n") return {PhaseAxis::Crowding, name};
  if (name == "lambda") return {PhaseAxis::Leverage, name};
  throw ConfigError("phase: unknown axis '" + name + "' (expected mu_b, n or lambda)");
}

int run_phase_command(const Config& cfg, const PhaseOptions& opts,
                      const std::filesystem::path& output) {
  if (opts.values1.empty() || opts.values2.empty())
    throw ConfigError("phase: --values1 and --values2 must be nonempty");
  if (opts.k_max < 1 || opts.samples < 1)
    throw ConfigError("phase: k-max and samples must be >= 1");
  const auto ax1 = phase_axis_from_name(opts.axis1);
  const auto ax2 = phase_axis_from_name(opts.axis2);
  if (ax1.axis == ax2.axis) throw ConfigError("phase: the two axes must differ");

  BranchingParams base;
  base.mu_b = cfg.mean_bank_degree;
  base.n = static_cast<double>(cfg.n_banks) / cfg.n_assets;
  base.lambda = cfg.leverage;
  base.alpha = cfg.alpha;
  BranchingOptions mc;
  mc.k_max = opts.k_max;
  mc.samples = opts.samples;

  const std::size_t rows = opts.values1.size(), cols = opts.values2.size();
  std::vector<double> xi(rows * cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      auto p = base;
      switch (ax1.axis) {
        case PhaseAxis::MuB: p.mu_b = opts.values1[i]; break;
        case PhaseAxis::Crowding: p.n = opts.values1[i]; break;
        case PhaseAxis::Leverage: p.lambda = opts.values1[i]; break;
      }
      switch (ax2.axis) {
        case PhaseAxis::MuB: p.mu_b = opts.values2[j]; break;
        case PhaseAxis::Crowding: p.n = opts.values2[j]; break;
        case PhaseAxis::Leverage: p.lambda = opts.values2[j]; break;
      }
      mc.seed = derive_seed(cfg.seed, {static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)});
      xi[i * cols + j] = branching_matrix(p, mc).spectral_radius;
    }
  }

  // A grid point is flagged as boundary when its stability differs from a
  // 4-neighbor's.
  auto unstable = [&xi](std::size_t idx) { return xi[idx] > 1.0; };
  std::ostringstream csv;
  csv << ax1.name << ',' << ax2.name << ",mu_b,n,lambda,alpha,k_max,samples,xi1,unstable,boundary\n";
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t idx = i * cols + j;
      bool boundary = false;
      if (i > 0) boundary |= unstable(idx) != unstable(idx - cols);
      if (i + 1 < rows) boundary |= unstable(idx) != unstable(idx + cols);
      if (j > 0) boundary |= unstable(idx) != unstable(idx - 1);
      if (j + 1 < cols) boundary |= unstable(idx) != unstable(idx + 1);
      auto p = base;
      auto set_axis = [&p](PhaseAxis a, double v) {
        switch (a) {
          case PhaseAxis::MuB: p.mu_b = v; break;
          case PhaseAxis::Crowding: p.n = v; break;
          case PhaseAxis::Leverage: p.lambda = v; break;
        }
      };
      set_axis(ax1.axis, opts.values1[i]);
      set_axis(ax2.axis, opts.values2[j]);
      csv << format_double(opts.values1[i]) << ',' << format_double(opts.values2[j]) << ','
          << format_double(p.mu_b) << ',' << format_double(p.n) << ','
          << format_double(p.lambda) << ',' << format_double(p.alpha) << ','
          << opts.k_max << ',' << opts.samples << ',' << format_double(xi[idx]) << ','
          << (unstable(idx) ? 1 : 0) << ',' << (boundary ? 1 : 0) << '\n';
    }
  }
  write_text_file(output, csv.str());
  write_manifest(output, "phase", cfg,
                 {{"axis1", opts.axis1},
                  {"values1", opts.values1},
                  {"axis2", opts.axis2},
                  {"values2", opts.values2},
                  {"k_max", opts.k_max},
                  {"samples", opts.samples}});
  return 0;
}

}  // namespace

int cmd_cascade(const CascadeOptions& opts) {
  Config cfg = load_config(opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  return run_cascade_command(cfg, opts.output);
}

int cmd_sweep(const SweepOptions& opts) {
  Config cfg = load_config(opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.runs) {
    if (*opts.runs < 1) throw ConfigError("sweep: --runs must be >= 1");
    cfg.runs = *opts.runs;
  }
  if (opts.threads < 1) throw ConfigError("sweep: --threads must be >= 1");
  return run_sweep_command(cfg, opts.axis, opts.values, opts.threads, opts.output);
}

int cmd_phase(const PhaseOptions& opts) {
  Config cfg = load_config(opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  return run_phase_command(cfg, opts, opts.output);
}

int cmd_replay(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw ConfigError("cannot open manifest: " + manifest_path.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("manifest: invalid JSON: " + std::string(e.what()));
  }
  try {
    const Config cfg = config_from_json(manifest.at("config"));
    const std::string command = manifest.at("command").get<std::string>();
    const std::filesystem::path output = manifest.at("outputs").at(0).get<std::string>();
    const auto& options = manifest.at("options");
    if (command == "cascade") return run_cascade_command(cfg, output);
    if (command == "sweep")
      return run_sweep_command(cfg, options.at("axis").get<std::string>(),
                               options.at("values").get<std::vector<double>>(),
                               options.value("threads", 1), output);
    if (command == "phase") {
      PhaseOptions popts;
      popts.axis1 = options.at("axis1").get<std::string>();
      popts.values1 = options.at("values1").get<std::vector<double>>();
      popts.axis2 = options.at("axis2").get<std::string>();
      popts.values2 = options.at("values2").get<std::vector<double>>();
      popts.k_max = options.at("k_max").get<int>();
      popts.samples = options.at("samples").get<int>();
      return run_phase_command(cfg, popts, output);
    }
    throw ConfigError("manifest: unknown command '" + command + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("manifest: missing or bad field: " + std::string(e.what()));
  }
}

}  // namespace firesale::cli

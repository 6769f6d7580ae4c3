// firesale: fire-sale contagion experiments on bank-asset networks.
//
// Subcommands write a data file plus a <output>.manifest.json that replays
// the run byte for byte (see `firesale replay`).

#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "firesale/cli.hpp"

namespace fc = firesale::cli;

int main(int argc, char** argv) {
  CLI::App app{"Fire-sale contagion on bipartite bank-asset networks"};
  app.set_version_flag("--version", std::string(fc::kVersion));
  app.require_subcommand(1);

  fc::CascadeOptions cascade_opts;
  auto* cascade = app.add_subcommand("cascade", "Run one cascade and dump the result as JSON");
  cascade->add_option("--config", cascade_opts.config_path, "experiment config JSON")->required();
  cascade->add_option("--seed", cascade_opts.seed, "override the config seed");
  cascade->add_option("--output", cascade_opts.output, "result JSON path")->required();

  fc::SweepOptions sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "Parameter sweep of contagion probability (CSV)");
  sweep->add_option("--config", sweep_opts.config_path, "experiment config JSON")->required();
  sweep->add_option("--axis", sweep_opts.axis,
                    "mean_bank_degree | leverage | alpha | crowding")
      ->required();
  sweep->add_option("--values", sweep_opts.values, "axis values")->required()->delimiter(',');
  sweep->add_option("--runs", sweep_opts.runs, "override runs per point");
  sweep->add_option("--seed", sweep_opts.seed, "override the config seed");
  sweep->add_option("--threads", sweep_opts.threads, "worker count (does not change results)");
  sweep->add_option("--output", sweep_opts.output, "CSV path")->required();

  fc::PhaseOptions phase_opts;
  auto* phase = app.add_subcommand("phase", "Branching-process eigenvalue over a parameter grid");
  phase->add_option("--config", phase_opts.config_path, "experiment config JSON")->required();
  phase->add_option("--axis1", phase_opts.axis1, "mu_b | n | lambda")->required();
  phase->add_option("--values1", phase_opts.values1, "grid values for axis1")
      ->required()
      ->delimiter(',');
  phase->add_option("--axis2", phase_opts.axis2, "mu_b | n | lambda")->required();
  phase->add_option("--values2", phase_opts.values2, "grid values for axis2")
      ->required()
      ->delimiter(',');
  phase->add_option("--k-max", phase_opts.k_max, "degree-type cutoff (default 200)");
  phase->add_option("--samples", phase_opts.samples, "Monte Carlo samples per kernel");
  phase->add_option("--seed", phase_opts.seed, "override the config seed");
  phase->add_option("--output", phase_opts.output, "CSV path")->required();

  std::string manifest_path;
  auto* replay = app.add_subcommand("replay", "Re-run a manifest, regenerating its outputs");
  replay->add_option("manifest", manifest_path, "manifest JSON path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help/version exit 0, usage errors exit 2
  }

  try {
    if (*cascade) return fc::cmd_cascade(cascade_opts);
    if (*sweep) return fc::cmd_sweep(sweep_opts);
    if (*phase) return fc::cmd_phase(phase_opts);
    if (*replay) return fc::cmd_replay(manifest_path);
  } catch (const fc::ConfigError& e) {
    std::cerr << "firesale: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "firesale: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "firesale: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "firesale/cascade.hpp"
#include "firesale/format.hpp"

namespace firesale {

// Shock kind + magnitude; the target is drawn uniformly per run.
struct ShockSpec {
  ShockKind kind = ShockKind::AssetDevaluation;
  double magnitude = 0.35;
};

struct ExperimentConfig {
  int n_banks = 10000;
  int n_assets = 10000;
  double mean_bank_degree = 5.0;
  double leverage = 20.0;
  double alpha = 1.0536;
  ShockSpec shock;
  int runs = 1000;
  double global_threshold = 0.05;
  std::uint64_t base_seed = 1;
  // Worker count; never part of seed derivation, results are identical for
  // any value.
  int threads = 1;
};

struct EnsembleStats {
  double contagion_probability = 0.0;
  double conditional_extent_mean = 0.0;  // over global-cascade runs only; 0 if none
  long conditional_extent_count = 0;
  double probability_stderr = 0.0;  // binomial sqrt(p(1-p)/runs)
};

// Runs `runs` independent simulations: run r draws its own network, balance
// sheets and shock target from seed derive_seed(base_seed, {r}). Outcomes
// are aggregated in run order, so stats do not depend on the worker count.
EnsembleStats run_ensemble(const ExperimentConfig& cfg);

enum class SweepAxis { MeanBankDegree, Leverage, Alpha, Crowding };

std::string axis_name(SweepAxis axis);
std::optional<SweepAxis> axis_from_name(const std::string& name);

struct SweepRow {
  SweepAxis axis = SweepAxis::MeanBankDegree;
  double value = 0.0;
  ExperimentConfig cfg;  // effective config of this point (derived seed included)
  EnsembleStats stats;
};

// One ensemble per axis value; point i runs under derive_seed(base_seed, {i}).
// The crowding axis varies n_assets with n_banks fixed (n = N/M).
std::vector<SweepRow> sweep(const ExperimentConfig& cfg, SweepAxis axis,
                            const std::vector<double>& values);

// Smallest and largest axis values whose contagion probability clears the
// noise floor of `noise_sigmas` binomial standard errors above zero.
// Empty when no point clears it.
std::optional<std::pair<double, double>> estimate_transition(
    const std::vector<SweepRow>& table, double noise_sigmas = 2.0);

// CSV columns:
// axis,value,mu_b,n,lambda,alpha,shock_kind,runs,p_contagion,p_stderr,cond_extent,cond_count,base_seed
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& table);

}  // namespace firesale

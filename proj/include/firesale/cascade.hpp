#pragma once

#include <vector>

#include <json.hpp>

#include "firesale/balance.hpp"

namespace firesale {

enum class ShockKind { AssetDevaluation, BankFailure };

struct Shock {
  ShockKind kind = ShockKind::AssetDevaluation;
  int target = 0;
  double magnitude = 0.0;  // devaluation fraction in (0, 1]; ignored for BankFailure
};

struct CascadeResult {
  std::vector<int> failed;                         // all failed banks, ascending
  std::vector<std::vector<int>> failures_by_step;  // partitions failed; [0] = shock-time
  int n_steps = 0;
  double failed_fraction = 0.0;
  bool is_global = false;  // failed_fraction >= threshold (inclusive)
};

// Introduces the t=0 shock. An asset devaluation multiplies the asset's
// price by (1 - magnitude) and marks any bank that the devaluation alone
// makes insolvent. A bank failure marks the target insolvent regardless of
// its balance sheet; its portfolio is sold in the first step.
// Throws on out-of-range targets, bad magnitudes, or a second shock.
void apply_shock(FinancialSystem& sys, const Shock& shock);

// Balance-sheet solvency at current prices: loss relative to the initial
// investment must not exceed initial equity. Force-failed banks can still
// report true here; the operational flag lives in FinancialSystem::solvent.
bool is_solvent(const FinancialSystem& sys, int bank);

// One synchronous round: every failed, not-yet-liquidated bank sells its
// whole portfolio; sale volumes are summed per asset before any repricing,
// so bank order within the round cannot matter; prices are recomputed; the
// banks that became insolvent this round are returned (ascending).
std::vector<int> step(FinancialSystem& sys);

// Shock, then iterate step() until no new failures. Terminates in at most
// n_banks productive rounds.
CascadeResult run_cascade(FinancialSystem& sys, const Shock& shock, double global_threshold);

// Per-step failure lists plus the final prices of the mutated system.
nlohmann::json to_json(const CascadeResult& result, const FinancialSystem& sys);

}  // namespace firesale

#include "firesale/cascade.hpp"

#include <algorithm>
#include <stdexcept>

namespace firesale {

namespace {

void reprice(FinancialSystem& sys, int asset) {
  sys.market.prices[asset] = sys.market.initial_prices[asset] *
                             sys.market.shock_factor[asset] *
                             sys.impact(sys.market.liquidated_fraction(asset));
}

// Re-evaluates solvency of the given banks (ascending, deduplicated by the
// caller) and marks and returns the ones that just failed.
std::vector<int> mark_new_failures(FinancialSystem& sys, const std::vector<int>& candidates) {
  std::vector<int> newly_failed;
  for (int bank : candidates) {
    if (!sys.solvent[bank]) continue;
    if (portfolio_loss(sys, bank) > sys.sheets[bank].initial_equity) {
      sys.solvent[bank] = 0;
      newly_failed.push_back(bank);
    }
  }
  return newly_failed;
}

}  // namespace

void apply_shock(FinancialSystem& sys, const Shock& shock) {
  if (sys.shocked) throw std::logic_error("apply_shock: system already shocked");
  switch (shock.kind) {
    case ShockKind::AssetDevaluation: {
      if (shock.target < 0 || shock.target >= sys.network.n_assets)
        throw std::invalid_argument("apply_shock: asset target out of range");
      if (!(shock.magnitude > 0.0 && shock.magnitude <= 1.0))
        throw std::invalid_argument("apply_shock: devaluation magnitude must be in (0, 1]");
      sys.market.shock_factor[shock.target] = 1.0 - shock.magnitude;
      reprice(sys, shock.target);
      mark_new_failures(sys, sys.network.asset_holders[shock.target]);
      break;
    }
    case ShockKind::BankFailure: {
      if (shock.target < 0 || shock.target >= sys.network.n_banks)
        throw std::invalid_argument("apply_shock: bank target out of range");
      sys.solvent[shock.target] = 0;
      break;
    }
  }
  sys.shocked = true;
}

bool is_solvent(const FinancialSystem& sys, int bank) {
  return !(portfolio_loss(sys, bank) > sys.sheets[bank].initial_equity);
}

std::vector<int> step(FinancialSystem& sys) {
  const int n_banks = sys.network.n_banks;
  const int n_assets = sys.network.n_assets;

  // 1+2. fire sale: every failed bank that still holds its portfolio sells
  // it; volumes are accumulated per asset before any repricing.
  std::vector<char> touched(n_assets, 0);
  bool any_sale = false;
  for (int bank = 0; bank < n_banks; ++bank) {
    if (sys.solvent[bank] || sys.liquidated[bank]) continue;
    sys.liquidated[bank] = 1;
    const auto& portfolio = sys.network.bank_portfolios[bank];
    const auto& shares = sys.sheets[bank].shares;
    for (std::size_t s = 0; s < portfolio.size(); ++s) {
      const int asset = portfolio[s];
      sys.market.liquidated_shares[asset] += shares[s];
      touched[asset] = 1;
      any_sale = true;
    }
  }
  if (!any_sale) return {};

  // 3. reprice the assets whose liquidated fraction moved this round.
  for (int asset = 0; asset < n_assets; ++asset)
    if (touched[asset]) reprice(sys, asset);

  // 4. solvency is re-evaluated for holders of touched assets only; every
  // other bank saw no price change this round.
  std::vector<char> candidate(n_banks, 0);
  for (int asset = 0; asset < n_assets; ++asset) {
    if (!touched[asset]) continue;
    for (int bank : sys.network.asset_holders[asset])
      if (sys.solvent[bank]) candidate[bank] = 1;
  }
  std::vector<int> candidates;
  for (int bank = 0; bank < n_banks; ++bank)
    if (candidate[bank]) candidates.push_back(bank);
  return mark_new_failures(sys, candidates);
}

CascadeResult run_cascade(FinancialSystem& sys, const Shock& shock, double global_threshold) {
  if (!(global_threshold > 0.0 && global_threshold <= 1.0))
    throw std::invalid_argument("run_cascade: global_threshold must be in (0, 1]");
  apply_shock(sys, shock);

  CascadeResult result;
  std::vector<int> initial;
  for (int bank = 0; bank < sys.network.n_banks; ++bank)
    if (!sys.solvent[bank]) initial.push_back(bank);
  if (!initial.empty()) {
    result.failures_by_step.push_back(std::move(initial));
    for (int round = 0; round <= sys.network.n_banks; ++round) {
      std::vector<int> newly = step(sys);
      if (newly.empty()) break;
      result.failures_by_step.push_back(std::move(newly));
    }
  }

  for (const auto& stepset : result.failures_by_step)
    result.failed.insert(result.failed.end(), stepset.begin(), stepset.end());
  std::sort(result.failed.begin(), result.failed.end());
  result.n_steps = static_cast<int>(result.failures_by_step.size());
  result.failed_fraction = static_cast<double>(result.failed.size()) / sys.network.n_banks;
  result.is_global = result.failed_fraction >= global_threshold;
  return result;
}

nlohmann::json to_json(const CascadeResult& result, const FinancialSystem& sys) {
  return {{"failed", result.failed},
          {"failures_by_step", result.failures_by_step},
          {"n_steps", result.n_steps},
          {"failed_fraction", result.failed_fraction},
          {"is_global", result.is_global},
          {"final_prices", sys.market.prices}};
}

}  // namespace firesale

#pragma once

#include <cmath>
#include <vector>

#include <json.hpp>

#include "firesale/network.hpp"

namespace firesale {

// Balance sheet of one bank. shares runs parallel to the bank's portfolio in
// the network (same order, same length), so Q_ij > 0 exactly for held assets.
struct BalanceSheet {
  std::vector<double> shares;        // Q_ij, parallel to bank_portfolios[i]
  double cash = 0.0;                 // C_i
  double liabilities = 0.0;          // L_i
  double initial_equity = 0.0;       // E_i^0 = A_i^0 + C_i - L_i
  double initial_risky_assets = 0.0; // A_i^0
  double leverage = 1.0;             // A_i^0 / E_i^0; 1 for cash-only banks
};

// Multiplicative market impact f(x) = exp(-alpha x) on the liquidated
// fraction x of an asset's float.
struct ImpactFunction {
  double alpha = 1.0536;
  double operator()(double liquidated_fraction) const {
    return std::exp(-alpha * liquidated_fraction);
  }
};

// Per-asset market state. Prices factor as
//   p_j = initial_price_j * shock_factor_j * f(x_j),
// where x_j is the cumulative liquidated fraction of the t=0 float.
// total_shares is fixed for the whole run.
struct MarketState {
  std::vector<double> initial_prices;
  std::vector<double> shock_factor;
  std::vector<double> prices;
  std::vector<double> liquidated_shares;
  std::vector<double> total_shares;

  double liquidated_fraction(int asset) const {
    const double total = total_shares[asset];
    if (total <= 0.0) return 0.0;
    return std::min(1.0, liquidated_shares[asset] / total);
  }
};

struct FinancialSystem {
  BipartiteNetwork network;
  std::vector<BalanceSheet> sheets;
  MarketState market;
  ImpactFunction impact;
  std::vector<char> solvent;     // operational status, false once failed
  std::vector<char> liquidated;  // portfolio already sold off
  bool shocked = false;
};

// alpha such that the price drops by `drop` when `at_liquidated` of the
// asset has been sold: alpha = -ln(1 - drop) / at_liquidated.
double calibrate_alpha(double drop, double at_liquidated);

// Homogeneous balance sheets: every bank invests risky assets A0 = 1 split
// uniformly over its portfolio (Q = A0/k per held asset at unit price),
// holds cash 0.25*A0 (the 80/20 asset/cash split), equity A0/leverage.
// Degree-0 banks hold only cash and can never fail; their leverage is
// recorded as 1.
FinancialSystem build_uniform_system(BipartiteNetwork net, double leverage, double alpha);

// Portfolio value at current prices, sum_j Q_ij p_j.
double portfolio_value(const FinancialSystem& sys, int bank);

// Loss against the initial investment, sum_j Q_ij (p_j^0 - p_j).
double portfolio_loss(const FinancialSystem& sys, int bank);

// JSON schema extends the network schema with balance sheets and prices:
//   { "n_banks", "n_assets", "alpha",
//     "banks":  [ {"cash", "liabilities", "holdings": [{"asset", "shares"}, ...]}, ... ],
//     "assets": [ {"price"}, ... ] }
// The loader recomputes equity and leverage and rejects systems violating
// the solvency invariants of a fresh system.
nlohmann::json to_json(const FinancialSystem& sys);
FinancialSystem system_from_json(const nlohmann::json& j);

}  // namespace firesale

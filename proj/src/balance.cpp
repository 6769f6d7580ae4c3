#include "firesale/balance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace firesale {

namespace {

// Cash relative to risky assets under the 80/20 split: 0.2/0.8.
constexpr double kCashOverRisky = 0.25;
constexpr double kUnitRisky = 1.0;

void init_market(FinancialSystem& sys) {
  const int m = sys.network.n_assets;
  sys.market.shock_factor.assign(m, 1.0);
  sys.market.liquidated_shares.assign(m, 0.0);
  sys.market.total_shares.assign(m, 0.0);
  sys.market.prices = sys.market.initial_prices;
  for (int bank = 0; bank < sys.network.n_banks; ++bank) {
    const auto& portfolio = sys.network.bank_portfolios[bank];
    const auto& shares = sys.sheets[bank].shares;
    for (std::size_t s = 0; s < portfolio.size(); ++s)
      sys.market.total_shares[portfolio[s]] += shares[s];
  }
  sys.solvent.assign(sys.network.n_banks, 1);
  sys.liquidated.assign(sys.network.n_banks, 0);
  sys.shocked = false;
}

}  // namespace

double calibrate_alpha(double drop, double at_liquidated) {
  if (!(drop > 0.0 && drop < 1.0))
    throw std::invalid_argument("calibrate_alpha: drop must be in (0, 1)");
  if (!(at_liquidated > 0.0 && at_liquidated <= 1.0))
    throw std::invalid_argument("calibrate_alpha: at_liquidated must be in (0, 1]");
  return -std::log1p(-drop) / at_liquidated;
}

FinancialSystem build_uniform_system(BipartiteNetwork net, double leverage, double alpha) {
  if (!(leverage > 0.0))
    throw std::invalid_argument("build_uniform_system: leverage must be > 0");
  if (!(alpha > 0.0))
    throw std::invalid_argument("build_uniform_system: alpha must be > 0");

  FinancialSystem sys;
  sys.network = std::move(net);
  sys.impact.alpha = alpha;
  const int n = sys.network.n_banks;
  sys.sheets.resize(n);
  for (int bank = 0; bank < n; ++bank) {
    auto& sheet = sys.sheets[bank];
    const int degree = sys.network.bank_degree(bank);
    sheet.cash = kCashOverRisky * kUnitRisky;
    if (degree == 0) {
      sheet.initial_risky_assets = 0.0;
      sheet.liabilities = 0.0;
      sheet.initial_equity = sheet.cash;
      sheet.leverage = 1.0;
    } else {
      sheet.shares.assign(degree, kUnitRisky / degree);
      sheet.initial_risky_assets = kUnitRisky;
      sheet.initial_equity = kUnitRisky / leverage;
      sheet.liabilities = kUnitRisky + sheet.cash - sheet.initial_equity;
      sheet.leverage = leverage;
    }
  }
  sys.market.initial_prices.assign(sys.network.n_assets, 1.0);
  init_market(sys);
  return sys;
}

double portfolio_value(const FinancialSystem& sys, int bank) {
  const auto& portfolio = sys.network.bank_portfolios[bank];
  const auto& shares = sys.sheets[bank].shares;
  double value = 0.0;
  for (std::size_t s = 0; s < portfolio.size(); ++s)
    value += shares[s] * sys.market.prices[portfolio[s]];
  return value;
}

double portfolio_loss(const FinancialSystem& sys, int bank) {
  const auto& portfolio = sys.network.bank_portfolios[bank];
  const auto& shares = sys.sheets[bank].shares;
  double loss = 0.0;
  for (std::size_t s = 0; s < portfolio.size(); ++s) {
    const int asset = portfolio[s];
    loss += shares[s] * (sys.market.initial_prices[asset] - sys.market.prices[asset]);
  }
  return loss;
}

nlohmann::json to_json(const FinancialSystem& sys) {
  nlohmann::json banks = nlohmann::json::array();
  for (int bank = 0; bank < sys.network.n_banks; ++bank) {
    const auto& sheet = sys.sheets[bank];
    nlohmann::json holdings = nlohmann::json::array();
    const auto& portfolio = sys.network.bank_portfolios[bank];
    for (std::size_t s = 0; s < portfolio.size(); ++s)
      holdings.push_back({{"asset", portfolio[s]}, {"shares", sheet.shares[s]}});
    banks.push_back({{"cash", sheet.cash},
                     {"liabilities", sheet.liabilities},
                     {"holdings", std::move(holdings)}});
  }
  nlohmann::json assets = nlohmann::json::array();
  for (int asset = 0; asset < sys.network.n_assets; ++asset)
    assets.push_back({{"price", sys.market.initial_prices[asset]}});
  return {{"n_banks", sys.network.n_banks},
          {"n_assets", sys.network.n_assets},
          {"alpha", sys.impact.alpha},
          {"banks", std::move(banks)},
          {"assets", std::move(assets)}};
}

FinancialSystem system_from_json(const nlohmann::json& j) {
  for (const char* key : {"n_banks", "n_assets", "alpha", "banks", "assets"})
    if (!j.contains(key))
      throw std::invalid_argument(std::string("system_from_json: missing key '") + key + "'");

  const int n = j.at("n_banks").get<int>();
  const int m = j.at("n_assets").get<int>();
  const double alpha = j.at("alpha").get<double>();
  if (!(alpha > 0.0)) throw std::invalid_argument("system_from_json: alpha must be > 0");
  if (static_cast<int>(j.at("banks").size()) != n)
    throw std::invalid_argument("system_from_json: banks array size != n_banks");
  if (static_cast<int>(j.at("assets").size()) != m)
    throw std::invalid_argument("system_from_json: assets array size != n_assets");

  std::vector<std::pair<int, int>> links;
  std::vector<std::vector<std::pair<int, double>>> holdings(n);
  for (int bank = 0; bank < n; ++bank) {
    const auto& jb = j.at("banks").at(bank);
    for (const auto& h : jb.at("holdings")) {
      const int asset = h.at("asset").get<int>();
      const double shares = h.at("shares").get<double>();
      if (!(shares > 0.0))
        throw std::invalid_argument("system_from_json: holdings must have shares > 0");
      holdings[bank].emplace_back(asset, shares);
      links.emplace_back(bank, asset);
    }
  }

  FinancialSystem sys;
  sys.network = make_network(n, m, std::move(links));  // validates ranges, duplicates
  sys.impact.alpha = alpha;
  sys.market.initial_prices.resize(m);
  for (int asset = 0; asset < m; ++asset) {
    const double price = j.at("assets").at(asset).at("price").get<double>();
    if (!(price > 0.0)) throw std::invalid_argument("system_from_json: prices must be > 0");
    sys.market.initial_prices[asset] = price;
  }

  sys.sheets.resize(n);
  for (int bank = 0; bank < n; ++bank) {
    auto& sheet = sys.sheets[bank];
    const auto& jb = j.at("banks").at(bank);
    sheet.cash = jb.at("cash").get<double>();
    sheet.liabilities = jb.at("liabilities").get<double>();
    // make_network sorted the portfolio; align shares with it.
    std::sort(holdings[bank].begin(), holdings[bank].end());
    sheet.shares.reserve(holdings[bank].size());
    double risky = 0.0;
    for (const auto& [asset, shares] : holdings[bank]) {
      sheet.shares.push_back(shares);
      risky += shares * sys.market.initial_prices[asset];
    }
    sheet.initial_risky_assets = risky;
    sheet.initial_equity = risky + sheet.cash - sheet.liabilities;
    if (holdings[bank].empty()) {
      if (sheet.initial_equity < 0.0)
        throw std::invalid_argument("system_from_json: bank " + std::to_string(bank) +
                                    " has negative equity");
      sheet.leverage = 1.0;
    } else {
      if (!(sheet.initial_equity > 0.0))
        throw std::invalid_argument("system_from_json: bank " + std::to_string(bank) +
                                    " has non-positive equity, system is not fresh");
      sheet.leverage = risky / sheet.initial_equity;
    }
  }
  init_market(sys);
  return sys;
}

}  // namespace firesale

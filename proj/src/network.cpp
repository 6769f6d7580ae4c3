#include "firesale/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace firesale {

std::size_t BipartiteNetwork::n_links() const {
  std::size_t total = 0;
  for (const auto& p : bank_portfolios) total += p.size();
  return total;
}

namespace {

BipartiteNetwork from_sorted_flat_links(int n_banks, int n_assets,
                                        const std::vector<std::uint64_t>& flat) {
  BipartiteNetwork net;
  net.n_banks = n_banks;
  net.n_assets = n_assets;
  net.bank_portfolios.resize(n_banks);
  net.asset_holders.resize(n_assets);
  const auto m = static_cast<std::uint64_t>(n_assets);
  for (std::uint64_t idx : flat) {
    const int bank = static_cast<int>(idx / m);
    const int asset = static_cast<int>(idx % m);
    net.bank_portfolios[bank].push_back(asset);
    net.asset_holders[asset].push_back(bank);
  }
  // flat is ascending, so portfolios arrive sorted per bank and holders
  // arrive sorted per asset.
  return net;
}

void check_counts(int n_banks, int n_assets, const char* where) {
  if (n_banks < 1) throw std::invalid_argument(std::string(where) + ": n_banks must be >= 1");
  if (n_assets < 1) throw std::invalid_argument(std::string(where) + ": n_assets must be >= 1");
}

}  // namespace

BipartiteNetwork make_network(int n_banks, int n_assets,
                              std::vector<std::pair<int, int>> links) {
  check_counts(n_banks, n_assets, "make_network");
  std::vector<std::uint64_t> flat;
  flat.reserve(links.size());
  for (const auto& [bank, asset] : links) {
    if (bank < 0 || bank >= n_banks)
      throw std::invalid_argument("make_network: bank index out of range: " + std::to_string(bank));
    if (asset < 0 || asset >= n_assets)
      throw std::invalid_argument("make_network: asset index out of range: " + std::to_string(asset));
    flat.push_back(static_cast<std::uint64_t>(bank) * n_assets + asset);
  }
  std::sort(flat.begin(), flat.end());
  if (std::adjacent_find(flat.begin(), flat.end()) != flat.end())
    throw std::invalid_argument("make_network: duplicate bank-asset link");
  return from_sorted_flat_links(n_banks, n_assets, flat);
}

BipartiteNetwork gen_poisson_bipartite(int n_banks, int n_assets,
                                       double mean_bank_degree, Rng& rng) {
  check_counts(n_banks, n_assets, "gen_poisson_bipartite");
  if (!(mean_bank_degree >= 0.0))
    throw std::invalid_argument("gen_poisson_bipartite: mean_bank_degree must be >= 0");
  const double p = mean_bank_degree / n_assets;
  if (p > 1.0)
    throw std::invalid_argument(
        "gen_poisson_bipartite: link probability mu_b/M exceeds 1 (mean_bank_degree > n_assets)");

  const std::uint64_t total =
      static_cast<std::uint64_t>(n_banks) * static_cast<std::uint64_t>(n_assets);
  std::vector<std::uint64_t> flat;

  if (p == 0.0) {
    // no links
  } else if (p == 1.0) {
    flat.resize(total);
    for (std::uint64_t i = 0; i < total; ++i) flat[i] = i;
  } else {
    flat.reserve(static_cast<std::size_t>(mean_bank_degree * n_banks * 1.2) + 16);
    // Geometric skip: the gap to the next linked pair is the number of
    // Bernoulli(p) failures before a success.
    const double log1mp = std::log1p(-p);
    std::uint64_t idx = 0;
    while (idx < total) {
      const double u = uniform01(rng);
      const double skip = std::floor(std::log1p(-u) / log1mp);
      if (!(skip < static_cast<double>(total))) break;  // also catches inf
      idx += static_cast<std::uint64_t>(skip);
      if (idx >= total) break;
      flat.push_back(idx);
      ++idx;
    }
  }
  return from_sorted_flat_links(n_banks, n_assets, flat);
}

BipartiteNetwork gen_poisson_bipartite(int n_banks, int n_assets,
                                       double mean_bank_degree, std::uint64_t seed) {
  Rng rng(seed);
  return gen_poisson_bipartite(n_banks, n_assets, mean_bank_degree, rng);
}

BipartiteNetwork gen_regular_bipartite(int n_banks, int n_assets, int bank_degree,
                                       Rng& rng) {
  check_counts(n_banks, n_assets, "gen_regular_bipartite");
  if (bank_degree < 0)
    throw std::invalid_argument("gen_regular_bipartite: bank_degree must be >= 0");
  if (bank_degree > n_assets)
    throw std::invalid_argument(
        "gen_regular_bipartite: bank_degree exceeds n_assets, no simple bipartite graph exists");

  BipartiteNetwork net;
  net.n_banks = n_banks;
  net.n_assets = n_assets;
  net.bank_portfolios.resize(n_banks);
  net.asset_holders.resize(n_assets);

  // mark[a] == bank means asset a is already in this bank's portfolio.
  std::vector<int> mark(n_assets, -1);
  const long budget_per_bank = 1000 + 32L * n_assets;
  for (int bank = 0; bank < n_banks; ++bank) {
    auto& portfolio = net.bank_portfolios[bank];
    portfolio.reserve(bank_degree);
    long attempts = 0;
    while (static_cast<int>(portfolio.size()) < bank_degree) {
      if (++attempts > budget_per_bank)
        throw std::runtime_error("gen_regular_bipartite: resampling budget exhausted");
      const int asset = static_cast<int>(uniform_below(rng, n_assets));
      if (mark[asset] == bank) continue;  // duplicate link, resample
      mark[asset] = bank;
      portfolio.push_back(asset);
    }
    std::sort(portfolio.begin(), portfolio.end());
    for (int asset : portfolio) net.asset_holders[asset].push_back(bank);
  }
  return net;
}

BipartiteNetwork gen_regular_bipartite(int n_banks, int n_assets, int bank_degree,
                                       std::uint64_t seed) {
  Rng rng(seed);
  return gen_regular_bipartite(n_banks, n_assets, bank_degree, rng);
}

DegreeStats degree_stats(const BipartiteNetwork& net) {
  DegreeStats s;
  const double links = static_cast<double>(net.n_links());
  s.mean_bank_degree = links / net.n_banks;
  s.mean_asset_degree = links / net.n_assets;
  s.crowding = static_cast<double>(net.n_banks) / net.n_assets;
  s.projected_mean_degree = s.mean_bank_degree * s.mean_asset_degree;
  return s;
}

nlohmann::json to_json(const BipartiteNetwork& net) {
  nlohmann::json links = nlohmann::json::array();
  for (int bank = 0; bank < net.n_banks; ++bank)
    for (int asset : net.bank_portfolios[bank])
      links.push_back(nlohmann::json::array({bank, asset}));
  return {{"n_banks", net.n_banks}, {"n_assets", net.n_assets}, {"links", std::move(links)}};
}

BipartiteNetwork network_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("n_banks") || !j.contains("n_assets") || !j.contains("links"))
    throw std::invalid_argument("network_from_json: expected object with n_banks, n_assets, links");
  std::vector<std::pair<int, int>> links;
  for (const auto& e : j.at("links")) {
    if (!e.is_array() || e.size() != 2)
      throw std::invalid_argument("network_from_json: each link must be a [bank, asset] pair");
    links.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  }
  return make_network(j.at("n_banks").get<int>(), j.at("n_assets").get<int>(), std::move(links));
}

}  // namespace firesale

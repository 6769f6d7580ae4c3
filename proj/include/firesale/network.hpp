#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <json.hpp>

#include "firesale/rng.hpp"

namespace firesale {

// Bipartite bank-asset network. Banks and assets are dense 0-based indices;
// both adjacency directions are kept because the cascade inner loop walks
// bank->asset when liquidating and asset->bank when repricing.
// Immutable after construction and safe to share read-only across threads.
struct BipartiteNetwork {
  int n_banks = 0;
  int n_assets = 0;
  std::vector<std::vector<int>> bank_portfolios;  // bank -> sorted asset ids
  std::vector<std::vector<int>> asset_holders;    // asset -> sorted bank ids

  int bank_degree(int bank) const { return static_cast<int>(bank_portfolios[bank].size()); }
  int asset_degree(int asset) const { return static_cast<int>(asset_holders[asset].size()); }
  std::size_t n_links() const;
};

struct DegreeStats {
  double mean_bank_degree = 0.0;       // mu_b
  double mean_asset_degree = 0.0;      // mu_a
  double crowding = 0.0;               // n = N/M
  double projected_mean_degree = 0.0;  // mu_a * mu_b, giant-component control
};

// Builds a network from an explicit link list, validating index ranges and
// rejecting duplicate links. Links may arrive in any order.
BipartiteNetwork make_network(int n_banks, int n_assets,
                              std::vector<std::pair<int, int>> links);

// Bipartite Erdos-Renyi ensemble: every bank-asset pair is linked
// independently with probability mean_bank_degree / n_assets.
// Sampled with geometric jumps, so cost is O(expected links).
BipartiteNetwork gen_poisson_bipartite(int n_banks, int n_assets,
                                       double mean_bank_degree, Rng& rng);
BipartiteNetwork gen_poisson_bipartite(int n_banks, int n_assets,
                                       double mean_bank_degree, std::uint64_t seed);

// Every bank gets exactly bank_degree distinct assets chosen uniformly at
// random (stub matching with duplicate-link resampling). Asset degrees come
// out random with mean bank_degree * n_banks / n_assets.
BipartiteNetwork gen_regular_bipartite(int n_banks, int n_assets, int bank_degree,
                                       Rng& rng);
BipartiteNetwork gen_regular_bipartite(int n_banks, int n_assets, int bank_degree,
                                       std::uint64_t seed);

DegreeStats degree_stats(const BipartiteNetwork& net);

// JSON schema: { "n_banks": int, "n_assets": int, "links": [[bank, asset], ...] }
nlohmann::json to_json(const BipartiteNetwork& net);
BipartiteNetwork network_from_json(const nlohmann::json& j);

}  // namespace firesale

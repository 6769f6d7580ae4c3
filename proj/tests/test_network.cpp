#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "firesale/network.hpp"

using namespace firesale;

namespace {

// Hand-placed 4-bank / 3-asset network with mu_b = 1.5, mu_a = 2:
// six links spread so every bank holds at least one asset.
BipartiteNetwork example_network() {
  return make_network(4, 3, {{0, 0}, {1, 0}, {1, 1}, {2, 1}, {3, 1}, {3, 2}});
}

void check_consistency(const BipartiteNetwork& net) {
  std::size_t bank_links = 0, asset_links = 0;
  for (const auto& p : net.bank_portfolios) {
    CHECK(std::is_sorted(p.begin(), p.end()));
    CHECK(std::adjacent_find(p.begin(), p.end()) == p.end());
    bank_links += p.size();
  }
  for (int a = 0; a < net.n_assets; ++a) {
    const auto& h = net.asset_holders[a];
    CHECK(std::is_sorted(h.begin(), h.end()));
    asset_links += h.size();
    for (int bank : h) {
      const auto& p = net.bank_portfolios[bank];
      CHECK(std::binary_search(p.begin(), p.end(), a));
    }
  }
  CHECK(bank_links == asset_links);  // sum of bank degrees == sum of asset degrees
}

}  // namespace

TEST_SUITE("network") {

TEST_CASE("make_network validates input") {
  CHECK_THROWS_AS(make_network(0, 1, {}), std::invalid_argument);
  CHECK_THROWS_AS(make_network(1, 0, {}), std::invalid_argument);
  CHECK_THROWS_AS(make_network(2, 2, {{0, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(make_network(2, 2, {{2, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(make_network(2, 2, {{-1, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(make_network(2, 2, {{0, 0}, {0, 0}}), std::invalid_argument);
  CHECK_NOTHROW(make_network(2, 2, {{0, 0}, {1, 0}}));
}

TEST_CASE("degree_stats on the hand-built example") {
  const auto net = example_network();
  check_consistency(net);
  const auto s = degree_stats(net);
  CHECK(s.mean_bank_degree == doctest::Approx(1.5));
  CHECK(s.mean_asset_degree == doctest::Approx(2.0));
  CHECK(s.crowding == doctest::Approx(4.0 / 3.0));
  CHECK(s.projected_mean_degree == doctest::Approx(3.0));
}

TEST_CASE("degree_stats on an empty network") {
  const auto net = make_network(5, 2, {});
  const auto s = degree_stats(net);
  CHECK(s.mean_bank_degree == 0.0);
  CHECK(s.mean_asset_degree == 0.0);
  CHECK(s.crowding == doctest::Approx(2.5));
  CHECK(s.projected_mean_degree == 0.0);
}

TEST_CASE("poisson generator: zero mean degree gives zero links") {
  const auto net = gen_poisson_bipartite(100, 100, 0.0, std::uint64_t{1});
  CHECK(net.n_links() == 0);
  check_consistency(net);
}

TEST_CASE("poisson generator: rejects probability above one") {
  CHECK_THROWS_AS(gen_poisson_bipartite(10, 10, 10.5, std::uint64_t{1}), std::invalid_argument);
  // mu_b == n_assets means every pair is linked
  const auto net = gen_poisson_bipartite(3, 4, 4.0, std::uint64_t{1});
  CHECK(net.n_links() == 12);
}

TEST_CASE("poisson generator: same seed, same network") {
  const auto a = gen_poisson_bipartite(500, 400, 3.0, std::uint64_t{77});
  const auto b = gen_poisson_bipartite(500, 400, 3.0, std::uint64_t{77});
  CHECK(a.bank_portfolios == b.bank_portfolios);
  CHECK(a.asset_holders == b.asset_holders);
  const auto c = gen_poisson_bipartite(500, 400, 3.0, std::uint64_t{78});
  CHECK(a.bank_portfolios != c.bank_portfolios);
  check_consistency(a);
}

TEST_CASE("poisson generator: ensemble mean degree within 3 standard errors") {
  const int n = 2000, m = 2000, seeds = 50;
  const double mu_b = 5.0;
  double total = 0.0;
  for (int s = 0; s < seeds; ++s) {
    const auto net = gen_poisson_bipartite(n, m, mu_b, derive_seed(1000, {(std::uint64_t)s}));
    total += degree_stats(net).mean_bank_degree;
  }
  const double mean = total / seeds;
  // links ~ Binomial(n*m, mu_b/m): Var(mean degree) = m p (1-p) / n per seed
  const double p = mu_b / m;
  const double se = std::sqrt(m * p * (1.0 - p) / n / seeds);
  CHECK(std::abs(mean - mu_b) < 3.0 * se);
}

TEST_CASE("poisson generator: bank degrees fit Poisson (chi-square)") {
  const int n = 2000, m = 2000, seeds = 30;
  const double mu_b = 3.0;
  std::vector<long> counts(13, 0);  // degrees 0..11, last bin is 12+
  long total = 0;
  for (int s = 0; s < seeds; ++s) {
    const auto net = gen_poisson_bipartite(n, m, mu_b, derive_seed(2000, {(std::uint64_t)s}));
    for (int bank = 0; bank < n; ++bank) {
      const int d = std::min<int>(net.bank_degree(bank), 12);
      ++counts[d];
      ++total;
    }
  }
  double chi2 = 0.0;
  double tail = 1.0;
  double pmf = std::exp(-mu_b);
  for (int d = 0; d <= 11; ++d) {
    if (d > 0) pmf *= mu_b / d;
    tail -= pmf;
    const double expected = pmf * total;
    chi2 += (counts[d] - expected) * (counts[d] - expected) / expected;
  }
  const double expected_tail = tail * total;
  chi2 += (counts[12] - expected_tail) * (counts[12] - expected_tail) / expected_tail;
  // 12 degrees of freedom, 99.9% quantile ~= 32.9
  CHECK(chi2 < 32.9);
}

TEST_CASE("poisson generator: projected mean degree tracks mu_b^2 n") {
  const auto net = gen_poisson_bipartite(2000, 2000, 2.0, std::uint64_t{31});
  const auto s = degree_stats(net);
  CHECK(std::abs(s.projected_mean_degree - 4.0) < 0.2);
}

TEST_CASE("regular generator: exact bank degrees, random asset degrees") {
  const auto net = gen_regular_bipartite(1000, 1000, 5, std::uint64_t{5});
  check_consistency(net);
  int dmin = 1 << 30, dmax = 0;
  for (int bank = 0; bank < net.n_banks; ++bank) {
    dmin = std::min(dmin, net.bank_degree(bank));
    dmax = std::max(dmax, net.bank_degree(bank));
  }
  CHECK(dmin == 5);
  CHECK(dmax == 5);
  const auto s = degree_stats(net);
  CHECK(s.mean_asset_degree == doctest::Approx(5.0));  // forced: k N / M
  // stub matching gives near-Poisson asset degrees; sample variance close to 5
  double var = 0.0;
  for (int a = 0; a < net.n_assets; ++a) {
    const double d = net.asset_degree(a) - 5.0;
    var += d * d;
  }
  var /= net.n_assets - 1;
  CHECK(var > 3.5);
  CHECK(var < 6.5);
}

TEST_CASE("regular generator: forced shapes") {
  const auto matching = gen_regular_bipartite(10, 10, 1, std::uint64_t{9});
  for (int bank = 0; bank < 10; ++bank) CHECK(matching.bank_degree(bank) == 1);

  const auto complete = gen_regular_bipartite(6, 3, 3, std::uint64_t{9});
  for (int bank = 0; bank < 6; ++bank) CHECK(complete.bank_degree(bank) == 3);
  for (int a = 0; a < 3; ++a) CHECK(complete.asset_degree(a) == 6);

  CHECK_THROWS_AS(gen_regular_bipartite(4, 3, 4, std::uint64_t{9}), std::invalid_argument);
}

TEST_CASE("regular generator: deterministic per seed") {
  const auto a = gen_regular_bipartite(200, 150, 4, std::uint64_t{123});
  const auto b = gen_regular_bipartite(200, 150, 4, std::uint64_t{123});
  CHECK(a.bank_portfolios == b.bank_portfolios);
}

TEST_CASE("network json round trip and validation") {
  const auto net = example_network();
  const auto j = to_json(net);
  const auto back = network_from_json(j);
  CHECK(back.n_banks == net.n_banks);
  CHECK(back.n_assets == net.n_assets);
  CHECK(back.bank_portfolios == net.bank_portfolios);
  CHECK(back.asset_holders == net.asset_holders);

  auto dup = j;
  dup["links"].push_back({0, 0});
  CHECK_THROWS_AS(network_from_json(dup), std::invalid_argument);
  auto out_of_range = j;
  out_of_range["links"].push_back({0, 99});
  CHECK_THROWS_AS(network_from_json(out_of_range), std::invalid_argument);
  CHECK_THROWS_AS(network_from_json(nlohmann::json::array()), std::invalid_argument);
}

}  // TEST_SUITE

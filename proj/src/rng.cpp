#include "firesale/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace firesale {

std::uint64_t uniform_below(Rng& rng, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
  if ((n & (n - 1)) == 0) return rng() & (n - 1);
  // Accept x < 2^64 - (2^64 mod n); the remainder wraps correctly in uint64.
  const std::uint64_t rem = (std::numeric_limits<std::uint64_t>::max() % n + 1) % n;
  const std::uint64_t threshold = 0 - rem;
  std::uint64_t x = rng();
  while (x >= threshold) x = rng();
  return x % n;
}

namespace {

int poisson_knuth(Rng& rng, double mean) {
  const double limit = std::exp(-mean);
  int k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= uniform01(rng);
  } while (p > limit);
  return k - 1;
}

}  // namespace

int sample_poisson(Rng& rng, double mean) {
  if (!(mean >= 0.0)) throw std::invalid_argument("sample_poisson: mean must be >= 0");
  if (mean == 0.0) return 0;
  int total = 0;
  // Poisson(a + b) = Poisson(a) + Poisson(b) for independent draws.
  while (mean > 32.0) {
    total += poisson_knuth(rng, 16.0);
    mean -= 16.0;
  }
  return total + poisson_knuth(rng, mean);
}

}  // namespace firesale

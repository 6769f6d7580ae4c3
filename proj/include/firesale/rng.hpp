#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace firesale {

// All randomness flows through std::mt19937_64 seeded via derive_seed, so
// every result is reproducible bit for bit from a single base seed.
using Rng = std::mt19937_64;

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic sub-stream derivation: the base seed is folded with each path
// element (run index, axis index, sample index, ...) through mix64. Parallel
// and serial execution derive identical seeds for identical paths.
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> path) {
  constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ull;
  std::uint64_t s = mix64(base + golden);
  for (std::uint64_t v : path) s = mix64(s ^ (v + golden));
  return s;
}

// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n), rejection sampled (no modulo bias).
std::uint64_t uniform_below(Rng& rng, std::uint64_t n);

// Exact Poisson sample (Knuth's product method, chunked for large means so
// exp(-mean) stays far from underflow).
int sample_poisson(Rng& rng, double mean);

}  // namespace firesale

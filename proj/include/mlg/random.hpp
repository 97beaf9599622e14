#pragma once

// Reproducibility-safe RNG helpers. std::mt19937_64 output is pinned by the
// standard, but uniform_int_distribution / std::sample / std::shuffle are
// implementation-defined, so anything that must be byte-stable across
// standard libraries goes through the routines below.

#include <cstdint>
#include <random>
#include <vector>

#include "mlg/errors.hpp"

namespace mlg {

// splitmix64 step; used to derive independent substream seeds.
inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Unbiased integer in [0, bound) via rejection.
inline std::uint64_t bounded_rand(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % bound;
  }
}

// In-place Fisher-Yates.
template <typename T>
void portable_shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(bounded_rand(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

// k distinct indices drawn uniformly from [0, n), in draw order
// (partial Fisher-Yates over an index array).
inline std::vector<std::int64_t> sample_without_replacement(std::int64_t n, std::int64_t k,
                                                            std::mt19937_64& rng) {
  if (k < 0 || n < 0 || k > n) throw invalid_input("sample_without_replacement: need 0 <= k <= n");
  std::vector<std::int64_t> idx(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::vector<std::int64_t> out(static_cast<std::size_t>(k));
  for (std::int64_t i = 0; i < k; ++i) {
    const std::int64_t j = i + static_cast<std::int64_t>(bounded_rand(rng, static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    out[static_cast<std::size_t>(i)] = idx[static_cast<std::size_t>(i)];
  }
  return out;
}

}  // namespace mlg

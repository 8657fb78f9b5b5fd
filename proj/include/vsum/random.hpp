#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace vsum {

// std::mt19937_64 is fully specified by the standard; the distributions are
// not, so the mapping from raw draws to values lives here to keep seeded runs
// identical across standard libraries.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent stream seed from a parent seed and a label,
/// e.g. derive_seed(run_seed, "init", fold).
std::uint64_t derive_seed(std::uint64_t parent, std::string_view label, std::uint64_t index = 0);

/// Uniform double in [0, 1) with 53 random bits.
double uniform01(Rng& rng);

/// Uniform double in [lo, hi).
double uniform(Rng& rng, double lo, double hi);

/// Unbiased uniform integer in [0, n). n must be positive.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

/// Standard normal via Box-Muller.
double standard_normal(Rng& rng);

/// Fisher-Yates shuffle.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

/// k distinct indices from [0, n), in draw order.
std::vector<std::size_t> sample_without_replacement(Rng& rng, std::size_t n, std::size_t k);

}  // namespace vsum

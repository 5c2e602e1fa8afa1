// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace ldlpose::rng {

// mt19937_64 output is fully specified by the standard. The helpers below
// avoid std::*_distribution, whose value sequences differ across standard
// library implementations; with them every seeded draw is reproducible
// bit-for-bit on any platform.

/// Uniform double in [0, 1) using the top 53 bits of one engine draw.
inline double uniform_unit(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& g, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(g);
}

/// Standard normal via Box-Muller (cosine branch, two draws per call).
inline double normal(std::mt19937_64& g) {
  const double u1 = 1.0 - uniform_unit(g); // (0, 1]
  const double u2 = uniform_unit(g);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

/// Unbiased integer in [0, n) by rejection. Precondition: n > 0.
inline std::uint64_t below(std::mt19937_64& g, std::uint64_t n) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % n;
  for (;;) {
    const std::uint64_t v = g();
    if (v < limit) return v % n;
  }
}

/// In-place Fisher-Yates shuffle.
template <class T>
void shuffle(std::vector<T>& v, std::mt19937_64& g) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[below(g, i)]);
  }
}

inline std::vector<std::size_t> permutation(std::size_t n, std::mt19937_64& g) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  shuffle(idx, g);
  return idx;
}

} // namespace ldlpose::rng

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

// Deterministic random helpers. std::mt19937_64 is bit-exact across
// implementations, but the standard distributions are not, so the
// transforms live here.

namespace deasel {

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) using the top 53 bits of the engine output.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Standard normal via Box-Muller (cosine branch only).
inline double normal01(Rng& rng) {
  double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
  double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

/// Unbiased-enough integer in [0, n) via 128-bit multiply; n > 0.
inline std::uint64_t below(Rng& rng, std::uint64_t n) {
  return static_cast<std::uint64_t>(
      (static_cast<unsigned __int128>(rng()) * n) >> 64);
}

/// Fisher-Yates; std::shuffle is implementation-defined, this is not.
template <class T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(below(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace deasel

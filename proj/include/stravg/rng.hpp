#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "stravg/vec.hpp"

namespace stravg {

// Deterministic, implementation-independent randomness. Traces must replay
// bit-identically, so we do not rely on std::shuffle / std::*_distribution
// (their outputs are not pinned by the standard); the generator and the
// draws below are fixed by this code.

/// splitmix64 step.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Stateless mix of a seed and a stream label; used to derive sub-seeds
/// (per iteration number, per component) from one top-level seed.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed ^ (0x9E3779B97F4A7C15ull * (stream + 1));
  splitmix64(s);
  return s;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {
    // warm up so that small seeds do not produce correlated first draws
    splitmix64(state_);
    splitmix64(state_);
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  /// Uniform in [0, n) by rejection; exact and portable.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t limit = ~0ull - (~0ull % n);
    std::uint64_t v;
    do {
      v = next_u64();
    } while (v >= limit);
    return v % n;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double next_in(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

  void shuffle(std::span<int> v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
};

/// Deterministic unit vector in R^dim from (seed, k). Components are drawn
/// from a Box-Muller normal and the result normalized; the all-tiny draw is
/// retried so the normalization is well conditioned.
inline Vector random_unit_vector(std::uint64_t seed, long k, int dim) {
  Rng rng(mix_seed(seed, static_cast<std::uint64_t>(k)));
  Vector v(static_cast<std::size_t>(dim));
  for (;;) {
    for (int j = 0; j < dim; ++j) {
      double u1 = rng.next_unit();
      while (u1 == 0.0) u1 = rng.next_unit();
      const double u2 = rng.next_unit();
      v[static_cast<std::size_t>(j)] =
          std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }
    const double n = norm(v);
    if (n > 1e-6) {
      for (double& c : v) c /= n;
      return v;
    }
  }
}

}  // namespace stravg

#pragma once

// Seeded random instances shared by the property tests and the acceptance
// suite.

#include "stravg/family.hpp"
#include "stravg/rng.hpp"
#include "stravg/weight_function.hpp"

namespace gen {

using stravg::ConvexSet;
using stravg::Rng;
using stravg::Vector;

inline Vector point(Rng& rng, int n, double range = 10.0) {
  Vector x(static_cast<std::size_t>(n));
  for (double& c : x) c = rng.next_in(-range, range);
  return x;
}

inline Vector nonzero(Rng& rng, int n, double range = 4.0) {
  for (;;) {
    Vector a = point(rng, n, range);
    if (stravg::norm(a) > 0.3) return a;
  }
}

/// A random set of the requested variant id (0..6), valid by construction.
inline ConvexSet set_of_variant(Rng& rng, int n, int variant) {
  switch (variant) {
    case 0:
      return stravg::Halfspace{nonzero(rng, n), rng.next_in(-5.0, 5.0)};
    case 1:
      return stravg::Hyperplane{nonzero(rng, n), rng.next_in(-5.0, 5.0)};
    case 2:
      return stravg::Ball{point(rng, n, 5.0), rng.next_in(0.0, 4.0)};
    case 3: {
      Vector lo = point(rng, n, 5.0), hi = lo;
      for (std::size_t j = 0; j < hi.size(); ++j) hi[j] += rng.next_in(0.0, 5.0);
      return stravg::Box{std::move(lo), std::move(hi)};
    }
    case 4:
      return stravg::Ray2D{rng.next_in(0.0, 6.2831853)};
    case 5: {
      for (;;) {
        Vector v1 = point(rng, 2, 4.0), v2 = point(rng, 2, 4.0), v3 = point(rng, 2, 4.0);
        const double area2 = std::abs((v2[0] - v1[0]) * (v3[1] - v1[1]) -
                                      (v3[0] - v1[0]) * (v2[1] - v1[1]));
        if (area2 > 0.5)
          return stravg::Triangle2D{std::move(v1), std::move(v2), std::move(v3)};
      }
    }
    default:
      return stravg::WholeSpace{n};
  }
}

/// A random set (any variant legal in dimension n).
inline ConvexSet any_set(Rng& rng, int n) {
  for (;;) {
    const int v = static_cast<int>(rng.next_below(7));
    if (n != 2 && (v == 4 || v == 5)) continue;
    return set_of_variant(rng, n, v);
  }
}

/// A random set that contains the point c (for fixtures with a known
/// common point).
inline ConvexSet set_containing(Rng& rng, int n, const Vector& c) {
  for (;;) {
    const int v = static_cast<int>(rng.next_below(7));
    switch (v) {
      case 0: {  // halfspace with c inside (possibly strictly)
        Vector a = nonzero(rng, n);
        return stravg::Halfspace{a, stravg::dot(a, c) + rng.next_in(0.0, 3.0)};
      }
      case 1: {  // hyperplane through c
        Vector a = nonzero(rng, n);
        return stravg::Hyperplane{a, stravg::dot(a, c)};
      }
      case 2: {  // ball around a shifted center
        Vector ctr = c;
        for (double& x : ctr) x += rng.next_in(-2.0, 2.0);
        return stravg::Ball{ctr, stravg::dist(ctr, c) + rng.next_in(0.0, 2.0)};
      }
      case 3: {  // box straddling c
        Vector lo = c, hi = c;
        for (std::size_t j = 0; j < lo.size(); ++j) {
          lo[j] -= rng.next_in(0.0, 3.0);
          hi[j] += rng.next_in(0.0, 3.0);
        }
        return stravg::Box{std::move(lo), std::move(hi)};
      }
      case 4: {  // triangle fanned around c
        if (n != 2) continue;
        const double base = rng.next_in(0.0, 6.2831853);
        Vector v1 = c, v2 = c, v3 = c;
        auto place = [&](Vector& v, double ang) {
          const double r = rng.next_in(1.0, 4.0);
          v[0] += r * std::cos(ang);
          v[1] += r * std::sin(ang);
        };
        place(v1, base + rng.next_in(-0.9, 0.9));
        place(v2, base + 2.0943951 + rng.next_in(-0.9, 0.9));
        place(v3, base + 4.1887902 + rng.next_in(-0.9, 0.9));
        return stravg::Triangle2D{std::move(v1), std::move(v2), std::move(v3)};
      }
      case 5: {  // ray through c (requires c != 0 in R^2)
        if (n != 2 || stravg::norm(c) < 1e-9) continue;
        return stravg::Ray2D{std::atan2(c[1], c[0])};
      }
      default:
        return stravg::WholeSpace{n};
    }
  }
}

/// A random weight function over indices 1..max_index with 1..3 strings of
/// length <= 4; weights normalized to sum 1.
inline stravg::WeightFunction weight_function(Rng& rng, int max_index) {
  const int entries = 1 + static_cast<int>(rng.next_below(3));
  std::vector<std::pair<stravg::IndexVector, double>> pairs;
  double total = 0.0;
  for (int e = 0; e < entries; ++e) {
    stravg::IndexVector iv(1 + rng.next_below(4));
    for (auto& i : iv) i = 1 + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(max_index)));
    const double w = rng.next_in(0.1, 1.0);
    total += w;
    pairs.emplace_back(std::move(iv), w);
  }
  for (auto& [iv, w] : pairs) w /= total;
  return stravg::make_weight(pairs);
}

}  // namespace gen

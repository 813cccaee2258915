#pragma once

#include "stravg/family.hpp"
#include "stravg/index_vector.hpp"

namespace stravg {

/// Applies P[iota] = P_{iota_m} o ... o P_{iota_1} to the buffer in place.
/// Strings are evaluated strictly left to right; projections do not
/// commute. Identity operators (C_i = R^n) are skipped, which leaves the
/// buffer bit-identical to applying them.
inline void apply_string_inplace(const Family& family, std::span<const int> iv, Vector& x) {
  require_valid_index_vector(iv);
  for (int i : iv) {
    if (family.is_identity(i)) continue;
    project_inplace(family.set(i), x);
  }
}

/// P[iota](x); the result lies in C_{iota_m}.
inline Vector apply_string(const Family& family, std::span<const int> iv, const Vector& x) {
  Vector y = x;
  apply_string_inplace(family, iv, y);
  return y;
}

/// Applies P^eps[iota]: each step projects only when the current point is
/// at distance >= eps from the step's set and leaves it unchanged
/// otherwise.
inline void apply_string_eps_inplace(const Family& family, std::span<const int> iv, Vector& x,
                                     double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  require_valid_index_vector(iv);
  Vector proj;
  for (int i : iv) {
    if (family.is_identity(i)) continue;  // d(x, R^n) = 0 < eps
    proj = x;
    project_inplace(family.set(i), proj);
    if (dist(x, proj) >= eps) x = proj;
  }
}

inline Vector apply_string_eps(const Family& family, std::span<const int> iv, const Vector& x,
                               double eps) {
  Vector y = x;
  apply_string_eps_inplace(family, iv, y, eps);
  return y;
}

}  // namespace stravg

#pragma once

#include <algorithm>
#include <map>

#include "stravg/engine.hpp"

namespace stravg {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// One hyperplane {x : A_i . x = b_i} per equation of a linear system.
inline Family family_linear_system(const std::vector<std::vector<double>>& A,
                                   const std::vector<double>& b) {
  if (A.empty() || A.size() != b.size())
    throw std::invalid_argument("system needs one right-hand side per row");
  std::vector<ConvexSet> sets;
  sets.reserve(A.size());
  for (std::size_t i = 0; i < A.size(); ++i) {
    if (norm_sq(A[i]) == 0.0)
      throw std::invalid_argument("row " + std::to_string(i + 1) + " of the system is zero");
    sets.push_back(Hyperplane{A[i], b[i]});
  }
  return Family::finite(std::move(sets));
}

/// Infinite family of concentric balls with nonincreasing radii
/// (C_i contains C_{i+1}, one of the collections for which UASC holds).
inline Family family_descending_chain(Vector center, std::function<double(int)> radius) {
  if (!radius) throw std::invalid_argument("radius rule must be callable");
  const int n = static_cast<int>(center.size());
  auto gen = [center = std::move(center), radius = std::move(radius)](int i) -> ConvexSet {
    const double r = radius(i);
    if (i > 1 && radius(i - 1) < r)
      throw std::invalid_argument("chain radii must be nonincreasing (violated at index " +
                                  std::to_string(i) + ")");
    return Ball{center, r};
  };
  return Family::infinite(n, std::move(gen));
}

/// The triangle family with vertices (-1,0), (1,0), (cos pi/2^i, sin pi/2^i);
/// every member contains the segment [(-1,0),(1,0)], which is the
/// intersection of the whole collection.
inline Family family_triangles() {
  auto gen = [](int i) -> ConvexSet {
    const double ang = 3.14159265358979323846 / std::pow(2.0, static_cast<double>(i));
    return Triangle2D{{-1.0, 0.0}, {1.0, 0.0}, {std::cos(ang), std::sin(ang)}};
  };
  return Family::infinite(2, std::move(gen));
}

/// Prefix of the nondecreasing angle sequence built from the harmonic
/// partial sums phi_i = sum_{j<=i} 1/j by inserting, for each j >= 0, the
/// values (phi_j mod 2pi) + (2j+1) 2^k pi for k >= 1. The inserted values
/// revisit earlier directions, so the direction of theta_i mod 2pi keeps
/// recurring while the increments stay O(1/i).
struct ThetaSequence {
  std::vector<double> value;  // theta_i, nondecreasing
  std::vector<double> dir;    // theta_i mod 2pi, exact for inserted values
  std::vector<int> inserted_from;  // -1 for base entries, else the source j
  double max_step = 0.0;           // max |theta_{i+1} - theta_i|
  double measured_A = 0.0;         // max |theta_{i+1} - theta_i| * max(i,1)

  std::size_t size() const { return value.size(); }
};

inline ThetaSequence theta_sequence(std::size_t prefix_len) {
  if (prefix_len < 1) throw std::invalid_argument("prefix length must be >= 1");

  struct Entry {
    double value;
    double dir;
    int from;  // -1 = base
  };
  std::vector<Entry> base;
  base.reserve(prefix_len + 1);
  double phi = 0.0;
  base.push_back({0.0, 0.0, -1});  // phi_0 = 0
  for (std::size_t i = 1; i < prefix_len; ++i) {
    phi += 1.0 / static_cast<double>(i);
    base.push_back({phi, std::fmod(phi, kTwoPi), -1});
  }
  const double ceiling = base.back().value;

  // all inserted values below the ceiling; the smallest candidate for
  // source j is (2j+1)*2pi, so only finitely many sources contribute
  std::vector<Entry> ins;
  for (int j = 0; static_cast<std::size_t>(j) < base.size(); ++j) {
    if (static_cast<double>(2 * j + 1) * kTwoPi > ceiling) break;
    const double basedir = base[static_cast<std::size_t>(j)].dir;
    for (int k = 1;; ++k) {
      const double v =
          basedir + static_cast<double>(2 * j + 1) * std::pow(2.0, k) * (kTwoPi / 2.0);
      if (v > ceiling) break;
      ins.push_back({v, basedir, j});
    }
  }
  std::stable_sort(ins.begin(), ins.end(),
                   [](const Entry& a, const Entry& b) { return a.value < b.value; });

  // stable merge, base entries first on ties
  ThetaSequence out;
  out.value.reserve(prefix_len);
  out.dir.reserve(prefix_len);
  out.inserted_from.reserve(prefix_len);
  std::size_t bi = 0, ii = 0;
  while (out.value.size() < prefix_len) {
    const bool take_base =
        ii >= ins.size() || (bi < base.size() && base[bi].value <= ins[ii].value);
    const Entry& e = take_base ? base[bi++] : ins[ii++];
    out.value.push_back(e.value);
    out.dir.push_back(e.dir);
    out.inserted_from.push_back(e.from);
  }

  for (std::size_t i = 0; i + 1 < out.value.size(); ++i) {
    const double step = out.value[i + 1] - out.value[i];
    out.max_step = std::max(out.max_step, step);
    out.measured_A = std::max(out.measured_A, step * static_cast<double>(std::max<std::size_t>(i, 1)));
  }
  return out;
}

/// The non-convergence example: rays R_i from the origin through
/// (cos theta_i, sin theta_i), deduplicated to distinct sets C_i by first
/// occurrence, with the singleton-weight control w^k = {(alpha(k+1)): 1}
/// and seed x^0 = (cos theta_0, sin theta_0).
struct RaysCounterexample {
  Family family;          // C_1..C_D, a prefix of an infinite collection
  Schedule schedule;      // w^k = {(alpha(k+1)): 1}
  std::shared_ptr<const std::vector<int>> alpha;  // alpha[i-1] = index with R_i = C_alpha(i)
  ThetaSequence theta;
  Vector x0;

  /// Predicted ||x^k|| = prod_{i=0}^{k-1} cos(theta_{i+1} - theta_i).
  std::vector<double> norm_products(std::size_t upto) const {
    std::vector<double> p(upto + 1);
    p[0] = 1.0;
    for (std::size_t i = 0; i < upto; ++i)
      p[i + 1] = p[i] * std::cos(theta.value[i + 1] - theta.value[i]);
    return p;
  }
};

inline RaysCounterexample family_rays_counterexample(std::size_t prefix_len) {
  if (prefix_len < 2) throw std::invalid_argument("the rays example needs a prefix of >= 2 angles");
  ThetaSequence theta = theta_sequence(prefix_len);

  // first-occurrence deduplication of ray directions; directions recur
  // bit-exactly by construction, the tolerance only absorbs mod-reduction
  // rounding between a base value and an independently reduced duplicate
  std::vector<ConvexSet> rays;
  auto alpha = std::make_shared<std::vector<int>>();
  alpha->reserve(prefix_len - 1);
  std::map<double, int> seen;  // dir -> dedup index
  for (std::size_t i = 1; i < prefix_len; ++i) {
    const double d = theta.dir[i];
    int id = 0;
    auto it = seen.lower_bound(d - 1e-15);
    if (it != seen.end() && std::abs(it->first - d) <= 1e-15) {
      id = it->second;
    } else {
      rays.push_back(Ray2D{d});
      id = static_cast<int>(rays.size());
      seen.emplace(d, id);
    }
    alpha->push_back(id);
  }

  RaysCounterexample out{Family::infinite_prefix(std::move(rays)),
                         Schedule::singleton_sequence(alpha), alpha, std::move(theta),
                         Vector{}};
  out.x0 = {std::cos(out.theta.value[0]), std::sin(out.theta.value[0])};
  return out;
}

/// Direction of a nonzero 2-vector normalized into [0, 2pi). The rays
/// iterates live on rays through the origin, so this is theta_k mod 2pi.
inline double direction_angle(const Vector& x) {
  const double a = std::atan2(x[1], x[0]);
  return a < 0.0 ? a + kTwoPi : a;
}

}  // namespace stravg

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <variant>

#include "stravg/vec.hpp"

namespace stravg {

// Closed convex set catalog. Every variant is nonempty, closed and convex;
// parameter validity is checked at construction so projection never fails.

/// {x : a.x <= b}, a != 0.
struct Halfspace {
  Vector a;
  double b;
};

/// {x : a.x = b}, a != 0.
struct Hyperplane {
  Vector a;
  double b;
};

struct Ball {
  Vector center;
  double radius;  // >= 0; radius 0 is a singleton
};

/// {x : lo <= x <= hi} componentwise.
struct Box {
  Vector lo, hi;
};

/// Closed ray from the origin through (cos theta, sin theta). R^2 only.
struct Ray2D {
  double theta;
};

/// Closed triangle with the given vertices (degenerate triangles are
/// allowed; they are still nonempty, closed and convex). R^2 only.
struct Triangle2D {
  Vector v1, v2, v3;
};

/// All of R^n; its projection operator is the identity map.
struct WholeSpace {
  int dim;
};

class ConvexSet {
 public:
  using Variant = std::variant<Halfspace, Hyperplane, Ball, Box, Ray2D, Triangle2D, WholeSpace>;

  ConvexSet(Halfspace h) : v_(std::move(h)) { validate(); }
  ConvexSet(Hyperplane h) : v_(std::move(h)) { validate(); }
  ConvexSet(Ball b) : v_(std::move(b)) { validate(); }
  ConvexSet(Box b) : v_(std::move(b)) { validate(); }
  ConvexSet(Ray2D r) : v_(r) { validate(); }
  ConvexSet(Triangle2D t) : v_(std::move(t)) { validate(); }
  ConvexSet(WholeSpace w) : v_(w) { validate(); }

  const Variant& variant() const { return v_; }

  int dim() const {
    return std::visit(
        [](const auto& s) -> int {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Halfspace> || std::is_same_v<T, Hyperplane>)
            return static_cast<int>(s.a.size());
          else if constexpr (std::is_same_v<T, Ball>)
            return static_cast<int>(s.center.size());
          else if constexpr (std::is_same_v<T, Box>)
            return static_cast<int>(s.lo.size());
          else if constexpr (std::is_same_v<T, Ray2D> || std::is_same_v<T, Triangle2D>)
            return 2;
          else
            return s.dim;
        },
        v_);
  }

  bool is_whole_space() const { return std::holds_alternative<WholeSpace>(v_); }

 private:
  void validate() const;
  Variant v_;
};

namespace detail {

inline void project_hyperplane_inplace(const Vector& a, double b, Vector& x) {
  const double t = (dot(a, x) - b) / norm_sq(a);
  for (std::size_t j = 0; j < x.size(); ++j) x[j] -= t * a[j];
}

inline void project_segment_candidate(std::span<const double> p, std::span<const double> q,
                                      std::span<const double> x, Vector& best, double& best_d2) {
  // nearest point of segment [p,q] to x
  double qp2 = 0.0, t = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = q[j] - p[j];
    qp2 += d * d;
    t += (x[j] - p[j]) * d;
  }
  t = (qp2 > 0.0) ? std::clamp(t / qp2, 0.0, 1.0) : 0.0;
  double d2 = 0.0;
  Vector cand(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    cand[j] = p[j] + t * (q[j] - p[j]);
    const double d = cand[j] - x[j];
    d2 += d * d;
  }
  if (d2 < best_d2) {
    best_d2 = d2;
    best = std::move(cand);
  }
}

inline bool triangle_contains(const Triangle2D& t, std::span<const double> x) {
  // barycentric sign test; degenerate triangles report "outside" and are
  // handled by the edge projections
  const double x1 = t.v1[0], y1 = t.v1[1];
  const double x2 = t.v2[0], y2 = t.v2[1];
  const double x3 = t.v3[0], y3 = t.v3[1];
  const double den = (y2 - y3) * (x1 - x3) + (x3 - x2) * (y1 - y3);
  if (den == 0.0) return false;
  const double l1 = ((y2 - y3) * (x[0] - x3) + (x3 - x2) * (x[1] - y3)) / den;
  const double l2 = ((y3 - y1) * (x[0] - x3) + (x1 - x3) * (x[1] - y3)) / den;
  const double l3 = 1.0 - l1 - l2;
  return l1 >= 0.0 && l2 >= 0.0 && l3 >= 0.0;
}

}  // namespace detail

inline void ConvexSet::validate() const {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Halfspace> || std::is_same_v<T, Hyperplane>) {
          if (s.a.empty()) throw std::invalid_argument("normal vector must have dimension >= 1");
          if (!is_finite(s.a) || !std::isfinite(s.b))
            throw std::invalid_argument("set parameters must be finite");
          if (norm_sq(s.a) == 0.0) throw std::invalid_argument("normal vector must be nonzero");
        } else if constexpr (std::is_same_v<T, Ball>) {
          if (s.center.empty()) throw std::invalid_argument("ball center must have dimension >= 1");
          if (!is_finite(s.center) || !std::isfinite(s.radius))
            throw std::invalid_argument("set parameters must be finite");
          if (s.radius < 0.0) throw std::invalid_argument("ball radius must be >= 0");
        } else if constexpr (std::is_same_v<T, Box>) {
          require_same_dim(s.lo, s.hi);
          if (s.lo.empty()) throw std::invalid_argument("box must have dimension >= 1");
          if (!is_finite(s.lo) || !is_finite(s.hi))
            throw std::invalid_argument("set parameters must be finite");
          for (std::size_t j = 0; j < s.lo.size(); ++j)
            if (s.lo[j] > s.hi[j]) throw std::invalid_argument("box requires lo <= hi");
        } else if constexpr (std::is_same_v<T, Ray2D>) {
          if (!std::isfinite(s.theta)) throw std::invalid_argument("ray angle must be finite");
        } else if constexpr (std::is_same_v<T, Triangle2D>) {
          if (s.v1.size() != 2 || s.v2.size() != 2 || s.v3.size() != 2)
            throw std::invalid_argument("triangle vertices must lie in R^2");
          if (!is_finite(s.v1) || !is_finite(s.v2) || !is_finite(s.v3))
            throw std::invalid_argument("set parameters must be finite");
        } else if constexpr (std::is_same_v<T, WholeSpace>) {
          if (s.dim < 1) throw std::invalid_argument("ambient dimension must be >= 1");
        }
      },
      v_);
}

/// Projects x onto the set in place. Exact closed forms for every variant.
inline void project_inplace(const ConvexSet& set, Vector& x) {
  if (static_cast<int>(x.size()) != set.dim())
    throw std::invalid_argument("point dimension does not match set dimension");
  std::visit(
      [&x](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Halfspace>) {
          const double viol = dot(s.a, x) - s.b;
          if (viol > 0.0) {
            const double t = viol / norm_sq(s.a);
            for (std::size_t j = 0; j < x.size(); ++j) x[j] -= t * s.a[j];
          }
        } else if constexpr (std::is_same_v<T, Hyperplane>) {
          detail::project_hyperplane_inplace(s.a, s.b, x);
        } else if constexpr (std::is_same_v<T, Ball>) {
          double d2 = 0.0;
          for (std::size_t j = 0; j < x.size(); ++j) {
            const double d = x[j] - s.center[j];
            d2 += d * d;
          }
          if (d2 > s.radius * s.radius) {
            const double t = s.radius / std::sqrt(d2);
            for (std::size_t j = 0; j < x.size(); ++j)
              x[j] = s.center[j] + t * (x[j] - s.center[j]);
          }
        } else if constexpr (std::is_same_v<T, Box>) {
          for (std::size_t j = 0; j < x.size(); ++j)
            x[j] = std::clamp(x[j], s.lo[j], s.hi[j]);
        } else if constexpr (std::is_same_v<T, Ray2D>) {
          const double ux = std::cos(s.theta), uy = std::sin(s.theta);
          const double t = std::max(x[0] * ux + x[1] * uy, 0.0);
          x[0] = t * ux;
          x[1] = t * uy;
        } else if constexpr (std::is_same_v<T, Triangle2D>) {
          if (!detail::triangle_contains(s, x)) {
            Vector best;
            double best_d2 = std::numeric_limits<double>::infinity();
            detail::project_segment_candidate(s.v1, s.v2, x, best, best_d2);
            detail::project_segment_candidate(s.v2, s.v3, x, best, best_d2);
            detail::project_segment_candidate(s.v3, s.v1, x, best, best_d2);
            x = std::move(best);
          }
        } else {
          static_assert(std::is_same_v<T, WholeSpace>);
          // identity map
        }
      },
      set.variant());
}

/// The unique nearest point of the set. Idempotent; returns x itself when
/// x already belongs to the set.
inline Vector project(const ConvexSet& set, const Vector& x) {
  Vector y = x;
  project_inplace(set, y);
  return y;
}

/// d(x, S) = ||x - project(S, x)||.
inline double distance(const ConvexSet& set, const Vector& x) {
  Vector y = x;
  project_inplace(set, y);
  return dist(x, y);
}

/// Scale-relative membership test: x in S iff d(x,S) <= 1e-12 * (1 + ||x||).
inline bool contains(const ConvexSet& set, const Vector& x) {
  return distance(set, x) <= 1e-12 * (1.0 + norm(x));
}

}  // namespace stravg

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace stravg {

/// A point in R^n. The dimension is fixed per problem instance; every
/// vector taking part in one run shares it.
using Vector = std::vector<double>;

inline void require_same_dim(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("dimension mismatch: " + std::to_string(x.size()) +
                                " vs " + std::to_string(y.size()));
}

inline bool is_finite(std::span<const double> x) {
  for (double c : x)
    if (!std::isfinite(c)) return false;
  return true;
}

inline double dot(std::span<const double> x, std::span<const double> y) {
  require_same_dim(x, y);
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += x[j] * y[j];
  return s;
}

inline double norm_sq(std::span<const double> x) {
  double s = 0.0;
  for (double c : x) s += c * c;
  return s;
}

/// Euclidean norm.
inline double norm(std::span<const double> x) { return std::sqrt(norm_sq(x)); }

inline Vector sub(std::span<const double> x, std::span<const double> y) {
  require_same_dim(x, y);
  Vector r(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) r[j] = x[j] - y[j];
  return r;
}

inline Vector add(std::span<const double> x, std::span<const double> y) {
  require_same_dim(x, y);
  Vector r(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) r[j] = x[j] + y[j];
  return r;
}

/// alpha*x + y.
inline Vector axpy(double alpha, std::span<const double> x, std::span<const double> y) {
  require_same_dim(x, y);
  Vector r(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) r[j] = alpha * x[j] + y[j];
  return r;
}

inline Vector scale(double alpha, std::span<const double> x) {
  Vector r(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) r[j] = alpha * x[j];
  return r;
}

inline double dist(std::span<const double> x, std::span<const double> y) {
  require_same_dim(x, y);
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double d = x[j] - y[j];
    s += d * d;
  }
  return std::sqrt(s);
}

/// Compensated (Neumaier) summation; keeps axiom checks tight even for
/// weight functions with 1e5 entries.
class NeumaierSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace stravg

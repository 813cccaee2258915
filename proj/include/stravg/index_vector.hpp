#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace stravg {

/// A nonempty finite sequence of positive set indices (iota_1,...,iota_m).
using IndexVector = std::vector<int>;

inline void require_valid_index_vector(std::span<const int> iv) {
  if (iv.empty()) throw std::invalid_argument("index vector must be nonempty");
  for (int i : iv)
    if (i < 1) throw std::invalid_argument("index vector entries must be >= 1");
}

/// First 1-based position of an index in an index vector, or the
/// distinguished "not present" value. Kept as a closed value type rather
/// than a sentinel integer so the only arithmetic possible is the
/// deliberate w/Position convention below.
class Position {
 public:
  static constexpr Position infinite() { return Position(0); }
  static constexpr Position at(int j) { return Position(j); }

  constexpr bool is_infinite() const { return j_ == 0; }
  constexpr int value() const {
    if (j_ == 0) throw std::logic_error("Position is infinite");
    return j_;
  }
  constexpr bool operator==(const Position&) const = default;

  /// w / Position(i,iota), with the convention w / infinity = 0.
  friend constexpr double weight_over(double w, Position p) {
    return p.is_infinite() ? 0.0 : w / static_cast<double>(p.j_);
  }

 private:
  explicit constexpr Position(int j) : j_(j) {}
  int j_;
};

/// Least j with iota_j = i, or infinite when i does not occur.
inline Position position(int i, std::span<const int> iv) {
  if (i < 1) throw std::invalid_argument("indices are positive integers");
  for (std::size_t j = 0; j < iv.size(); ++j)
    if (iv[j] == i) return Position::at(static_cast<int>(j) + 1);
  return Position::infinite();
}

/// True iff i occurs in iota (i.e. iota belongs to the paper's I<i>).
inline bool contains_index(std::span<const int> iv, int i) {
  for (int j : iv)
    if (j == i) return true;
  return false;
}

}  // namespace stravg

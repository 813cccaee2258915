#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <utility>

#include "stravg/index_vector.hpp"
#include "stravg/vec.hpp"

namespace stravg {

/// A finite-support map from index vectors to averaging weights.
///
/// Axiom A: the support is finite (zero-weight entries are not stored).
/// Axiom B: the stored weights sum to 1 (validated to 1e-12 with
/// compensated summation, then renormalized by the computed sum).
///
/// Entries are kept in canonical (lexicographic) order; the engine relies
/// on this for its fixed summation order. Storage is a flat index pool so
/// that emitting large weight functions does not allocate per entry.
class WeightFunction {
 public:
  static constexpr double kSumTolerance = 1e-12;

  struct Entry {
    std::span<const int> indices;
    double weight;
  };

  class const_iterator {
   public:
    const_iterator(const WeightFunction* w, std::size_t i) : w_(w), i_(i) {}
    Entry operator*() const { return w_->entry(i_); }
    const_iterator& operator++() {
      ++i_;
      return *this;
    }
    bool operator!=(const const_iterator& o) const { return i_ != o.i_; }

   private:
    const WeightFunction* w_;
    std::size_t i_;
  };

  WeightFunction() = default;

  /// Builds and validates a weight function from (index vector, weight)
  /// pairs. Zero weights are dropped, duplicate index vectors merged,
  /// negative weights and sums off by more than 1e-12 rejected.
  static WeightFunction from_pairs(const std::vector<std::pair<IndexVector, double>>& pairs) {
    WeightFunction w;
    for (const auto& [iv, wt] : pairs) {
      require_valid_index_vector(iv);
      if (wt < 0.0) throw std::invalid_argument("weights must be >= 0");
      if (wt == 0.0) continue;
      w.push_back(iv, wt);
    }
    w.sort_canonical();
    w.merge_duplicates();
    w.validate_and_normalize();
    return w;
  }

  std::size_t size() const { return ents_.size(); }
  bool empty() const { return ents_.empty(); }
  const_iterator begin() const { return {this, 0}; }
  const_iterator end() const { return {this, ents_.size()}; }

  Entry entry(std::size_t i) const {
    const Ent& e = ents_[i];
    return {std::span<const int>(pool_.data() + e.off, e.len), e.w};
  }

  /// maxLength(w): longest string in the support.
  int max_length() const {
    if (ents_.empty()) throw std::logic_error("weight function has empty support");
    int m = 0;
    for (const Ent& e : ents_) m = std::max(m, static_cast<int>(e.len));
    return m;
  }

  /// Sum of w(iota) over the support entries that contain index i.
  double index_weight_sum(int i) const {
    double s = 0.0;
    for (const Ent& e : ents_)
      if (contains_index(indices_of(e), i)) s += e.w;
    return s;
  }

  /// Sum of w(iota)/Position(i,iota); entries not containing i contribute 0.
  double index_position_sum(int i) const {
    double s = 0.0;
    for (const Ent& e : ents_) s += weight_over(e.w, position(i, indices_of(e)));
    return s;
  }

  bool uses_index(int i) const {
    for (const Ent& e : ents_)
      if (contains_index(indices_of(e), i)) return true;
    return false;
  }

  double weight_of(std::span<const int> iv) const {
    for (const Ent& e : ents_) {
      auto s = indices_of(e);
      if (std::ranges::equal(s, iv)) return e.w;
    }
    return 0.0;
  }

  bool same_support_and_weights(const WeightFunction& o) const {
    if (ents_.size() != o.ents_.size()) return false;
    for (std::size_t i = 0; i < ents_.size(); ++i) {
      if (ents_[i].w != o.ents_[i].w) return false;
      if (!std::ranges::equal(indices_of(ents_[i]), o.indices_of(o.ents_[i]))) return false;
    }
    return true;
  }

  // --- low-level building interface used by schedule emission -------------
  // Emission fast paths construct entries directly and are responsible for
  // canonical order and the axioms; validate() is exercised by tests.

  void clear() {
    pool_.clear();
    ents_.clear();
  }

  void push_back(std::span<const int> iv, double w) {
    Ent e;
    e.off = static_cast<std::uint32_t>(pool_.size());
    e.len = static_cast<std::uint32_t>(iv.size());
    e.w = w;
    pool_.insert(pool_.end(), iv.begin(), iv.end());
    ents_.push_back(e);
  }

  void push_back_single(int i, double w) {
    Ent e;
    e.off = static_cast<std::uint32_t>(pool_.size());
    e.len = 1;
    e.w = w;
    pool_.push_back(i);
    ents_.push_back(e);
  }

  /// Overwrites every stored weight (uniform schedules reuse buffers).
  void set_all_weights(double w) {
    for (Ent& e : ents_) e.w = w;
  }

  void sort_canonical() {
    std::sort(ents_.begin(), ents_.end(), [this](const Ent& a, const Ent& b) {
      return std::ranges::lexicographical_compare(indices_of(a), indices_of(b));
    });
  }

  /// Checks axioms A and B; throws on violation.
  void validate() const {
    if (ents_.empty()) throw std::invalid_argument("weight function must use at least one string");
    NeumaierSum sum;
    for (const Ent& e : ents_) {
      require_valid_index_vector(indices_of(e));
      if (!(e.w > 0.0)) throw std::invalid_argument("stored weights must be strictly positive");
      if (e.w > 1.0 + kSumTolerance) throw std::invalid_argument("weights must lie in (0,1]");
      sum.add(e.w);
    }
    if (std::abs(sum.value() - 1.0) > kSumTolerance)
      throw std::invalid_argument("weights must sum to 1 (axiom B); got " +
                                  std::to_string(sum.value()));
  }

 private:
  struct Ent {
    std::uint32_t off;
    std::uint32_t len;
    double w;
  };

  std::span<const int> indices_of(const Ent& e) const {
    return {pool_.data() + e.off, e.len};
  }

  void merge_duplicates() {
    std::vector<Ent> merged;
    for (const Ent& e : ents_) {
      if (!merged.empty() && std::ranges::equal(indices_of(merged.back()), indices_of(e)))
        merged.back().w += e.w;
      else
        merged.push_back(e);
    }
    ents_ = std::move(merged);
  }

  void validate_and_normalize() {
    validate();
    NeumaierSum sum;
    for (const Ent& e : ents_) sum.add(e.w);
    const double s = sum.value();
    for (Ent& e : ents_) e.w /= s;
  }

  std::vector<int> pool_;
  std::vector<Ent> ents_;
};

/// make_weight of the library surface; see WeightFunction::from_pairs.
inline WeightFunction make_weight(const std::vector<std::pair<IndexVector, double>>& pairs) {
  return WeightFunction::from_pairs(pairs);
}

inline int max_length(const WeightFunction& w) { return w.max_length(); }
inline double index_weight_sum(const WeightFunction& w, int i) { return w.index_weight_sum(i); }
inline double index_position_sum(const WeightFunction& w, int i) {
  return w.index_position_sum(i);
}

}  // namespace stravg

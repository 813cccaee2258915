#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <optional>

#include "stravg/convex_set.hpp"

namespace stravg {

enum class FamilyKind { finite, infinite };

/// An indexed collection C_1, C_2, ... of closed convex sets.
///
/// A finite family stores C_1..C_K explicitly; indices beyond K resolve to
/// R^n, which makes the growing schedules applicable to finite problems
/// (the extra projection operators are identity maps). An infinite family
/// is backed either by a deterministic generator i -> C_i (memoized, so a
/// set is constructed once per index) or by an explicit prefix, in which
/// case access past the prefix is an error.
class Family {
 public:
  using Generator = std::function<ConvexSet(int)>;

  static Family finite(std::vector<ConvexSet> sets) {
    if (sets.empty()) throw std::invalid_argument("finite family must have at least one set");
    const int n = sets.front().dim();
    bool nontrivial = false;
    for (const auto& s : sets) {
      if (s.dim() != n) throw std::invalid_argument("family sets must share one dimension");
      if (!s.is_whole_space()) nontrivial = true;
    }
    if (!nontrivial)
      throw std::invalid_argument("family must contain at least one set other than R^n");
    Family f;
    f.kind_ = FamilyKind::finite;
    f.dim_ = n;
    f.impl_ = std::make_shared<Impl>();
    f.impl_->sets = std::move(sets);
    f.impl_->whole = ConvexSet(WholeSpace{n});
    return f;
  }

  static Family infinite_prefix(std::vector<ConvexSet> sets) {
    Family f = finite(std::move(sets));
    f.kind_ = FamilyKind::infinite;
    f.impl_->extend = false;
    return f;
  }

  static Family infinite(int dim, Generator gen) {
    if (dim < 1) throw std::invalid_argument("ambient dimension must be >= 1");
    if (!gen) throw std::invalid_argument("generator must be callable");
    Family f;
    f.kind_ = FamilyKind::infinite;
    f.dim_ = dim;
    f.impl_ = std::make_shared<Impl>();
    f.impl_->gen = std::move(gen);
    f.impl_->extend = false;
    return f;
  }

  FamilyKind kind() const { return kind_; }
  int dim() const { return dim_; }

  /// Number of explicitly stored sets (K for finite families, prefix
  /// length for materialized infinite ones, 0 for pure generators).
  int stored_count() const { return static_cast<int>(impl_->sets.size()); }

  /// True when indices beyond stored_count() resolve to R^n.
  bool extends_with_whole_space() const { return impl_->extend; }

  /// C_i for index i >= 1.
  const ConvexSet& set(int i) const {
    if (i < 1) throw std::invalid_argument("set indices start at 1");
    const int stored = stored_count();
    if (i <= stored) return impl_->sets[static_cast<std::size_t>(i - 1)];
    if (impl_->gen) return generate(i);
    if (impl_->extend) return *impl_->whole;
    throw std::out_of_range("family index " + std::to_string(i) +
                            " is not resolvable (prefix has " + std::to_string(stored) +
                            " sets)");
  }

  /// True when P_i is the identity map (C_i = R^n). Cheap for the
  /// extension range of finite families; resolves the set otherwise.
  bool is_identity(int i) const {
    if (i < 1) throw std::invalid_argument("set indices start at 1");
    if (i > stored_count() && impl_->extend && !impl_->gen) return true;
    return set(i).is_whole_space();
  }

 private:
  struct Impl {
    std::vector<ConvexSet> sets;
    std::optional<ConvexSet> whole;
    Generator gen;
    bool extend = true;
    // generator memo; lock-protected insertion, sets are immutable once made
    mutable std::mutex mu;
    mutable std::vector<std::unique_ptr<ConvexSet>> memo;
  };

  const ConvexSet& generate(int i) const {
    auto& m = *impl_;
    std::scoped_lock lock(m.mu);
    const std::size_t slot = static_cast<std::size_t>(i - 1);
    if (slot >= m.memo.size()) m.memo.resize(slot + 1);
    if (!m.memo[slot]) {
      auto s = std::make_unique<ConvexSet>(m.gen(i));
      if (s->dim() != dim_)
        throw std::invalid_argument("generated set dimension does not match family dimension");
      m.memo[slot] = std::move(s);
    }
    return *m.memo[slot];
  }

  FamilyKind kind_ = FamilyKind::finite;
  int dim_ = 0;
  std::shared_ptr<Impl> impl_;
};

}  // namespace stravg

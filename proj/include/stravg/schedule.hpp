#pragma once

#include <memory>
#include <numeric>
#include <optional>
#include <variant>

#include "stravg/rng.hpp"
#include "stravg/weight_function.hpp"

namespace stravg {

/// How the growing schedules pick "some permutation": either the identity
/// arrangement or a seeded Fisher-Yates shuffle with a per-k sub-seed.
struct PermMode {
  static PermMode identity() { return {true, 0}; }
  static PermMode seeded(std::uint64_t seed) { return {false, seed}; }
  bool is_identity = true;
  std::uint64_t seed = 0;
};

enum class CyclicBlock { single_index, full_cimmino, full_kaczmarz };
enum class TailRule { repeat_last, cycle };

/// A deterministic rule k -> w^k. Emissions satisfy axioms A and B; the
/// same (kind, parameters, seed, k) always yields the same weight function.
///
/// The growing rules are defined by their papers' recurrences from k = 1;
/// each uses w^0 = {((1),1)} so iteration can start at k = 0 uniformly.
class Schedule {
 public:
  /// w^k = {(1):1/k, ..., (k):1/k} (simultaneous-projection flavor).
  static Schedule cimmino_growing() { return Schedule(CimminoGrowing{}); }

  /// w^k = {perm(1..k): 1} (sweep flavor).
  static Schedule kaczmarz_growing(PermMode perm) { return Schedule(KaczmarzGrowing{perm}); }

  /// w^k = {(k+2): 1/2, perm of odd (resp. even) indices <= k: 1/2}.
  static Schedule odd_even(PermMode perm) { return Schedule(OddEven{perm}); }

  /// K-periodic classical schedules for a finite family of size K.
  static Schedule cyclic_finite(int K, CyclicBlock block) {
    if (K < 1) throw std::invalid_argument("cyclic schedule requires K >= 1");
    return Schedule(Cyclic{K, block});
  }

  /// Explicit per-iteration table with a tail rule past the horizon.
  static Schedule custom_table(std::vector<WeightFunction> table, TailRule tail) {
    if (table.empty()) throw std::invalid_argument("custom schedule table must be nonempty");
    for (const auto& w : table) w.validate();
    Custom c;
    c.table = std::make_shared<std::vector<WeightFunction>>(std::move(table));
    c.tail = tail;
    return Schedule(std::move(c));
  }

  /// w^k = {(alpha(k+1)): 1}; the control sequence of the rays example.
  static Schedule singleton_sequence(std::shared_ptr<const std::vector<int>> alpha) {
    if (!alpha || alpha->empty())
      throw std::invalid_argument("singleton sequence schedule requires a nonempty index list");
    return Schedule(SingletonSeq{std::move(alpha)});
  }

  /// Largest k for which w^k is defined, if the rule has a horizon.
  std::optional<long> horizon() const {
    if (const auto* s = std::get_if<SingletonSeq>(&v_))
      return static_cast<long>(s->alpha->size()) - 1;
    return std::nullopt;
  }

  /// Emits w^k into a scratch object, reusing its buffers. The result is
  /// identical to a fresh emission; when the same scratch is fed back
  /// unmodified for consecutive ks, the growing rules patch it in place
  /// instead of rebuilding.
  void emit(long k, WeightFunction& out) const {
    if (k < 0) throw std::invalid_argument("iteration numbers start at 0");
    std::visit([&](const auto& s) { emit_impl(s, k, out); }, v_);
    last_emitted_ = k;
    last_scratch_ = &out;
  }

  WeightFunction weights(long k) const {
    WeightFunction w;
    emit(k, w);
    return w;
  }

 private:
  struct CimminoGrowing {};
  struct KaczmarzGrowing {
    PermMode perm;
  };
  struct OddEven {
    PermMode perm;
  };
  struct Cyclic {
    int K;
    CyclicBlock block;
  };
  struct Custom {
    std::shared_ptr<std::vector<WeightFunction>> table;
    TailRule tail;
  };
  struct SingletonSeq {
    std::shared_ptr<const std::vector<int>> alpha;
  };
  using Variant = std::variant<CimminoGrowing, KaczmarzGrowing, OddEven, Cyclic, Custom, SingletonSeq>;

  explicit Schedule(Variant v) : v_(std::move(v)) {}

  static void emit_step0(WeightFunction& out) {
    out.clear();
    out.push_back_single(1, 1.0);
  }

  void emit_impl(const CimminoGrowing&, long k, WeightFunction& out) const {
    if (k == 0) {
      emit_step0(out);
      return;
    }
    // entries (1),(2),...,(k) are already in canonical order; when the
    // scratch still holds this schedule's step k-1 we only append the new
    // singleton and refresh the uniform weight
    const bool incremental = last_scratch_ == &out && last_emitted_ == k - 1 &&
                             out.size() == static_cast<std::size_t>(k - 1);
    if (!incremental) {
      out.clear();
      for (long i = 1; i <= k; ++i) out.push_back_single(static_cast<int>(i), 0.0);
    } else {
      out.push_back_single(static_cast<int>(k), 0.0);
    }
    out.set_all_weights(1.0 / static_cast<double>(k));
  }

  void emit_impl(const KaczmarzGrowing& s, long k, WeightFunction& out) const {
    out.clear();
    if (k == 0) {
      emit_step0(out);
      return;
    }
    std::vector<int> p(static_cast<std::size_t>(k));
    std::iota(p.begin(), p.end(), 1);
    if (!s.perm.is_identity) {
      Rng rng(mix_seed(s.perm.seed, static_cast<std::uint64_t>(k)));
      rng.shuffle(p);
    }
    out.push_back(p, 1.0);
  }

  void emit_impl(const OddEven& s, long k, WeightFunction& out) const {
    out.clear();
    if (k == 0) {
      emit_step0(out);
      return;
    }
    // odd k: permutation of (1,3,...,k); even k: permutation of (2,4,...,k)
    const long count = (k + 1) / 2;
    std::vector<int> p(static_cast<std::size_t>(count));
    const int first = (k % 2 == 1) ? 1 : 2;
    for (long j = 0; j < count; ++j) p[static_cast<std::size_t>(j)] = first + 2 * static_cast<int>(j);
    if (!s.perm.is_identity) {
      Rng rng(mix_seed(s.perm.seed, static_cast<std::uint64_t>(k)));
      rng.shuffle(p);
    }
    // every entry of the string is <= k < k+2, so the string precedes the
    // singleton (k+2) in canonical order
    out.push_back(p, 0.5);
    out.push_back_single(static_cast<int>(k + 2), 0.5);
  }

  void emit_impl(const Cyclic& s, long k, WeightFunction& out) const {
    out.clear();
    switch (s.block) {
      case CyclicBlock::single_index:
        out.push_back_single(static_cast<int>(k % s.K) + 1, 1.0);
        break;
      case CyclicBlock::full_cimmino: {
        const double w = 1.0 / static_cast<double>(s.K);
        for (int i = 1; i <= s.K; ++i) out.push_back_single(i, w);
        break;
      }
      case CyclicBlock::full_kaczmarz: {
        std::vector<int> p(static_cast<std::size_t>(s.K));
        std::iota(p.begin(), p.end(), 1);
        out.push_back(p, 1.0);
        break;
      }
    }
  }

  void emit_impl(const Custom& s, long k, WeightFunction& out) const {
    const auto& t = *s.table;
    std::size_t idx;
    if (k < static_cast<long>(t.size()))
      idx = static_cast<std::size_t>(k);
    else if (s.tail == TailRule::repeat_last)
      idx = t.size() - 1;
    else
      idx = static_cast<std::size_t>(k % static_cast<long>(t.size()));
    out = t[idx];
  }

  void emit_impl(const SingletonSeq& s, long k, WeightFunction& out) const {
    const auto& a = *s.alpha;
    if (k + 1 > static_cast<long>(a.size()))
      throw std::out_of_range("singleton sequence schedule exhausted at iteration " +
                              std::to_string(k));
    out.clear();
    out.push_back_single(a[static_cast<std::size_t>(k)], 1.0);
  }

  Variant v_;
  mutable long last_emitted_ = -2;
  mutable const WeightFunction* last_scratch_ = nullptr;
};

/// Convenience emitters matching the worked schedules by name.
inline WeightFunction schedule_cimmino_growing(long k) {
  if (k < 1) throw std::invalid_argument("the growing Cimmino rule is defined for k >= 1");
  return Schedule::cimmino_growing().weights(k);
}

inline WeightFunction schedule_kaczmarz_growing(long k, std::uint64_t perm_seed) {
  if (k < 1) throw std::invalid_argument("the growing Kaczmarz rule is defined for k >= 1");
  return Schedule::kaczmarz_growing(PermMode::seeded(perm_seed)).weights(k);
}

inline WeightFunction schedule_odd_even(long k, std::uint64_t perm_seed) {
  if (k < 1) throw std::invalid_argument("the odd/even rule is defined for k >= 1");
  return Schedule::odd_even(PermMode::seeded(perm_seed)).weights(k);
}

inline WeightFunction schedule_cyclic_finite(long k, int K, CyclicBlock block) {
  return Schedule::cyclic_finite(K, block).weights(k);
}

}  // namespace stravg

#pragma once

#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include "stravg/engine.hpp"

namespace stravg {

// Checkers for the sufficient-convergence hypotheses. All asymptotic
// conditions ("for all sufficiently large r") are evaluated on explicit
// finite horizons; verdicts are horizon-relative by construction and say
// so in their notes.

enum class Verdict { holds_on_horizon, violated, inapplicable };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::holds_on_horizon: return "holds-on-horizon";
    case Verdict::violated: return "violated";
    case Verdict::inapplicable: return "inapplicable";
  }
  return "?";
}

struct HypothesisReport {
  std::string id;
  Verdict verdict = Verdict::inapplicable;
  std::string note;
  // witness data for violated verdicts
  std::optional<long> violation_at;     // r (C1/C2) or k (H1-H3)
  std::optional<int> violation_index;   // offending set index
  std::optional<double> measured;       // measured bound / witness value

  std::string to_text() const {
    std::ostringstream os;
    os << id << ": " << to_string(verdict);
    if (violation_at) os << " at " << *violation_at;
    if (violation_index) os << " (index " << *violation_index << ")";
    if (measured) os << ", measured " << *measured;
    if (!note.empty()) os << " -- " << note;
    return os.str();
  }
};

/// f_r and kappa_r providers for the second-theorem conditions.
using SequenceFn = std::function<double(long)>;
using KappaFn = std::function<long(long)>;

/// C1: sum_{k=kappa_r}^{kappa_{r+1}-2} maxLength(w^k) <= 1/f_r for each
/// r <= r_max with kappa_{r+1} >= kappa_r + 2 and f_r > 0 (vacuous for
/// consecutive kappas).
inline HypothesisReport check_C1(const Schedule& sched, const SequenceFn& f, const KappaFn& kappa,
                                 long r_max) {
  HypothesisReport rep;
  rep.id = "C1";
  WeightFunction w;
  for (long r = 1; r <= r_max; ++r) {
    const long k_lo = kappa(r), k_hi = kappa(r + 1);
    if (k_hi <= k_lo) throw std::invalid_argument("kappa must be strictly increasing");
    const double fr = f(r);
    if (fr < 0.0 || fr > 1.0) throw std::invalid_argument("f_r must lie in [0,1]");
    if (k_hi < k_lo + 2 || fr <= 0.0) continue;  // vacuously satisfied
    double sum = 0.0;
    for (long k = k_lo; k <= k_hi - 2; ++k) {
      sched.emit(k, w);
      sum += static_cast<double>(w.max_length());
    }
    if (sum > 1.0 / fr) {
      rep.verdict = Verdict::violated;
      rep.violation_at = r;
      rep.measured = sum;
      rep.note = "sum of maxLength over [kappa_r, kappa_{r+1}-2] exceeds 1/f_r = " +
                 std::to_string(1.0 / fr);
      return rep;
    }
  }
  rep.verdict = Verdict::holds_on_horizon;
  rep.note = "checked r <= " + std::to_string(r_max);
  return rep;
}

/// C2: for every tracked index i,
/// max_{kappa_r <= k < kappa_{r+1}} sum_{iota in I<i>} w^k(iota)/Position(i,iota) >= f_r
/// for all r in [r_lo, r_hi]. The window stands in for "all sufficiently
/// large r"; default_c2_window picks the upper half of a checked range.
inline HypothesisReport check_C2(const Schedule& sched, const Family& fam, const SequenceFn& f,
                                 const KappaFn& kappa, long r_lo, long r_hi,
                                 const std::vector<int>& tracked) {
  HypothesisReport rep;
  rep.id = "C2";
  std::vector<int> active;
  for (int i : tracked)
    if (!fam.is_identity(i)) active.push_back(i);
  if (active.empty()) {
    rep.verdict = Verdict::inapplicable;
    rep.note = "no tracked index with C_i != R^n";
    return rep;
  }
  WeightFunction w;
  std::vector<double> best(active.size());
  for (long r = r_lo; r <= r_hi; ++r) {
    const long k_lo = kappa(r), k_hi = kappa(r + 1);
    if (k_hi <= k_lo) throw std::invalid_argument("kappa must be strictly increasing");
    const double fr = f(r);
    std::fill(best.begin(), best.end(), 0.0);
    for (long k = k_lo; k < k_hi; ++k) {
      sched.emit(k, w);
      for (std::size_t j = 0; j < active.size(); ++j)
        best[j] = std::max(best[j], w.index_position_sum(active[j]));
    }
    for (std::size_t j = 0; j < active.size(); ++j) {
      if (best[j] < fr) {
        rep.verdict = Verdict::violated;
        rep.violation_at = r;
        rep.violation_index = active[j];
        rep.measured = best[j];
        rep.note = "max over the kappa window of the position-weighted sum fell below f_r = " +
                   std::to_string(fr);
        return rep;
      }
    }
  }
  rep.verdict = Verdict::holds_on_horizon;
  rep.note = "checked r in [" + std::to_string(r_lo) + ", " + std::to_string(r_hi) + "] for " +
             std::to_string(active.size()) + " indices";
  return rep;
}

/// The "sufficiently large" window used when a caller checks r <= r_max
/// without picking a threshold: the upper half of the range.
inline std::pair<long, long> default_c2_window(long r_max) {
  return {r_max / 2 + 1, r_max};
}

struct H123Report {
  HypothesisReport h1, h2, h3;
  double inf_weight = 0.0;   // H1 candidate epsilon
  int max_len = 0;           // H2 candidate m
  std::optional<int> coverage_s;  // H3 candidate s
};

/// Measures the classical finite-case hypotheses on k <= k_max for a
/// family of size K: the infimum nonzero weight (H1), the maximum string
/// length (H2), and the smallest s such that every s consecutive weight
/// functions jointly use every index 1..K with C_i != R^n (H3).
///
/// The first two cannot be decided from finitely many terms; the verdict
/// heuristic reports violated-on-horizon when the running extremum still
/// moved in the second half of the horizon (the growing schedules keep
/// shrinking weights / growing strings, exactly the cases H1/H2 exclude).
inline H123Report check_H123(const Schedule& sched, const Family& fam, int K, long k_max) {
  if (K < 1) throw std::invalid_argument("family size K must be >= 1");
  H123Report out;
  out.h1.id = "H1";
  out.h2.id = "H2";
  out.h3.id = "H3";

  std::vector<int> nontrivial;
  for (int i = 1; i <= K; ++i)
    if (!fam.is_identity(i)) nontrivial.push_back(i);

  WeightFunction w;
  double inf_w = std::numeric_limits<double>::infinity();
  long inf_w_at = 0;
  int max_len = 0;
  long max_len_at = 0;
  std::vector<long> last_used(static_cast<std::size_t>(K) + 1, -1);
  std::vector<long> max_gap(static_cast<std::size_t>(K) + 1, 0);

  for (long k = 0; k <= k_max; ++k) {
    sched.emit(k, w);
    for (auto e : w) {
      if (e.weight < inf_w) {
        inf_w = e.weight;
        inf_w_at = k;
      }
      const int len = static_cast<int>(e.indices.size());
      if (len > max_len) {
        max_len = len;
        max_len_at = k;
      }
      for (int i : e.indices) {
        if (i > K) continue;
        auto& last = last_used[static_cast<std::size_t>(i)];
        max_gap[static_cast<std::size_t>(i)] = std::max(max_gap[static_cast<std::size_t>(i)], k - last);
        last = k;
      }
    }
  }

  out.inf_weight = inf_w;
  out.max_len = max_len;

  const long half = k_max / 2;
  if (inf_w_at > half) {
    out.h1.verdict = Verdict::violated;
    out.h1.violation_at = inf_w_at;
    out.h1.measured = inf_w;
    out.h1.note = "infimum nonzero weight was still falling in the second half of the horizon";
  } else {
    out.h1.verdict = Verdict::holds_on_horizon;
    out.h1.measured = inf_w;
    out.h1.note = "candidate epsilon = measured infimum weight";
  }
  if (max_len_at > half) {
    out.h2.verdict = Verdict::violated;
    out.h2.violation_at = max_len_at;
    out.h2.measured = static_cast<double>(max_len);
    out.h2.note = "maximum string length was still growing in the second half of the horizon";
  } else {
    out.h2.verdict = Verdict::holds_on_horizon;
    out.h2.measured = static_cast<double>(max_len);
    out.h2.note = "candidate m = measured maximum length";
  }

  long s = 1;
  std::optional<int> missing;
  for (int i : nontrivial) {
    if (last_used[static_cast<std::size_t>(i)] < 0) {
      missing = i;
      break;
    }
    // tail gap counts: a window may start after the last use
    max_gap[static_cast<std::size_t>(i)] =
        std::max(max_gap[static_cast<std::size_t>(i)], k_max + 1 - last_used[static_cast<std::size_t>(i)]);
    s = std::max(s, max_gap[static_cast<std::size_t>(i)]);
  }
  if (missing) {
    out.h3.verdict = Verdict::violated;
    out.h3.violation_index = *missing;
    out.h3.note = "index never used on the horizon";
  } else if (nontrivial.empty()) {
    out.h3.verdict = Verdict::inapplicable;
    out.h3.note = "no index with C_i != R^n among 1..K";
  } else {
    out.coverage_s = static_cast<int>(s);
    out.h3.verdict = Verdict::holds_on_horizon;
    out.h3.measured = static_cast<double>(s);
    out.h3.note = "candidate s = smallest covering window on the horizon";
  }
  return out;
}

enum class DivergenceClass { apparently_divergent, apparently_convergent, undetermined };

inline const char* to_string(DivergenceClass c) {
  switch (c) {
    case DivergenceClass::apparently_divergent: return "apparently-divergent";
    case DivergenceClass::apparently_convergent: return "apparently-convergent";
    case DivergenceClass::undetermined: return "undetermined";
  }
  return "?";
}

struct DivergenceInfo {
  double partial_sum = 0.0;
  double last_decade_increment = 0.0;
  DivergenceClass classification = DivergenceClass::undetermined;
};

struct DivergenceThresholds {
  // apparently divergent: the partial sum cleared sum_floor and the last
  // decade (k in (k_max/10, k_max]) still added growth_floor or more
  double sum_floor = 10.0;
  double growth_floor = 0.1;
  // apparently convergent: the last decade added less than tail_ceiling
  double tail_ceiling = 1e-6;
};

/// Partial sums sum_{k<=k_max} index_weight_sum(w^k, i) per index, with a
/// heuristic growth classification. Horizon-relative by nature: a sum that
/// diverges eventually can look convergent on any finite horizon.
inline std::map<int, DivergenceInfo> check_divergent_sums(
    const Schedule& sched, const std::vector<int>& indices, long k_max,
    const DivergenceThresholds& th = {}) {
  TrackedSums acc(indices);
  WeightFunction w;
  std::vector<double> at_decade;
  const long decade_start = k_max - k_max / 10;
  for (long k = 0; k <= k_max; ++k) {
    if (k == decade_start) at_decade = acc.sums();
    sched.emit(k, w);
    acc.accumulate(w);
  }
  if (at_decade.empty()) at_decade.assign(indices.size(), 0.0);
  std::map<int, DivergenceInfo> out;
  for (std::size_t j = 0; j < indices.size(); ++j) {
    DivergenceInfo info;
    info.partial_sum = acc.sums()[j];
    info.last_decade_increment = acc.sums()[j] - at_decade[j];
    if (info.partial_sum > th.sum_floor && info.last_decade_increment > th.growth_floor)
      info.classification = DivergenceClass::apparently_divergent;
    else if (info.last_decade_increment < th.tail_ceiling)
      info.classification = DivergenceClass::apparently_convergent;
    else
      info.classification = DivergenceClass::undetermined;
    out[indices[j]] = info;
  }
  return out;
}

/// Same sums read off a finished trace (the engine accumulates them for
/// its tracked indices).
inline std::map<int, DivergenceInfo> divergent_sums_from_trace(const Trace& trace,
                                                               const DivergenceThresholds& th = {}) {
  std::map<int, DivergenceInfo> out;
  for (std::size_t j = 0; j < trace.tracked.size(); ++j) {
    DivergenceInfo info;
    info.partial_sum = trace.cum_index_weight[j];
    // no decade snapshot in a trace; classify on the sum alone
    info.last_decade_increment = std::numeric_limits<double>::quiet_NaN();
    info.classification = info.partial_sum > th.sum_floor ? DivergenceClass::apparently_divergent
                                                          : DivergenceClass::undetermined;
    out[trace.tracked[j]] = info;
  }
  return out;
}

/// UASC(C) holds for every finite collection; for infinite ones the
/// checker only refers to the paper's known-true cases instead of
/// deciding.
inline HypothesisReport check_UASC_finite(const Family& fam) {
  HypothesisReport rep;
  rep.id = "UASC_FINITE";
  if (fam.kind() == FamilyKind::finite) {
    rep.verdict = Verdict::holds_on_horizon;
    rep.note = "finite collection: the union of any subcollection is closed";
  } else {
    rep.verdict = Verdict::inapplicable;
    rep.note = "infinite collection: not machine-checked (holds e.g. for descending chains)";
  }
  return rep;
}

struct FejerViolation {
  long k = 0;
  double before = 0.0;  // ||x^k - c||
  double after = 0.0;   // ||x^{k+1} - c||
};

struct FejerMonitorResult {
  std::vector<FejerViolation> violations;
  // diagnostic analogues of the proofs' constants, computable from c:
  // 2*||x^0 - c|| bounds M = 2*d(x^0, intersection) from above, and the
  // perturbed variant adds the declared perturbation budget.
  double diag_M_upper = 0.0;
  double diag_M_star_upper = 0.0;
};

/// Scans a trace with stored iterates for steps where the distance to c
/// increased beyond tolerance. Meaningful for plain mode (where the Fejer
/// lemma applies); advisory in perturbed modes.
inline FejerMonitorResult monitor_fejer(const Trace& trace, const Vector& c, double tol = 1e-9) {
  FejerMonitorResult out;
  out.diag_M_upper = 2.0 * dist(trace.x0, c);
  out.diag_M_star_upper = out.diag_M_upper + 2.0 * trace.perturbation_norm_sum;
  const Vector* prev = nullptr;
  long prev_k = 0;
  auto consider = [&](long k, const Vector& x) {
    if (prev && k == prev_k + 1) {
      const double before = dist(*prev, c);
      const double after = dist(x, c);
      if (after > before + tol) out.violations.push_back({prev_k, before, after});
    }
    prev = &x;
    prev_k = k;
  };
  for (const auto& r : trace.records)
    if (r.iterate) consider(r.k, *r.iterate);
  if (!trace.records.empty() && trace.steps == trace.records.back().k + 1)
    consider(trace.steps, trace.x_final);
  return out;
}

}  // namespace stravg

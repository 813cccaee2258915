#pragma once

#include <functional>
#include <optional>
#include <string>

#include "stravg/schedule.hpp"
#include "stravg/strings.hpp"

namespace stravg {

enum class Mode { plain, perturbed, superiorized, eps };

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::plain: return "plain";
    case Mode::perturbed: return "perturbed";
    case Mode::superiorized: return "superiorized";
    case Mode::eps: return "eps";
  }
  return "?";
}

/// Perturbation rule k -> v^k (perturbed/eps modes) or k -> (beta_k, u^k)
/// (superiorized mode), with a declared bound on sum ||v^k|| resp.
/// sum |beta_k| * sup ||u^k||. The engine never verifies the bound against
/// the rule's closed form; it only checks iterates stay finite.
class PerturbationPlan {
 public:
  enum class Kind { zero, decay_fixed, decay_random, superiorized_fixed, superiorized_random };

  static PerturbationPlan zero() { return PerturbationPlan(Kind::zero); }

  /// v^k = coeff * ratio^k * dir.
  static PerturbationPlan decay(double coeff, double ratio, Vector dir) {
    PerturbationPlan p(Kind::decay_fixed);
    p.check_ratio(ratio);
    p.coeff_ = coeff;
    p.ratio_ = ratio;
    p.dir_ = std::move(dir);
    return p;
  }

  /// v^k = coeff * ratio^k * (seeded random unit vector per k).
  static PerturbationPlan decay_random(double coeff, double ratio, std::uint64_t seed) {
    PerturbationPlan p(Kind::decay_random);
    p.check_ratio(ratio);
    p.coeff_ = coeff;
    p.ratio_ = ratio;
    p.seed_ = seed;
    return p;
  }

  /// beta_k = beta0 * ratio^k, u^k = u (fixed).
  static PerturbationPlan superiorized(double beta0, double ratio, Vector u) {
    PerturbationPlan p(Kind::superiorized_fixed);
    p.check_ratio(ratio);
    p.coeff_ = beta0;
    p.ratio_ = ratio;
    p.dir_ = std::move(u);
    return p;
  }

  /// beta_k = beta0 * ratio^k, u^k = seeded random unit vector per k.
  static PerturbationPlan superiorized_random(double beta0, double ratio, std::uint64_t seed) {
    PerturbationPlan p(Kind::superiorized_random);
    p.check_ratio(ratio);
    p.coeff_ = beta0;
    p.ratio_ = ratio;
    p.seed_ = seed;
    return p;
  }

  Kind kind() const { return kind_; }
  bool is_superiorized() const {
    return kind_ == Kind::superiorized_fixed || kind_ == Kind::superiorized_random;
  }
  bool is_zero() const { return kind_ == Kind::zero; }

  /// Declared bound B on sum_k ||v^k|| (resp. sum |beta_k| * sup ||u^k||).
  double declared_bound() const {
    if (kind_ == Kind::zero) return 0.0;
    const double u = dir_.empty() ? 1.0 : norm(dir_);
    return std::abs(coeff_) * u / (1.0 - ratio_);
  }

  void v(long k, int dim, Vector& out) const {
    switch (kind_) {
      case Kind::zero:
        out.assign(static_cast<std::size_t>(dim), 0.0);
        return;
      case Kind::decay_fixed: {
        require_dim(dim);
        const double c = coeff_ * std::pow(ratio_, static_cast<double>(k));
        out.resize(static_cast<std::size_t>(dim));
        for (int j = 0; j < dim; ++j) out[static_cast<std::size_t>(j)] = c * dir_[static_cast<std::size_t>(j)];
        return;
      }
      case Kind::decay_random: {
        const double c = coeff_ * std::pow(ratio_, static_cast<double>(k));
        out = random_unit_vector(seed_, k, dim);
        for (double& x : out) x *= c;
        return;
      }
      default:
        throw std::logic_error("plan is in superiorized mode; use beta()/u()");
    }
  }

  double beta(long k) const {
    if (!is_superiorized()) throw std::logic_error("plan is not in superiorized mode");
    return coeff_ * std::pow(ratio_, static_cast<double>(k));
  }

  void u(long k, int dim, Vector& out) const {
    if (kind_ == Kind::superiorized_fixed) {
      require_dim(dim);
      out = dir_;
    } else if (kind_ == Kind::superiorized_random) {
      out = random_unit_vector(seed_, k, dim);
    } else {
      throw std::logic_error("plan is not in superiorized mode");
    }
  }

 private:
  explicit PerturbationPlan(Kind k) : kind_(k) {}
  void check_ratio(double ratio) const {
    if (!(ratio >= 0.0 && ratio < 1.0))
      throw std::invalid_argument("plan ratio must lie in [0,1) so the bound is finite");
  }
  void require_dim(int dim) const {
    if (static_cast<int>(dir_.size()) != dim)
      throw std::invalid_argument("plan vector dimension does not match the problem");
  }

  Kind kind_;
  double coeff_ = 0.0;
  double ratio_ = 0.5;
  Vector dir_;
  std::uint64_t seed_ = 0;
};

/// Running cumulative per-index weight sums for a fixed set of tracked
/// indices: slot i accumulates sum_k index_weight_sum(w^k, tracked[i]).
class TrackedSums {
 public:
  TrackedSums() = default;
  explicit TrackedSums(const std::vector<int>& tracked) : tracked_(tracked) {
    sums_.assign(tracked.size(), 0.0);
    int mx = 0;
    for (int i : tracked) {
      if (i < 1) throw std::invalid_argument("tracked indices must be >= 1");
      mx = std::max(mx, i);
    }
    max_idx_ = mx;
    slot_.assign(static_cast<std::size_t>(mx) + 1, -1);
    for (std::size_t s = 0; s < tracked.size(); ++s) slot_[static_cast<std::size_t>(tracked[s])] = static_cast<int>(s);
    seen_.assign(tracked.size(), 0);
  }

  bool empty() const { return tracked_.empty(); }
  const std::vector<int>& tracked() const { return tracked_; }
  const std::vector<double>& sums() const { return sums_; }

  /// Adds index_weight_sum(w, i) for every tracked i; called once per
  /// emitted weight function.
  void accumulate(const WeightFunction& w) {
    for (auto e : w) add_entry(e.indices, e.weight);
  }

  void add_entry(std::span<const int> iv, double weight) {
    touched_.clear();
    for (int i : iv) {
      if (i > max_idx_) continue;
      const int s = slot_[static_cast<std::size_t>(i)];
      if (s < 0 || seen_[static_cast<std::size_t>(s)]) continue;
      seen_[static_cast<std::size_t>(s)] = 1;
      touched_.push_back(s);
      sums_[static_cast<std::size_t>(s)] += weight;
    }
    for (int s : touched_) seen_[static_cast<std::size_t>(s)] = 0;
  }

 private:
  std::vector<int> tracked_;
  std::vector<double> sums_;
  std::vector<int> slot_;
  std::vector<char> seen_;
  std::vector<int> touched_;
  int max_idx_ = 0;
};

namespace detail {

/// Evaluates T(x) = sum_iota w(iota) P[iota](x) (or its P^eps analogue for
/// eps > 0) into `out`, accumulating over the support in canonical order.
/// A maximal run of consecutive entries whose strings consist solely of
/// identity operators contributes (sum of run weights) * x through one
/// fused update; endpoints of such strings equal x exactly, so this is a
/// fixed, deterministic evaluation order (see README on replay).
inline void average_strings_core(const Family& fam, const WeightFunction& w, const Vector& x,
                                 Vector& out, Vector& work, double eps, TrackedSums* acc) {
  const std::size_t n = x.size();
  out.assign(n, 0.0);
  double idle_mass = 0.0;
  auto flush_idle = [&] {
    if (idle_mass != 0.0) {
      for (std::size_t j = 0; j < n; ++j) out[j] += idle_mass * x[j];
      idle_mass = 0.0;
    }
  };
  for (auto e : w) {
    if (acc) acc->add_entry(e.indices, e.weight);
    bool trivial = true;
    for (int i : e.indices) {
      if (!fam.is_identity(i)) {
        trivial = false;
        break;
      }
    }
    if (trivial) {
      idle_mass += e.weight;
      continue;
    }
    flush_idle();
    work = x;
    if (eps > 0.0)
      apply_string_eps_inplace(fam, e.indices, work, eps);
    else
      apply_string_inplace(fam, e.indices, work);
    for (std::size_t j = 0; j < n; ++j) out[j] += e.weight * work[j];
  }
  flush_idle();
}

}  // namespace detail

/// The weighted string-averaging operator T for one weight function.
inline Vector average_strings(const Family& fam, const WeightFunction& w, const Vector& x) {
  Vector out, work;
  detail::average_strings_core(fam, w, x, out, work, 0.0, nullptr);
  return out;
}

/// The eps-thresholded averaging operator.
inline Vector average_strings_eps(const Family& fam, const WeightFunction& w, const Vector& x,
                                  double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be > 0");
  Vector out, work;
  detail::average_strings_core(fam, w, x, out, work, eps, nullptr);
  return out;
}

struct IterationState {
  long k = 0;
  Vector x;
  TrackedSums cum;  // running per-index weight sums for tracked indices

  IterationState() = default;
  IterationState(Vector x0, const std::vector<int>& tracked)
      : x(std::move(x0)), cum(tracked) {}
};

namespace detail {

/// Shared single-step worker; owns scratch buffers so the run loop does
/// not allocate per iteration.
class Stepper {
 public:
  Stepper(const Family& fam, const Schedule& sched, Mode mode, const PerturbationPlan* plan,
          double eps)
      : fam_(fam), sched_(sched), mode_(mode), plan_(plan), eps_(eps) {
    if (mode == Mode::eps && !(eps > 0.0))
      throw std::invalid_argument("eps mode requires eps > 0");
    if (mode == Mode::superiorized && (!plan || !plan->is_superiorized()))
      throw std::invalid_argument("superiorized mode requires a superiorized plan");
    if (mode == Mode::perturbed && (!plan || plan->is_superiorized()))
      throw std::invalid_argument("perturbed mode requires a perturbation-vector plan");
    if (mode == Mode::eps && plan && plan->is_superiorized())
      throw std::invalid_argument("eps mode takes a perturbation-vector plan");
  }

  /// Advances state from (k, x^k) to (k+1, x^{k+1}); returns ||x^{k+1}-x^k||
  /// and the norm of the perturbation applied at this step.
  void advance(IterationState& st, double& step_norm, double& v_norm) {
    const long k = st.k;
    const int dim = static_cast<int>(st.x.size());
    sched_.emit(k, wk_);
    TrackedSums* acc = st.cum.empty() ? nullptr : &st.cum;
    v_norm = 0.0;
    switch (mode_) {
      case Mode::plain:
        average_strings_core(fam_, wk_, st.x, next_, work_, 0.0, acc);
        break;
      case Mode::perturbed: {
        average_strings_core(fam_, wk_, st.x, next_, work_, 0.0, acc);
        plan_->v(k, dim, vbuf_);
        v_norm = norm(vbuf_);
        for (std::size_t j = 0; j < next_.size(); ++j) next_[j] += vbuf_[j];
        break;
      }
      case Mode::superiorized: {
        // evaluated as the perturbed step it is equivalent to:
        // v^k = T_k(x + beta_k u^k) - T_k(x), then x^{k+1} = T_k(x) + v^k
        average_strings_core(fam_, wk_, st.x, next_, work_, 0.0, acc);
        const double b = plan_->beta(k);
        plan_->u(k, dim, ubuf_);
        steered_ = st.x;
        for (std::size_t j = 0; j < steered_.size(); ++j) steered_[j] += b * ubuf_[j];
        average_strings_core(fam_, wk_, steered_, alt_, work_, 0.0, nullptr);
        vbuf_.resize(next_.size());
        for (std::size_t j = 0; j < next_.size(); ++j) vbuf_[j] = alt_[j] - next_[j];
        v_norm = norm(vbuf_);
        for (std::size_t j = 0; j < next_.size(); ++j) next_[j] += vbuf_[j];
        break;
      }
      case Mode::eps: {
        average_strings_core(fam_, wk_, st.x, next_, work_, eps_, acc);
        if (plan_ && !plan_->is_zero()) {
          plan_->v(k, dim, vbuf_);
          v_norm = norm(vbuf_);
          for (std::size_t j = 0; j < next_.size(); ++j) next_[j] += vbuf_[j];
        }
        break;
      }
    }
    step_norm = dist(next_, st.x);
    st.x.swap(next_);
    st.k = k + 1;
  }

  int max_length_at_last_step() const { return wk_.max_length(); }

 private:
  const Family& fam_;
  const Schedule& sched_;
  Mode mode_;
  const PerturbationPlan* plan_;
  double eps_;
  WeightFunction wk_;
  Vector next_, work_, alt_, steered_, vbuf_, ubuf_;
};

}  // namespace detail

// Single-step entry points (Eq.-level API; the run loop below reuses one
// worker instead).

inline IterationState step_plain(const Family& fam, const Schedule& sched, IterationState st) {
  detail::Stepper s(fam, sched, Mode::plain, nullptr, 0.0);
  double sn, vn;
  s.advance(st, sn, vn);
  return st;
}

inline IterationState step_perturbed(const Family& fam, const Schedule& sched,
                                     const PerturbationPlan& plan, IterationState st) {
  detail::Stepper s(fam, sched, Mode::perturbed, &plan, 0.0);
  double sn, vn;
  s.advance(st, sn, vn);
  return st;
}

inline IterationState step_superiorized(const Family& fam, const Schedule& sched,
                                        const PerturbationPlan& plan, IterationState st) {
  detail::Stepper s(fam, sched, Mode::superiorized, &plan, 0.0);
  double sn, vn;
  s.advance(st, sn, vn);
  return st;
}

inline IterationState step_eps(const Family& fam, const Schedule& sched,
                               const PerturbationPlan* plan, IterationState st, double eps) {
  detail::Stepper s(fam, sched, Mode::eps, plan, eps);
  double sn, vn;
  s.advance(st, sn, vn);
  return st;
}

/// Truncation rules for a run; the enabled rules are OR-ed.
struct StopRule {
  std::optional<long> max_iters;
  std::optional<double> displacement_tol;
  int displacement_window = 1;  // consecutive small steps required
  std::optional<double> feasibility_tol;  // on max watch-list distance

  static StopRule after(long n) {
    StopRule r;
    r.max_iters = n;
    return r;
  }
};

enum class StopReason {
  none,
  max_iters,
  displacement,
  feasibility,
  aborted_nonfinite,
  stage_cap_exceeded,
  schedule_exhausted
};

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::none: return "none";
    case StopReason::max_iters: return "max_iters";
    case StopReason::displacement: return "displacement";
    case StopReason::feasibility: return "feasibility";
    case StopReason::aborted_nonfinite: return "aborted_nonfinite";
    case StopReason::stage_cap_exceeded: return "stage_cap_exceeded";
    case StopReason::schedule_exhausted: return "schedule_exhausted";
  }
  return "?";
}

struct StepRecord {
  long k = 0;
  double step_norm = 0.0;
  std::vector<double> watch_dist;  // d(x^k, C_i) for the watch list
  std::optional<Vector> iterate;   // x^k when iterate storage is on
};

struct Stage {
  int m = 1;
  long N = 1;
};

struct StageMark {
  int stage = 0;
  Stage params;
  double eps = 0.0;
  long first_k = 0;
  long steps = 0;
  bool reached = false;
};

struct RunOptions {
  std::vector<int> watch;   // indices whose distances are recorded
  long thin = 1;            // record every thin-th step
  bool store_iterates = false;
  std::vector<int> track;   // cumulative-sum indices; defaults to watch
};

struct Trace {
  Mode mode = Mode::plain;
  double eps = 0.0;
  std::vector<int> watch;
  std::vector<StepRecord> records;
  std::vector<StageMark> stages;
  StopReason stop_reason = StopReason::none;
  std::string diagnostic;
  long steps = 0;  // total iterations performed
  Vector x0;
  Vector x_final;
  std::vector<double> final_watch_dist;
  std::vector<int> tracked;
  std::vector<double> cum_index_weight;
  double perturbation_norm_sum = 0.0;
};

namespace detail {

class RunLoop {
 public:
  RunLoop(const Family& fam, const RunOptions& opt) : fam_(fam), opt_(opt) {}

  void distances(const std::vector<int>& indices, const Vector& x, std::vector<double>& out) {
    out.resize(indices.size());
    for (std::size_t j = 0; j < indices.size(); ++j) {
      buf_ = x;
      project_inplace(fam_.set(indices[j]), buf_);
      out[j] = dist(x, buf_);
    }
  }

  void watch_distances(const Vector& x, std::vector<double>& out) {
    distances(opt_.watch, x, out);
  }

  /// Runs until a stop rule fires; appends to trace. The feasibility rule
  /// (if enabled) is evaluated over feas_watch when given, else over the
  /// recorded watch list. Returns the reason.
  StopReason drive(Stepper& stepper, IterationState& st, const StopRule& stop, Trace& trace,
                   const std::vector<int>* feas_watch = nullptr, long k_cap = -1) {
    long consecutive_small = 0;
    const std::vector<int>& fw = feas_watch ? *feas_watch : opt_.watch;
    for (;;) {
      if (stop.max_iters && st.k >= *stop.max_iters) return StopReason::max_iters;
      if (k_cap >= 0 && st.k >= k_cap) return StopReason::stage_cap_exceeded;

      if (stop.feasibility_tol && !fw.empty()) {
        distances(fw, st.x, feas_dists_);
        double mx = 0.0;
        for (double d : feas_dists_) mx = std::max(mx, d);
        if (mx <= *stop.feasibility_tol) return StopReason::feasibility;
      }

      const bool record_this = opt_.thin <= 1 || st.k % opt_.thin == 0;
      StepRecord rec;
      if (record_this) {
        if (!opt_.watch.empty()) watch_distances(st.x, rec.watch_dist);
        if (opt_.store_iterates) rec.iterate = st.x;
      }

      double step_norm = 0.0, v_norm = 0.0;
      const long k_before = st.k;
      stepper.advance(st, step_norm, v_norm);
      trace.perturbation_norm_sum += v_norm;

      if (record_this) {
        rec.k = k_before;
        rec.step_norm = step_norm;
        trace.records.push_back(std::move(rec));
      }
      if (!is_finite(st.x)) {
        trace.diagnostic = "non-finite iterate after iteration " + std::to_string(k_before);
        return StopReason::aborted_nonfinite;
      }
      if (stop.displacement_tol) {
        consecutive_small = (step_norm < *stop.displacement_tol) ? consecutive_small + 1 : 0;
        if (consecutive_small >= stop.displacement_window) return StopReason::displacement;
      }
    }
  }

 private:
  const Family& fam_;
  const RunOptions& opt_;
  Vector buf_;
  std::vector<double> feas_dists_;
};

inline void finalize_trace(Trace& trace, const IterationState& st, RunLoop& loop) {
  trace.steps = st.k;
  trace.x_final = st.x;
  loop.watch_distances(st.x, trace.final_watch_dist);
  trace.tracked = st.cum.tracked();
  trace.cum_index_weight = st.cum.sums();
}

}  // namespace detail

/// Drives one of the update rules from x0 until a stop rule fires and
/// returns the full trace. See the NDJSON/CSV writers for persistence.
inline Trace run(const Family& fam, const Schedule& sched, Mode mode,
                 const PerturbationPlan* plan, Vector x0, const StopRule& stop,
                 const RunOptions& opt, double eps = 0.0) {
  if (!is_finite(x0)) throw std::invalid_argument("x0 must be finite");
  if (static_cast<int>(x0.size()) != fam.dim())
    throw std::invalid_argument("x0 dimension does not match the family");
  if (!stop.max_iters && !stop.displacement_tol && !stop.feasibility_tol)
    throw std::invalid_argument("at least one stop rule must be enabled");

  Trace trace;
  trace.mode = mode;
  trace.eps = eps;
  trace.watch = opt.watch;
  trace.x0 = x0;

  const std::vector<int>& tracked = opt.track.empty() ? opt.watch : opt.track;
  IterationState st(std::move(x0), tracked);

  detail::Stepper stepper(fam, sched, mode, plan, eps);
  detail::RunLoop loop(fam, opt);
  StopRule effective = stop;
  bool horizon_limited = false;
  if (auto h = sched.horizon()) {
    const long limit = *h + 1;  // w^k is defined for k <= h, so <= limit steps
    if (!effective.max_iters || *effective.max_iters > limit) {
      effective.max_iters = limit;
      horizon_limited = true;
    }
  }
  trace.stop_reason = loop.drive(stepper, st, effective, trace);
  if (horizon_limited && trace.stop_reason == StopReason::max_iters)
    trace.stop_reason = StopReason::schedule_exhausted;
  detail::finalize_trace(trace, st, loop);
  return trace;
}

/// Builds the schedule a staged run uses while working toward targets
/// (m, N); the default simultaneously projects onto C_1..C_m.
using StageScheduleFactory = std::function<Schedule(int stage, Stage params)>;

inline StageScheduleFactory default_stage_schedule() {
  return [](int, Stage s) { return Schedule::cyclic_finite(s.m, CyclicBlock::full_cimmino); };
}

/// Staged eps-reduction driver: for each stage (m, N) runs the eps rule
/// with eps = 1/(2N) until max_{1<=i<=m} d(y, C_i) <= 1/N, then reseeds the
/// next stage from the reached point. Stage boundaries are marked in the
/// trace; a stage that exhausts the per-stage cap aborts the run with the
/// partial trace.
inline Trace run_staged_eps(const Family& fam, const StageScheduleFactory& factory,
                            const PerturbationPlan* plan, Vector y0,
                            std::span<const Stage> stages, const RunOptions& opt,
                            long stage_cap = 1000000) {
  if (stages.empty()) throw std::invalid_argument("staged run needs at least one stage");
  // m may plateau at a finite family's size; the accuracy target N must
  // keep growing
  for (std::size_t s = 1; s < stages.size(); ++s)
    if (stages[s].m < stages[s - 1].m || stages[s].N <= stages[s - 1].N)
      throw std::invalid_argument("stages need nondecreasing m and strictly increasing N");
  if (!is_finite(y0)) throw std::invalid_argument("y0 must be finite");
  if (plan && plan->is_superiorized())
    throw std::invalid_argument("staged runs take a perturbation-vector plan");

  Trace trace;
  trace.mode = Mode::eps;
  trace.watch = opt.watch;
  trace.x0 = y0;

  IterationState st(std::move(y0), opt.track.empty() ? opt.watch : opt.track);
  detail::RunLoop loop(fam, opt);
  trace.stop_reason = StopReason::feasibility;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const Stage stage = stages[s];
    const double eps = 1.0 / (2.0 * static_cast<double>(stage.N));
    const double target = 1.0 / static_cast<double>(stage.N);

    StageMark mark;
    mark.stage = static_cast<int>(s);
    mark.params = stage;
    mark.eps = eps;
    mark.first_k = st.k;

    Schedule sched = factory(static_cast<int>(s), stage);
    std::vector<int> stage_watch(static_cast<std::size_t>(stage.m));
    for (int i = 0; i < stage.m; ++i) stage_watch[static_cast<std::size_t>(i)] = i + 1;

    StopRule stop;
    stop.feasibility_tol = target;
    detail::Stepper stepper(fam, sched, Mode::eps, plan, eps);
    const StopReason r = loop.drive(stepper, st, stop, trace, &stage_watch, st.k + stage_cap);
    mark.steps = st.k - mark.first_k;
    mark.reached = r == StopReason::feasibility;
    trace.stages.push_back(mark);
    if (r != StopReason::feasibility) {
      trace.stop_reason = r;
      if (r == StopReason::stage_cap_exceeded)
        trace.diagnostic = "stage " + std::to_string(s) + " failed to reach 1/N=" +
                           std::to_string(target) + " within " + std::to_string(stage_cap) +
                           " iterations";
      break;
    }
  }
  detail::finalize_trace(trace, st, loop);
  return trace;
}

}  // namespace stravg

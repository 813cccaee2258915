#include <catch2/catch_amalgamated.hpp>

#include "stravg/engine.hpp"
#include "support/generators.hpp"

using namespace stravg;
using Catch::Approx;

namespace {

Family axes_family() {
  // C_1 = x-axis {y = 0}, C_2 = y-axis {x = 0}
  return Family::finite({ConvexSet(Hyperplane{{0.0, 1.0}, 0.0}),
                         ConvexSet(Hyperplane{{1.0, 0.0}, 0.0})});
}

// random fixture with a known common point and a seeded random table
// schedule; shared by the monotonicity properties
struct Fixture {
  Family family;
  Schedule schedule;
  Vector c;
};

Fixture random_fixture(Rng& rng, int n, int K, int table_len) {
  Vector c = gen::point(rng, n, 3.0);
  std::vector<ConvexSet> sets;
  bool nontrivial = false;
  for (int i = 0; i < K; ++i) {
    ConvexSet s = gen::set_containing(rng, n, c);
    // drop sets that only almost contain c (thin-set rounding)
    if (distance(s, c) > 1e-13 * (1.0 + norm(c))) s = ConvexSet(WholeSpace{n});
    nontrivial |= !s.is_whole_space();
    sets.push_back(std::move(s));
  }
  if (!nontrivial) sets[0] = ConvexSet(Ball{c, 1.0});
  Family fam = Family::finite(std::move(sets));
  std::vector<WeightFunction> table;
  for (int t = 0; t < table_len; ++t) table.push_back(gen::weight_function(rng, K + 2));
  return {std::move(fam), Schedule::custom_table(std::move(table), TailRule::cycle), std::move(c)};
}

}  // namespace

TEST_CASE("plain step averages string endpoints") {
  Family fam = axes_family();
  // single-projection step
  IterationState st({2.0, 4.0}, {});
  st = step_plain(fam, Schedule::cyclic_finite(2, CyclicBlock::single_index), st);
  CHECK(st.k == 1);
  CHECK(st.x == Vector{2.0, 0.0});

  // w = {(1): 1/2, (2): 1/2} on (2,4): (1/2)(2,0) + (1/2)(0,4) = (1,2)
  IterationState avg({2.0, 4.0}, {});
  avg = step_plain(fam, Schedule::cyclic_finite(2, CyclicBlock::full_cimmino), avg);
  CHECK(avg.x == Vector{1.0, 2.0});

  // a common point is a fixed point of any plain step
  IterationState fixed({0.0, 0.0}, {});
  fixed = step_plain(fam, Schedule::cimmino_growing(), fixed);
  CHECK(fixed.x == Vector{0.0, 0.0});
}

TEST_CASE("perturbed step adds the plan vector") {
  Family fam = axes_family();
  Schedule sched = Schedule::cyclic_finite(2, CyclicBlock::single_index);
  PerturbationPlan zero = PerturbationPlan::zero();
  PerturbationPlan fixed = PerturbationPlan::decay(1.0, 0.5, {0.1, 0.0});

  IterationState a({2.0, 4.0}, {});
  a = step_perturbed(fam, sched, zero, a);
  IterationState b({2.0, 4.0}, {});
  b = step_plain(fam, sched, b);
  CHECK(a.x == b.x);

  IterationState c({2.0, 4.0}, {});
  c = step_perturbed(fam, sched, fixed, c);
  CHECK(c.x == Vector{2.0 + 0.1, 0.0});  // project then add v^0 = (0.1, 0)
}

TEST_CASE("perturbed trajectory stays within the summed perturbations of the plain one") {
  // v^k = 2^{-k} e_1; nonexpansiveness telescopes to ||x*_k - x_k|| <= sum ||v^j|| < 2
  Family fam = axes_family();
  Schedule sched = Schedule::cyclic_finite(2, CyclicBlock::full_cimmino);
  PerturbationPlan plan = PerturbationPlan::decay(1.0, 0.5, {1.0, 0.0});
  IterationState plain({3.0, -4.0}, {}), pert({3.0, -4.0}, {});
  double bound = 0.0;
  for (long k = 0; k < 40; ++k) {
    bound += std::pow(0.5, static_cast<double>(k));
    plain = step_plain(fam, sched, plain);
    pert = step_perturbed(fam, sched, plan, pert);
    CHECK(dist(pert.x, plain.x) <= bound + 1e-12);
    CHECK(dist(pert.x, plain.x) < 2.0);
  }
}

TEST_CASE("superiorized step equals its perturbed representation bit for bit") {
  Rng rng(2024);
  for (int rep = 0; rep < 50; ++rep) {
    Fixture fx = random_fixture(rng, 2 + static_cast<int>(rng.next_below(2)), 3, 4);
    const int n = static_cast<int>(fx.c.size());
    PerturbationPlan plan = PerturbationPlan::superiorized_random(0.7, 0.6, rng.next_u64());
    const long k = static_cast<long>(rng.next_below(4));

    IterationState sup(gen::point(rng, n), {});
    sup.k = k;
    const Vector x = sup.x;
    sup = step_superiorized(fx.family, fx.schedule, plan, sup);

    // the equivalent perturbation v^k = T_k(x + beta_k u^k) - T_k(x)
    WeightFunction wk = fx.schedule.weights(k);
    Vector u;
    plan.u(k, n, u);
    const double beta = plan.beta(k);
    Vector steered = x;
    for (std::size_t j = 0; j < steered.size(); ++j) steered[j] += beta * u[j];
    const Vector t_x = average_strings(fx.family, wk, x);
    const Vector t_steered = average_strings(fx.family, wk, steered);
    Vector expect = t_x;
    for (std::size_t j = 0; j < expect.size(); ++j) expect[j] += t_steered[j] - t_x[j];
    CHECK(sup.x == expect);

    // ||v^k|| <= |beta_k| ||u^k||
    CHECK(dist(t_steered, t_x) <= std::abs(beta) * norm(u) + 1e-12);
  }
}

TEST_CASE("superiorized step with beta 0 is the plain step") {
  Family fam = axes_family();
  Schedule sched = Schedule::cyclic_finite(2, CyclicBlock::full_cimmino);
  PerturbationPlan plan = PerturbationPlan::superiorized(0.0, 0.5, {1.0, 1.0});
  IterationState a({2.0, 4.0}, {}), b({2.0, 4.0}, {});
  a = step_superiorized(fam, sched, plan, a);
  b = step_plain(fam, sched, b);
  CHECK(a.x == b.x);
}

TEST_CASE("superiorized step over the identity operator steers freely") {
  Family fam = Family::finite({ConvexSet(WholeSpace{2}), ConvexSet(Ball{{0.0, 0.0}, 100.0})});
  Schedule sched = Schedule::cyclic_finite(1, CyclicBlock::single_index);  // w = {(1): 1}
  PerturbationPlan plan = PerturbationPlan::superiorized(0.25, 0.5, {1.0, 0.0});
  IterationState st({2.0, 4.0}, {});
  st = step_superiorized(fam, sched, plan, st);
  CHECK(st.x == Vector{2.25, 4.0});  // x + beta_0 u
}

TEST_CASE("eps step freezes when every distance is below the threshold") {
  Family fam = axes_family();
  Schedule sched = Schedule::cyclic_finite(2, CyclicBlock::full_cimmino);
  IterationState st({0.01, -0.02}, {});
  st = step_eps(fam, sched, nullptr, st, 0.5);
  CHECK(st.x == Vector{0.01, -0.02});
  CHECK_THROWS_AS(step_eps(fam, sched, nullptr, IterationState({1.0, 1.0}, {}), 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(step_eps(fam, sched, nullptr, IterationState({1.0, 1.0}, {}), -0.1),
                  std::invalid_argument);
}

TEST_CASE("eps trajectory tracks the plain one until a step drops below eps") {
  Family fam = axes_family();
  Schedule sched = Schedule::cyclic_finite(2, CyclicBlock::full_cimmino);
  IterationState plain({5.0, 3.0}, {}), eps({5.0, 3.0}, {});
  const double e = 1e-9;
  for (int k = 0; k < 60; ++k) {
    plain = step_plain(fam, sched, plain);
    eps = step_eps(fam, sched, nullptr, eps, e);
    if (plain.x != eps.x) {
      // allowed only once some per-step distance has fallen under eps
      CHECK(std::max(distance(fam.set(1), eps.x), distance(fam.set(2), eps.x)) < e);
      break;
    }
  }
}

TEST_CASE("weighted averaging operator is nonexpansive") {
  Rng rng(31);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 1 + static_cast<int>(rng.next_below(3));
    std::vector<ConvexSet> sets;
    for (int i = 0; i < 4; ++i) sets.push_back(gen::any_set(rng, n));
    bool nontrivial = false;
    for (const auto& s : sets) nontrivial |= !s.is_whole_space();
    if (!nontrivial) continue;
    Family fam = Family::finite(std::move(sets));
    const WeightFunction w = gen::weight_function(rng, 6);
    const Vector y = gen::point(rng, n), z = gen::point(rng, n);
    CHECK(dist(average_strings(fam, w, y), average_strings(fam, w, z)) <= dist(y, z) + 1e-12);
  }
}

TEST_CASE("plain runs are Fejer monotone and satisfy the length-penalized descent") {
  Rng rng(6021);
  for (int rep = 0; rep < 12; ++rep) {
    Fixture fx = random_fixture(rng, 2 + static_cast<int>(rng.next_below(2)), 4, 6);
    const int n = static_cast<int>(fx.c.size());
    IterationState st(gen::point(rng, n), {});
    WeightFunction wk;
    for (long k = 0; k < 80; ++k) {
      const double before = dist(st.x, fx.c);
      const Vector prev = st.x;
      fx.schedule.emit(k, wk);
      st = step_plain(fx.family, fx.schedule, st);
      const double after = dist(st.x, fx.c);
      CHECK(after <= before + 1e-9);
      // ||x^{k+1}-c||^2 <= ||x^k-c||^2 - ||x^{k+1}-x^k||^2 / maxLength(w^k)
      const double lhs = after * after;
      const double rhs = before * before -
                         norm_sq(sub(st.x, prev)) / static_cast<double>(wk.max_length());
      CHECK(lhs <= rhs + 1e-9);
    }
  }
}

TEST_CASE("eps-mode runs are Fejer monotone without perturbations") {
  Rng rng(9177);
  for (int rep = 0; rep < 8; ++rep) {
    Fixture fx = random_fixture(rng, 2, 3, 5);
    IterationState st(gen::point(rng, 2), {});
    for (long k = 0; k < 60; ++k) {
      const double before = dist(st.x, fx.c);
      st = step_eps(fx.family, fx.schedule, nullptr, st, 0.05);
      CHECK(dist(st.x, fx.c) <= before + 1e-9);
    }
  }
}

TEST_CASE("run stops by displacement at a common point immediately") {
  Family fam = axes_family();
  StopRule stop;
  stop.max_iters = 100;
  stop.displacement_tol = 1e-14;
  RunOptions opt;
  opt.watch = {1, 2};
  Trace t = run(fam, Schedule::cyclic_finite(2, CyclicBlock::full_cimmino), Mode::plain, nullptr,
                {0.0, 0.0}, stop, opt);
  CHECK(t.stop_reason == StopReason::displacement);
  CHECK(t.steps <= 1);
  CHECK(t.x_final == Vector{0.0, 0.0});
}

TEST_CASE("cyclic run on two lines converges to their intersection") {
  // lines x + y = 3 and x - 2y = 0 meet at (2, 1)
  Family fam = Family::finite({ConvexSet(Hyperplane{{1.0, 1.0}, 3.0}),
                               ConvexSet(Hyperplane{{1.0, -2.0}, 0.0})});
  StopRule stop;
  stop.max_iters = 500;
  stop.displacement_tol = 1e-15;
  stop.displacement_window = 3;
  RunOptions opt;
  opt.watch = {1, 2};
  Trace t = run(fam, Schedule::cyclic_finite(2, CyclicBlock::single_index), Mode::plain, nullptr,
                {9.0, -4.0}, stop, opt);
  CHECK(dist(t.x_final, Vector{2.0, 1.0}) < 1e-9);
  CHECK(t.records.front().k == 0);
  for (std::size_t i = 1; i < t.records.size(); ++i)
    CHECK(t.records[i].k == t.records[i - 1].k + 1);
}

TEST_CASE("feasibility stop rule fires on the watch list") {
  Family fam = axes_family();
  StopRule stop;
  stop.max_iters = 1000;
  stop.feasibility_tol = 1e-6;
  RunOptions opt;
  opt.watch = {1, 2};
  Trace t = run(fam, Schedule::cyclic_finite(2, CyclicBlock::full_cimmino), Mode::plain, nullptr,
                {8.0, 8.0}, stop, opt);
  CHECK(t.stop_reason == StopReason::feasibility);
  CHECK(std::max(t.final_watch_dist[0], t.final_watch_dist[1]) <= 1e-6);
}

TEST_CASE("non-finite iterates abort the run with a diagnostic") {
  Family fam = axes_family();
  // a plan whose magnitudes overflow within a few steps
  PerturbationPlan plan = PerturbationPlan::decay(1e308, 0.99, {1.0, 0.0});
  StopRule stop;
  stop.max_iters = 50;
  RunOptions opt;
  Trace t = run(fam, Schedule::cyclic_finite(2, CyclicBlock::full_cimmino), Mode::perturbed,
                &plan, {1.0, 1.0}, stop, opt);
  CHECK(t.stop_reason == StopReason::aborted_nonfinite);
  CHECK_FALSE(t.diagnostic.empty());
}

TEST_CASE("runs are deterministic and accumulate index weight sums") {
  Rng rng(11);
  Fixture fx = random_fixture(rng, 2, 3, 5);
  StopRule stop;
  stop.max_iters = 64;
  RunOptions opt;
  opt.watch = {1, 2, 3};
  opt.thin = 1;
  const Vector x0 = gen::point(rng, 2);
  Trace a = run(fx.family, fx.schedule, Mode::plain, nullptr, x0, stop, opt);
  Trace b = run(fx.family, fx.schedule, Mode::plain, nullptr, x0, stop, opt);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].step_norm == b.records[i].step_norm);
    CHECK(a.records[i].watch_dist == b.records[i].watch_dist);
  }
  CHECK(a.x_final == b.x_final);
  REQUIRE(a.cum_index_weight.size() == 3);
  // cumulative sums match a direct tally over the schedule
  for (std::size_t j = 0; j < 3; ++j) {
    double expect = 0.0;
    for (long k = 0; k < a.steps; ++k)
      expect += index_weight_sum(fx.schedule.weights(k), a.tracked[j]);
    CHECK(a.cum_index_weight[j] == Approx(expect));
  }
}

TEST_CASE("staged eps driver reaches every target") {
  // two hyperplanes through the origin; m plateaus at the family size
  Family fam = Family::finite({ConvexSet(Hyperplane{{0.0, 1.0}, 0.0}),
                               ConvexSet(Hyperplane{{1.0, -1.0}, 0.0})});
  std::vector<Stage> stages{{1, 1}, {2, 100}, {2, 1000}};
  RunOptions opt;
  opt.watch = {1, 2};
  // seed with d(y0, C_1) = 0.5 <= 1, so the first stage completes at once
  Trace t = run_staged_eps(fam, default_stage_schedule(), nullptr, {4.0, 0.5}, stages, opt);
  REQUIRE(t.stages.size() == 3);
  for (const auto& m : t.stages) CHECK(m.reached);
  CHECK(t.stages[0].steps == 0);
  CHECK(std::max(distance(fam.set(1), t.x_final), distance(fam.set(2), t.x_final)) <= 1e-3);
  // stage eps choices follow eps = 1/(2N)
  CHECK(t.stages[2].eps == Approx(1.0 / 2000.0));

  std::vector<Stage> bad{{2, 10}, {1, 100}};
  CHECK_THROWS_AS(run_staged_eps(fam, default_stage_schedule(), nullptr, {1.0, 1.0}, bad, opt),
                  std::invalid_argument);
}

TEST_CASE("stage caps abort with a partial trace") {
  // the third set sits far from the others, so the joint 1/N target is
  // unreachable and the cap must fire
  Family fam = Family::finite({ConvexSet(Ball{{0.0, 0.0}, 1.0}),
                               ConvexSet(Ball{{0.0, 0.0}, 0.5}),
                               ConvexSet(Hyperplane{{1.0, 0.0}, 50.0})});
  std::vector<Stage> stages{{3, 1000}};
  RunOptions opt;
  opt.watch = {1, 2, 3};
  Trace t = run_staged_eps(fam, default_stage_schedule(), nullptr, {0.2, 0.0}, stages, opt, 2000);
  CHECK(t.stop_reason == StopReason::stage_cap_exceeded);
  REQUIRE(t.stages.size() == 1);
  CHECK_FALSE(t.stages[0].reached);
  CHECK_FALSE(t.diagnostic.empty());
}

TEST_CASE("schedule horizons truncate runs") {
  auto alpha = std::make_shared<std::vector<int>>(std::vector<int>{1, 2, 1});
  Family fam = axes_family();
  StopRule stop;
  stop.max_iters = 100;
  RunOptions opt;
  Trace t = run(fam, Schedule::singleton_sequence(alpha), Mode::plain, nullptr, {1.0, 1.0}, stop,
                opt);
  CHECK(t.steps == 3);
  CHECK(t.stop_reason == StopReason::schedule_exhausted);
}

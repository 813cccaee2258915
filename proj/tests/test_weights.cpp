#include <catch2/catch_amalgamated.hpp>

#include "stravg/schedule.hpp"
#include "support/generators.hpp"

using namespace stravg;
using Catch::Approx;

TEST_CASE("make_weight validates the axioms") {
  const WeightFunction w1 = make_weight({{{1}, 1.0}});
  CHECK(w1.size() == 1);
  CHECK(w1.weight_of(IndexVector{1}) == 1.0);

  const WeightFunction w2 = make_weight({{{1}, 0.5}, {{2, 3}, 0.5}});
  CHECK(w2.size() == 2);
  CHECK(w2.max_length() == 2);

  CHECK_THROWS_AS(make_weight({{{1}, 0.3}, {{2}, 0.3}}), std::invalid_argument);  // sum 0.6
  CHECK_THROWS_AS(make_weight({{{1}, -0.1}, {{2}, 1.1}}), std::invalid_argument);
  CHECK_THROWS_AS(make_weight({}), std::invalid_argument);
  CHECK_THROWS_AS(make_weight({{{0}, 1.0}}), std::invalid_argument);

  // zero entries are dropped, duplicates merged
  const WeightFunction w3 = make_weight({{{2}, 0.25}, {{1}, 0.5}, {{2}, 0.25}, {{3}, 0.0}});
  CHECK(w3.size() == 2);
  CHECK(w3.weight_of(IndexVector{2}) == Approx(0.5));
  CHECK_FALSE(w3.uses_index(3));

  // canonical order is lexicographic over index vectors
  const WeightFunction w4 = make_weight({{{2, 1}, 0.5}, {{1, 9}, 0.25}, {{1}, 0.25}});
  CHECK(w4.entry(0).indices[0] == 1);
  CHECK(w4.entry(0).indices.size() == 1);
  CHECK(w4.entry(1).indices[1] == 9);
  CHECK(w4.entry(2).indices[0] == 2);
}

TEST_CASE("index sums follow the definitions") {
  const WeightFunction w = make_weight({{{2, 1}, 1.0}});
  CHECK(index_weight_sum(w, 1) == 1.0);
  CHECK(index_position_sum(w, 1) == Approx(0.5));  // Position(1, (2,1)) = 2
  CHECK(index_weight_sum(w, 7) == 0.0);
  CHECK(index_position_sum(w, 7) == 0.0);

  // a duplicated index counts once per entry, at its first position
  const WeightFunction dup = make_weight({{{3, 3, 3}, 1.0}});
  CHECK(index_weight_sum(dup, 3) == 1.0);
  CHECK(index_position_sum(dup, 3) == 1.0);
}

TEST_CASE("max_length over the support") {
  CHECK(max_length(make_weight({{{1}, 1.0}})) == 1);
  CHECK(max_length(make_weight({{{1}, 0.5}, {{2, 3, 4}, 0.5}})) == 3);
}

TEST_CASE("growing simultaneous-projection schedule") {
  const WeightFunction w3 = schedule_cimmino_growing(3);
  CHECK(w3.size() == 3);
  for (int i = 1; i <= 3; ++i) CHECK(w3.weight_of(IndexVector{i}) == Approx(1.0 / 3.0));
  CHECK(schedule_cimmino_growing(1).weight_of(IndexVector{1}) == 1.0);
  CHECK_THROWS_AS(schedule_cimmino_growing(0), std::invalid_argument);

  // sum over I<i> of w^r(iota)/Position(i,iota) = 1/r for r >= i
  for (long r : {5L, 17L, 100L}) {
    const WeightFunction wr = schedule_cimmino_growing(r);
    for (int i = 1; i <= static_cast<int>(r); i += 3) {
      CHECK(index_weight_sum(wr, i) == Approx(1.0 / static_cast<double>(r)));
      CHECK(index_position_sum(wr, i) == Approx(1.0 / static_cast<double>(r)));
    }
    CHECK(index_position_sum(wr, static_cast<int>(r) + 1) == 0.0);
  }
}

TEST_CASE("growing sweep schedule") {
  const WeightFunction w3 = Schedule::kaczmarz_growing(PermMode::identity()).weights(3);
  CHECK(w3.size() == 1);
  CHECK(w3.weight_of(IndexVector{1, 2, 3}) == 1.0);
  CHECK(schedule_kaczmarz_growing(1, 77).weight_of(IndexVector{1}) == 1.0);
  CHECK_THROWS_AS(schedule_kaczmarz_growing(0, 77), std::invalid_argument);

  // seeded permutations still cover 1..k exactly once
  for (long k : {2L, 9L, 40L}) {
    const WeightFunction w = schedule_kaczmarz_growing(k, 1234);
    REQUIRE(w.size() == 1);
    auto e = w.entry(0);
    REQUIRE(static_cast<long>(e.indices.size()) == k);
    std::vector<int> seen(static_cast<std::size_t>(k) + 1, 0);
    for (int i : e.indices) {
      REQUIRE(i >= 1);
      REQUIRE(i <= k);
      ++seen[static_cast<std::size_t>(i)];
    }
    for (long i = 1; i <= k; ++i) CHECK(seen[static_cast<std::size_t>(i)] == 1);
    // position-weighted sum >= 1/k for every i <= k
    for (int i = 1; i <= static_cast<int>(k); ++i)
      CHECK(index_position_sum(w, i) >= 1.0 / static_cast<double>(k) - 1e-15);
  }
}

TEST_CASE("odd/even schedule pairs a fresh singleton with a parity sweep") {
  const WeightFunction w3 = Schedule::odd_even(PermMode::identity()).weights(3);
  REQUIRE(w3.size() == 2);
  CHECK(w3.weight_of(IndexVector{1, 3}) == 0.5);
  CHECK(w3.weight_of(IndexVector{5}) == 0.5);

  const WeightFunction w4 = Schedule::odd_even(PermMode::identity()).weights(4);
  CHECK(w4.weight_of(IndexVector{2, 4}) == 0.5);
  CHECK(w4.weight_of(IndexVector{6}) == 0.5);

  // maxLength(w^{2r}) = r
  for (long r : {1L, 5L, 31L})
    CHECK(Schedule::odd_even(PermMode::seeded(5)).weights(2 * r).max_length() ==
          static_cast<int>(r));
  CHECK_THROWS_AS(schedule_odd_even(0, 5), std::invalid_argument);
}

TEST_CASE("cyclic finite schedules") {
  Schedule single = Schedule::cyclic_finite(3, CyclicBlock::single_index);
  CHECK(single.weights(0).weight_of(IndexVector{1}) == 1.0);
  CHECK(single.weights(1).weight_of(IndexVector{2}) == 1.0);
  CHECK(single.weights(2).weight_of(IndexVector{3}) == 1.0);
  CHECK(single.weights(3).weight_of(IndexVector{1}) == 1.0);

  Schedule cim = Schedule::cyclic_finite(2, CyclicBlock::full_cimmino);
  for (long k : {0L, 1L, 9L}) {
    CHECK(cim.weights(k).weight_of(IndexVector{1}) == 0.5);
    CHECK(cim.weights(k).weight_of(IndexVector{2}) == 0.5);
  }

  Schedule kac = Schedule::cyclic_finite(3, CyclicBlock::full_kaczmarz);
  CHECK(kac.weights(5).weight_of(IndexVector{1, 2, 3}) == 1.0);
  CHECK_THROWS_AS(Schedule::cyclic_finite(0, CyclicBlock::single_index), std::invalid_argument);
}

TEST_CASE("custom tables with tail rules") {
  std::vector<WeightFunction> table;
  table.push_back(make_weight({{{1}, 1.0}}));
  table.push_back(make_weight({{{2}, 1.0}}));
  Schedule rep = Schedule::custom_table(table, TailRule::repeat_last);
  CHECK(rep.weights(0).weight_of(IndexVector{1}) == 1.0);
  CHECK(rep.weights(5).weight_of(IndexVector{2}) == 1.0);
  Schedule cyc = Schedule::custom_table(table, TailRule::cycle);
  CHECK(cyc.weights(4).weight_of(IndexVector{1}) == 1.0);
  CHECK(cyc.weights(5).weight_of(IndexVector{2}) == 1.0);
}

TEST_CASE("every schedule emission passes validation") {
  std::vector<Schedule> schedules;
  schedules.push_back(Schedule::cimmino_growing());
  schedules.push_back(Schedule::kaczmarz_growing(PermMode::seeded(9)));
  schedules.push_back(Schedule::odd_even(PermMode::seeded(9)));
  schedules.push_back(Schedule::cyclic_finite(4, CyclicBlock::full_cimmino));
  for (const Schedule& s : schedules) {
    for (long k : {0L, 1L, 2L, 3L, 17L, 1000L, 100000L}) {
      const WeightFunction w = s.weights(k);
      CHECK_NOTHROW(w.validate());
    }
  }
}

TEST_CASE("emission is deterministic and scratch-independent") {
  Schedule a = Schedule::kaczmarz_growing(PermMode::seeded(31337));
  Schedule b = Schedule::kaczmarz_growing(PermMode::seeded(31337));
  for (long k : {1L, 5L, 50L}) CHECK(a.weights(k).same_support_and_weights(b.weights(k)));

  // incremental emission into a reused scratch equals fresh emission
  Schedule inc = Schedule::cimmino_growing();
  Schedule fresh = Schedule::cimmino_growing();
  WeightFunction scratch;
  for (long k = 0; k <= 64; ++k) {
    inc.emit(k, scratch);
    CHECK(scratch.same_support_and_weights(fresh.weights(k)));
  }
  // and survives being handed a dirty scratch mid-sequence
  WeightFunction dirty = make_weight({{{9, 9}, 1.0}});
  inc.emit(10, dirty);
  CHECK(dirty.same_support_and_weights(fresh.weights(10)));
}

TEST_CASE("random weight functions satisfy the axioms") {
  Rng rng(5150);
  for (int rep = 0; rep < 200; ++rep) {
    const WeightFunction w = gen::weight_function(rng, 8);
    CHECK_NOTHROW(w.validate());
    double s = 0.0;
    for (auto e : w) s += e.weight;
    CHECK(s == Approx(1.0).epsilon(1e-12));
  }
}

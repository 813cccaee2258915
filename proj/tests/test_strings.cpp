#include <catch2/catch_amalgamated.hpp>

#include "stravg/strings.hpp"
#include "support/generators.hpp"

using namespace stravg;
using Catch::Approx;

namespace {

Family axes_family() {
  // C_1 = x-axis {y = 0}, C_2 = y-axis {x = 0} in R^2
  return Family::finite({ConvexSet(Hyperplane{{0.0, 1.0}, 0.0}),
                         ConvexSet(Hyperplane{{1.0, 0.0}, 0.0})});
}

}  // namespace

TEST_CASE("position follows the worked example") {
  const IndexVector iv{9, 8, 2, 4, 1, 6, 2, 1, 2};
  CHECK(position(1, iv) == Position::at(5));
  CHECK(position(2, iv) == Position::at(3));
  CHECK(position(4, iv) == Position::at(4));
  CHECK(position(3, iv).is_infinite());
  CHECK(position(5, IndexVector{5}) == Position::at(1));
  CHECK(weight_over(1.0, Position::at(4)) == Approx(0.25));
  CHECK(weight_over(1.0, Position::infinite()) == 0.0);
  CHECK_THROWS_AS(Position::infinite().value(), std::logic_error);
}

TEST_CASE("contains_index matches membership in IxSet") {
  const IndexVector iv{3, 1, 4, 3, 1, 3, 7};
  for (int i = 1; i <= 9; ++i)
    CHECK(contains_index(iv, i) == (i == 1 || i == 3 || i == 4 || i == 7));
  CHECK(contains_index(IndexVector{5}, 5));
  CHECK_FALSE(contains_index(IndexVector{5}, 6));
}

TEST_CASE("position bounded by length whenever the index occurs") {
  Rng rng(42);
  for (int rep = 0; rep < 200; ++rep) {
    IndexVector iv(1 + rng.next_below(8));
    for (auto& i : iv) i = 1 + static_cast<int>(rng.next_below(6));
    for (int i = 1; i <= 6; ++i) {
      const Position p = position(i, iv);
      if (contains_index(iv, i))
        CHECK(p.value() <= static_cast<int>(iv.size()));
      else
        CHECK(p.is_infinite());
    }
  }
}

TEST_CASE("apply_string composes left to right") {
  Family fam = axes_family();
  // single-set string
  CHECK(apply_string(fam, IndexVector{1}, {3.0, 7.0}) == Vector{3.0, 0.0});
  // (1,2): (3,7) -> (3,0) -> (0,0)
  CHECK(apply_string(fam, IndexVector{1, 2}, {3.0, 7.0}) == Vector{0.0, 0.0});
  // the result lies in the last string set
  const Vector r = apply_string(fam, IndexVector{2, 1}, {3.0, 7.0});
  CHECK(contains(fam.set(1), r));

  // all-identity string
  Family one = Family::finite({ConvexSet(Hyperplane{{1.0, 0.0}, 0.0})});
  CHECK(apply_string(one, IndexVector{5, 9, 12}, {2.5, -1.0}) == Vector{2.5, -1.0});

  CHECK_THROWS_AS(apply_string(fam, IndexVector{}, {1.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(apply_string(fam, IndexVector{0}, {1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("unresolvable indices surface as errors") {
  Family prefix = Family::infinite_prefix({ConvexSet(Ray2D{0.0}), ConvexSet(Ray2D{1.0})});
  CHECK_THROWS_AS(apply_string(prefix, IndexVector{1, 3}, {1.0, 1.0}), std::out_of_range);
}

TEST_CASE("eps-thresholded strings project only from distance >= eps") {
  Family fam = Family::finite({ConvexSet(Hyperplane{{0.0, 1.0}, 0.0})});
  // d((2, 0.4), C_1) = 0.4 < 0.5: unchanged
  CHECK(apply_string_eps(fam, IndexVector{1}, {2.0, 0.4}, 0.5) == Vector{2.0, 0.4});
  // d((2, 0.6), C_1) = 0.6 >= 0.5: projected
  CHECK(apply_string_eps(fam, IndexVector{1}, {2.0, 0.6}, 0.5) == Vector{2.0, 0.0});
  // threshold exactly met counts as met
  CHECK(apply_string_eps(fam, IndexVector{1}, {2.0, 0.5}, 0.5) == Vector{2.0, 0.0});
  CHECK_THROWS_AS(apply_string_eps(fam, IndexVector{1}, {2.0, 0.5}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(apply_string_eps(fam, IndexVector{1}, {2.0, 0.5}, -1.0), std::invalid_argument);
}

TEST_CASE("tiny eps reproduces the plain string bit for bit") {
  Rng rng(7);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<ConvexSet> sets;
    for (int i = 0; i < 4; ++i) sets.push_back(gen::any_set(rng, 2));
    bool nontrivial = false;
    for (const auto& s : sets) nontrivial |= !s.is_whole_space();
    if (!nontrivial) continue;
    Family fam = Family::finite(std::move(sets));
    IndexVector iv(1 + rng.next_below(5));
    for (auto& i : iv) i = 1 + static_cast<int>(rng.next_below(4));
    const Vector x = gen::point(rng, 2);
    // any eps smaller than every per-step distance encountered gives the
    // same composition; 1e-300 is below any nonzero step here
    CHECK(apply_string(fam, iv, x) == apply_string_eps(fam, iv, x, 1e-300));
  }
}

TEST_CASE("strings do not expand distances to common points") {
  Rng rng(99);
  for (int rep = 0; rep < 150; ++rep) {
    const int n = 2;
    const Vector c = gen::point(rng, n, 3.0);
    std::vector<ConvexSet> sets;
    for (int i = 0; i < 3; ++i) sets.push_back(gen::set_containing(rng, n, c));
    bool nontrivial = false;
    for (const auto& s : sets) nontrivial |= !s.is_whole_space();
    if (!nontrivial) continue;
    Family fam = Family::finite(std::move(sets));
    // use the common point's member image to absorb thin-set rounding
    Vector s = c;
    for (int i = 1; i <= 3; ++i)
      if (distance(fam.set(i), s) > 0.0) s = project(fam.set(i), s);
    bool truly_common = true;
    for (int i = 1; i <= 3; ++i)
      truly_common &= distance(fam.set(i), s) <= 1e-12 * (1.0 + norm(s));
    if (!truly_common) continue;
    IndexVector iv(1 + rng.next_below(6));
    for (auto& i : iv) i = 1 + static_cast<int>(rng.next_below(3));
    const Vector z = gen::point(rng, n);
    CHECK(dist(apply_string(fam, iv, z), s) <= dist(z, s) + 1e-9);
  }
}

TEST_CASE("string concatenation equals sequential application") {
  Rng rng(123);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<ConvexSet> sets;
    for (int i = 0; i < 4; ++i) sets.push_back(gen::any_set(rng, 3));
    bool nontrivial = false;
    for (const auto& s : sets) nontrivial |= !s.is_whole_space();
    if (!nontrivial) continue;
    Family fam = Family::finite(std::move(sets));
    IndexVector a(1 + rng.next_below(4)), b(1 + rng.next_below(4));
    for (auto& i : a) i = 1 + static_cast<int>(rng.next_below(4));
    for (auto& i : b) i = 1 + static_cast<int>(rng.next_below(4));
    IndexVector ab = a;
    ab.insert(ab.end(), b.begin(), b.end());
    const Vector x = gen::point(rng, 3);
    CHECK(apply_string(fam, ab, x) == apply_string(fam, b, apply_string(fam, a, x)));
  }
}

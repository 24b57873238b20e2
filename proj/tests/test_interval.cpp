#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "tempoq/interval.hpp"

using namespace tempoq;

namespace {

FragmentedInterval fi(const std::string& text) {
  return FragmentedInterval::from_string(text);
}

// Membership oracle on the half-unit grid over a bounded universe.
bool member(const FragmentedInterval& f, std::int64_t pos) {
  return f.contains_position(pos);
}

std::vector<Interval> all_small_intervals(std::int64_t max_bound) {
  std::vector<Interval> out;
  for (std::int64_t lo = 0; lo <= max_bound; ++lo) {
    for (std::int64_t hi = lo; hi <= max_bound; ++hi) {
      for (bool lc : {true, false}) {
        for (bool uc : {true, false}) {
          if (lo == hi && !(lc && uc)) {
            continue;
          }
          out.emplace_back(TimePoint(lo), lc, TimePoint(hi), uc);
        }
      }
    }
  }
  for (std::int64_t lo = 0; lo <= max_bound; ++lo) {
    out.emplace_back(TimePoint(lo), true, TimePoint::infinity(), true);
  }
  return out;
}

}  // namespace

TEST_CASE("time points order and render") {
  CHECK(TimePoint(0) < TimePoint(1));
  CHECK(TimePoint(100) < TimePoint::infinity());
  CHECK(TimePoint::infinity() == TimePoint::infinity());
  CHECK(TimePoint::infinity().to_string() == "inf");
  CHECK_THROWS_AS(TimePoint(-1), std::invalid_argument);
  CHECK_THROWS_AS(TimePoint::infinity().ticks(), std::logic_error);
}

TEST_CASE("interval construction invariants") {
  CHECK_THROWS_AS(Interval(TimePoint(5), true, TimePoint(4), true),
                  std::invalid_argument);
  CHECK_THROWS_AS(Interval(TimePoint(5), true, TimePoint(5), false),
                  std::invalid_argument);
  CHECK_THROWS_AS(Interval(TimePoint::infinity(), true, TimePoint::infinity(),
                           true),
                  std::invalid_argument);
  // upper infinity normalizes to closed
  Interval up(TimePoint(3), true, TimePoint::infinity(), false);
  CHECK(up.upper_closed());
  CHECK(up.to_string() == "[3,inf]");
}

TEST_CASE("adjacency") {
  CHECK(adjacent(Interval::closed(5, 7), Interval::closed(6, 9)));
  CHECK(adjacent(Interval::closed(5, 7), Interval::closed(7, 9)));
  // touching point excluded on both sides
  Interval a(TimePoint(5), true, TimePoint(7), false);
  Interval b(TimePoint(7), false, TimePoint(9), true);
  CHECK_FALSE(adjacent(a, b));
  // union of [6,8] and [8,9] is [6,9]
  CHECK(adjacent(Interval::closed(6, 8), Interval::closed(8, 9)));
  CHECK(union_of(Interval::closed(6, 8), Interval::closed(8, 9)) == fi("[6,9]"));
  // integer ticks, real-line semantics: [5,7] and [8,9] do not touch
  CHECK_FALSE(adjacent(Interval::closed(5, 7), Interval::closed(8, 9)));
}

TEST_CASE("intersection examples") {
  CHECK(intersect(fi("[5,9]"), FragmentedInterval::universe()) == fi("[5,9]"));
  FragmentedInterval grouped = union_of(fi("[6,8]"), fi("[8,9]"));
  CHECK(grouped == fi("[6,9]"));
  CHECK(intersect(fi("[5,7]"), grouped) == fi("[6,7]"));
  CHECK(intersect(fi("[2,3]"), fi("[5,6]")).empty());
}

TEST_CASE("union examples") {
  CHECK(union_of(fi("[6,8]"), fi("[8,9]")) == fi("[6,9]"));
  FragmentedInterval two = union_of(fi("[1,2]"), fi("[4,5]"));
  CHECK(two.parts().size() == 2);
  CHECK(two.to_string() == "[1,2] ∪ [4,5]");
  CHECK(union_of(fi("[5,7]"), fi("[6,9]")) == fi("[5,9]"));
}

TEST_CASE("difference examples") {
  CHECK(difference(fi("[0,10]"), fi("[3,5]")).to_string() ==
        "[0,3) ∪ (5,10]");
  CHECK(difference(fi("[0,10]"), FragmentedInterval()) == fi("[0,10]"));
  FragmentedInterval a = union_of(fi("[0,4]"), fi("[6,9]"));
  CHECK(difference(a, fi("[3,7]")).to_string() == "[0,3) ∪ (7,9]");
}

TEST_CASE("difference with infinite parts") {
  CHECK(difference(FragmentedInterval::universe(), fi("[2,4]")).to_string() ==
        "[0,2) ∪ (4,inf]");
  CHECK(difference(fi("[0,5]"), fi("[3,inf]")).to_string() == "[0,3)");
  CHECK(difference(FragmentedInterval::universe(),
                   FragmentedInterval::universe())
            .empty());
}

TEST_CASE("render and parse round trip") {
  for (const char* text :
       {"{}", "[0,1]", "(2,5]", "[2,5)", "(2,5)", "[3,inf]",
        "[0,3) ∪ (5,10] ∪ [12,inf]"}) {
    CHECK(fi(text).to_string() == text);
  }
  CHECK_THROWS_AS(fi("[5,"), std::invalid_argument);
  CHECK_THROWS_AS(fi("[7,5]"), std::invalid_argument);
  CHECK_THROWS_AS(fi("[1,2] [3,4]"), std::invalid_argument);
}

TEST_CASE("membership homomorphism over exhaustive single intervals") {
  const std::int64_t kMax = 6;
  std::vector<Interval> intervals = all_small_intervals(kMax);
  const std::int64_t limit = 2 * kMax + 4;
  for (const Interval& x : intervals) {
    for (const Interval& y : intervals) {
      FragmentedInterval fx(x);
      FragmentedInterval fy(y);
      FragmentedInterval inter = intersect(fx, fy);
      FragmentedInterval uni = union_of(fx, fy);
      FragmentedInterval diff = difference(fx, fy);
      for (std::int64_t p = 0; p <= limit; ++p) {
        bool mx = member(fx, p);
        bool my = member(fy, p);
        REQUIRE(member(inter, p) == (mx && my));
        REQUIRE(member(uni, p) == (mx || my));
        REQUIRE(member(diff, p) == (mx && !my));
      }
      // adjacency is symmetric and implies a one-part union
      REQUIRE(adjacent(x, y) == adjacent(y, x));
      if (adjacent(x, y)) {
        REQUIRE(uni.parts().size() == 1);
      } else {
        REQUIRE(uni.parts().size() == 2);
      }
    }
  }
}

TEST_CASE("set laws on random fragmented intervals") {
  std::mt19937_64 rng(7);
  auto random_fragmented = [&]() {
    std::vector<Interval> parts;
    int n = static_cast<int>(rng() % 3);
    for (int i = 0; i < n; ++i) {
      std::int64_t lo = static_cast<std::int64_t>(rng() % 10);
      std::int64_t hi = lo + static_cast<std::int64_t>(rng() % 5);
      bool lc = rng() % 2 == 0;
      bool uc = rng() % 2 == 0;
      if (lo == hi) {
        lc = uc = true;
      }
      if (rng() % 8 == 0) {
        parts.emplace_back(TimePoint(lo), lc, TimePoint::infinity(), true);
      } else {
        parts.emplace_back(TimePoint(lo), lc, TimePoint(hi), uc);
      }
    }
    return FragmentedInterval(parts);
  };
  for (int trial = 0; trial < 2000; ++trial) {
    FragmentedInterval f = random_fragmented();
    FragmentedInterval g = random_fragmented();
    FragmentedInterval h = random_fragmented();
    // normalization idempotence
    REQUIRE(FragmentedInterval(f.parts()) == f);
    // commutativity
    REQUIRE(union_of(f, g) == union_of(g, f));
    REQUIRE(intersect(f, g) == intersect(g, f));
    // associativity
    REQUIRE(union_of(union_of(f, g), h) == union_of(f, union_of(g, h)));
    REQUIRE(intersect(intersect(f, g), h) == intersect(f, intersect(g, h)));
    // self difference
    REQUIRE(difference(f, f).empty());
  }
}

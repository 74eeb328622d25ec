#include <random>

#include "doctest.h"

#include "consistnav/errors.hpp"
#include "consistnav/planner.hpp"
#include "oracles.hpp"

using namespace consistnav;

namespace {

OccupancyGrid open_grid(int w, int h) { return OccupancyGrid(w, h, 0.1, Cell::Free); }

}  // namespace

TEST_CASE("trivial paths") {
  auto g = open_grid(10, 1);
  auto p = plan_path(g, {3, 0}, {3, 0});
  REQUIRE(p);
  CHECK(p->cost == 0.0);
  CHECK(p->cells.size() == 1);
  p = plan_path(g, {0, 0}, {9, 0});
  REQUIRE(p);
  CHECK(p->cost == doctest::Approx(9.0));
  CHECK(p->cells.size() == 10);
}

TEST_CASE("diagonals cost sqrt 2 and never cut corners") {
  auto g = open_grid(3, 3);
  auto p = plan_path(g, {0, 0}, {2, 2});
  REQUIRE(p);
  CHECK(p->cost == doctest::Approx(2 * kSqrt2));
  g.set({1, 0}, Cell::Occupied);
  p = plan_path(g, {0, 0}, {1, 1});
  REQUIRE(p);
  CHECK(p->cost == doctest::Approx(2.0));
}

TEST_CASE("blocked and invalid endpoints") {
  auto g = open_grid(5, 5);
  for (int y = 0; y < 5; ++y) g.set({2, y}, Cell::Occupied);
  CHECK_FALSE(plan_path(g, {0, 0}, {4, 4}).has_value());
  CHECK_FALSE(plan_path(g, {0, 0}, {2, 2}).has_value());
  CHECK_THROWS_AS(plan_path(g, {2, 0}, {0, 0}), InvalidArgument);
  g.set({0, 4}, Cell::Unknown);
  CHECK_FALSE(plan_path(g, {0, 0}, {0, 4}).has_value());
}

TEST_CASE("planning is deterministic") {
  auto g = open_grid(20, 20);
  const auto a = plan_path(g, {0, 0}, {19, 7});
  const auto b = plan_path(g, {0, 0}, {19, 7});
  REQUIRE(a);
  REQUIRE(b);
  CHECK(a->cells == b->cells);
}

TEST_CASE("planner matches the relaxation oracle on random grids") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  int compared = 0;
  for (int trial = 0; trial < 60; ++trial) {
    OccupancyGrid g(15, 12, 0.1, Cell::Free);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (u(rng) < 0.3) g.set_raw(i, Cell::Occupied);
    }
    g.set({0, 0}, Cell::Free);
    const CellIndex goal{14, 11};
    g.set(goal, Cell::Free);
    const auto want = testkit::oracle_grid_distance(g, {0, 0}, goal);
    const auto got = plan_path(g, {0, 0}, goal);
    REQUIRE(want.has_value() == got.has_value());
    if (!want) continue;
    ++compared;
    CHECK(got->cost == doctest::Approx(*want));
    const auto field = distance_field(g, {0, 0});
    CHECK(field[g.index(goal)] == doctest::Approx(*want));
    const auto walk = path_from_field(g, field, goal);
    REQUIRE(walk);
    CHECK(walk->cost == doctest::Approx(*want));
    CHECK(walk->cells.front() == CellIndex{0, 0});
    CHECK(walk->cells.back() == goal);
  }
  CHECK(compared > 10);
}

TEST_CASE("frontier detection") {
  SUBCASE("fully known map has none") {
    auto g = open_grid(10, 10);
    CHECK(detect_frontiers(g).empty());
  }
  SUBCASE("a known patch in unknown space is ringed by frontier") {
    OccupancyGrid g(11, 11, 0.1, Cell::Unknown);
    for (int y = 3; y <= 7; ++y) {
      for (int x = 3; x <= 7; ++x) g.set({x, y}, Cell::Free);
    }
    const auto f = detect_frontiers(g);
    REQUIRE(f.size() == 1);
    CHECK(f[0].size == 16);
    CHECK(is_frontier_cell(g, {3, 5}));
    CHECK_FALSE(is_frontier_cell(g, {5, 5}));
  }
  SUBCASE("a one-cell speck is dropped") {
    auto g = open_grid(9, 9);
    g.set({4, 4}, Cell::Unknown);
    for (auto c : std::vector<CellIndex>{{4, 3}, {4, 5}, {3, 4}}) g.set(c, Cell::Occupied);
    CHECK(detect_frontiers(g).empty());
    CHECK(detect_frontiers(g, 1).size() == 1);
  }
  SUBCASE("single known cell") {
    OccupancyGrid g(5, 5, 0.1, Cell::Unknown);
    g.set({2, 2}, Cell::Free);
    CHECK(detect_frontiers(g).empty());
    CHECK(detect_frontiers(g, 1).size() == 1);
  }
}

#include "../support/generators.hpp"
#include "../support/oracles.hpp"
#include "hoiplan/grid.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace hoiplan;

namespace {

OccupancyGrid make_grid(const std::vector<char>& occ, int w, int h) {
  OccupancyGrid g(Vec2::Zero(), 1.0, w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) g.set({x, y}, occ[static_cast<std::size_t>(y * w + x)] != 0);
  return g;
}

void check_route(const OccupancyGrid& g, const Route& r, Cell s, Cell goal, bool eight) {
  REQUIRE(!r.cells.empty());
  CHECK(r.cells.front() == s);
  CHECK(r.cells.back() == goal);
  PathCost sum;
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    CHECK(!g.occupied(r.cells[i]));
    if (i == 0) continue;
    const int dx = r.cells[i].x - r.cells[i - 1].x;
    const int dy = r.cells[i].y - r.cells[i - 1].y;
    CHECK(std::abs(dx) <= 1);
    CHECK(std::abs(dy) <= 1);
    if (dx != 0 && dy != 0) {
      CHECK(eight);
      CHECK(!g.occupied({r.cells[i - 1].x + dx, r.cells[i - 1].y}));
      CHECK(!g.occupied({r.cells[i - 1].x, r.cells[i - 1].y + dy}));
      ++sum.diagonal;
    } else {
      ++sum.straight;
    }
  }
  CHECK(sum == r.cost);
}

/// Area of a convex polygon (any vertex order) clipped to an axis-aligned box.
double clipped_area(std::vector<Vec2> poly, const Vec2& lo, const Vec2& hi) {
  // Order the vertices around their centroid.
  Vec2 c = Vec2::Zero();
  for (const Vec2& p : poly) c += p;
  c /= static_cast<double>(poly.size());
  std::sort(poly.begin(), poly.end(), [&](const Vec2& a, const Vec2& b) {
    return std::atan2(a.y() - c.y(), a.x() - c.x()) < std::atan2(b.y() - c.y(), b.x() - c.x());
  });
  auto clip = [](const std::vector<Vec2>& in, int axis, double bound, bool keep_below) {
    std::vector<Vec2> out;
    auto inside = [&](const Vec2& p) { return keep_below ? p[axis] <= bound : p[axis] >= bound; };
    for (std::size_t i = 0; i < in.size(); ++i) {
      const Vec2& a = in[i];
      const Vec2& b = in[(i + 1) % in.size()];
      if (inside(a)) out.push_back(a);
      if (inside(a) != inside(b)) {
        const double t = (bound - a[axis]) / (b[axis] - a[axis]);
        out.push_back(a + t * (b - a));
      }
    }
    return out;
  };
  poly = clip(poly, 0, lo.x(), false);
  poly = clip(poly, 0, hi.x(), true);
  poly = clip(poly, 1, lo.y(), false);
  poly = clip(poly, 1, hi.y(), true);
  double area = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    area += a.x() * b.y() - a.y() * b.x();
  }
  return std::abs(area) / 2.0;
}

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("four-connected corner to corner on an empty 3x3 grid costs 4") {
  const OccupancyGrid g(Vec2::Zero(), 1.0, 3, 3);
  AstarOptions o;
  o.connectivity = Connectivity::Four;
  o.stride = 0;
  const Route r = astar(g, Cell{0, 0}, Cell{2, 2}, o);
  CHECK(r.cost.value() == 4.0);
  CHECK(r.cost == PathCost{4, 0});
  const auto bfs = oracle::dijkstra(std::vector<char>(9, 0), 3, 3, {0, 0}, {2, 2}, false);
  CHECK(bfs->a == 4);
}

TEST_CASE("start equal to goal yields a single waypoint") {
  const OccupancyGrid g(Vec2::Zero(), 0.5, 4, 4);
  const Route r = astar(g, Vec2(1.1, 1.1), Vec2(1.2, 1.2));
  CHECK(r.cells.size() == 1);
  CHECK(r.waypoints.size() == 1);
  CHECK(r.cost.value() == 0.0);
}

TEST_CASE("astar errors") {
  std::vector<char> occ(25, 0);
  for (int y = 0; y < 5; ++y) occ[static_cast<std::size_t>(y * 5 + 2)] = 1;
  const OccupancyGrid g = make_grid(occ, 5, 5);
  CHECK(code_of([&] { astar(g, Cell{0, 0}, Cell{4, 4}); }) == ErrorCode::NoPath);
  CHECK(code_of([&] { astar(g, Cell{2, 0}, Cell{4, 4}); }) == ErrorCode::StartOccupied);
  CHECK(code_of([&] { astar(g, Cell{0, 0}, Cell{2, 4}); }) == ErrorCode::GoalOccupied);
  CHECK(code_of([&] { astar(g, Cell{0, 0}, Cell{9, 9}); }) == ErrorCode::GoalOccupied);
}

TEST_CASE("diagonal moves never cut an occupied corner") {
  // Cell (1, 1) blocked: the diagonal from (1, 0) to (0, 1) would clip it.
  std::vector<char> occ = {0, 0, 0, 1};
  const OccupancyGrid g = make_grid(occ, 2, 2);
  AstarOptions o;
  o.stride = 0;
  const Route r = astar(g, Cell{1, 0}, Cell{0, 1}, o);
  CHECK(r.cost == PathCost{2, 0});
}

TEST_CASE("astar equals the dijkstra oracle on random grids") {
  Rng rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const int w = 2 + static_cast<int>(rng.below(20));
    const int h = 2 + static_cast<int>(rng.below(20));
    const double density = rng.uniform(0.0, 0.45);
    std::vector<char> occ(static_cast<std::size_t>(w * h));
    for (auto& c : occ) c = rng.uniform() < density;
    const OccupancyGrid g = make_grid(occ, w, h);
    const bool eight = rng.uniform() < 0.7;
    AstarOptions o;
    o.connectivity = eight ? Connectivity::Eight : Connectivity::Four;
    o.stride = 0;
    for (int q = 0; q < 10; ++q) {
      const Cell s{static_cast<int>(rng.below(w)), static_cast<int>(rng.below(h))};
      const Cell t{static_cast<int>(rng.below(w)), static_cast<int>(rng.below(h))};
      const auto ref = oracle::dijkstra(occ, w, h, {s.x, s.y}, {t.x, t.y}, eight);
      if (g.occupied(s) || g.occupied(t) || !ref) {
        CHECK_THROWS_AS(astar(g, s, t, o), Error);
        continue;
      }
      const Route r = astar(g, s, t, o);
      CHECK(r.cost.straight == ref->a);
      CHECK(r.cost.diagonal == ref->b);
      check_route(g, r, s, t, eight);
    }
  }
}

TEST_CASE("flood costs agree with the oracle") {
  Rng rng(9);
  std::vector<char> occ(12 * 9);
  for (auto& c : occ) c = rng.uniform() < 0.25;
  occ[0] = 0;
  const OccupancyGrid g = make_grid(occ, 12, 9);
  const auto mine = flood_costs(g, {0, 0}, Connectivity::Eight);
  const auto ref = oracle::dijkstra_all(occ, 12, 9, {0, 0}, true);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    CHECK(mine[i].has_value() == ref[i].has_value());
    if (mine[i] && ref[i]) CHECK(mine[i]->straight == ref[i]->a);
  }
}

TEST_CASE("path cost ordering is exact") {
  CHECK(PathCost{0, 5} < PathCost{8, 0});   // 7.07 < 8
  CHECK(PathCost{7, 0} < PathCost{0, 5});   // 7 < 7.07
  CHECK(PathCost{3, 2} == PathCost{3, 2});
  CHECK(PathCost{1, 1} > PathCost{2, 0});
}

TEST_CASE("waypoints are at least a stride apart") {
  const OccupancyGrid g(Vec2::Zero(), 0.05, 120, 80);
  const Route r = astar(g, Vec2(0.1, 0.1), Vec2(5.5, 3.7));
  REQUIRE(r.waypoints.size() >= 2);
  for (std::size_t i = 1; i + 1 < r.waypoints.size(); ++i) {
    CHECK((r.waypoints[i] - r.waypoints[i - 1]).norm() >= 1.0 - 1e-12);
  }
  CHECK((r.waypoints.back() - g.center(r.cells.back())).norm() == 0.0);
  CHECK((r.waypoints.front() - g.center(r.cells.front())).norm() == 0.0);
}

TEST_CASE("rasterize marks exactly the cells overlapping each footprint") {
  Scene s;
  s.bounds = {-1, -1, 1, 1};
  ObjectSpec box;
  box.id = "box";
  box.half_extents = {0.5, 0.5, 0.5};
  s.objects = {box};
  const OccupancyGrid g = rasterize(s, {}, 0.5, 0.0);
  CHECK(g.width() == 4);
  CHECK(g.occupied_count() == 4);
  for (int x = 1; x <= 2; ++x)
    for (int y = 1; y <= 2; ++y) CHECK(g.occupied({x, y}));
  CHECK(rasterize(s, {"box"}, 0.5, 0.0).occupied_count() == 0);
  Scene empty;
  empty.bounds = {0, 0, 3, 2};
  CHECK(rasterize(empty, {}, 0.25, 0.3).occupied_count() == 0);
}

TEST_CASE("rasterize agrees with a polygon clipping oracle") {
  Rng rng(12);
  for (int t = 0; t < 30; ++t) {
    Scene s;
    s.bounds = {-2, -2, 2, 2};
    ObjectSpec o;
    o.id = "o";
    o.half_extents = {rng.uniform(0.05, 0.8), rng.uniform(0.05, 0.8), 0.3};
    o.initial_pose = Pose({rng.uniform(-1, 1), rng.uniform(-1, 1), 0.3}, yaw_rotation(rng.uniform(-3, 3)));
    s.objects = {o};
    const OccupancyGrid g = rasterize(s, {}, 0.1, 0.0);
    std::vector<Vec2> rect;
    for (const Vec3& c : box_corners(o, o.initial_pose)) {
      if (c.z() > 0.3) rect.push_back(c.head<2>());
    }
    for (int y = 0; y < g.height(); ++y) {
      for (int x = 0; x < g.width(); ++x) {
        const auto [lo, hi] = g.cell_box({x, y});
        const double area = clipped_area(rect, lo, hi);
        if (area > 1e-10) CHECK(g.occupied({x, y}));
        if (area < 1e-14) CHECK(!g.occupied({x, y}));
      }
    }
  }
}

TEST_CASE("inflation grows the occupied set") {
  Scene s;
  s.bounds = {-2, -2, 2, 2};
  ObjectSpec o;
  o.id = "o";
  o.half_extents = {0.3, 0.3, 0.3};
  s.objects = {o};
  const auto a = rasterize(s, {}, 0.05, 0.0);
  const auto b = rasterize(s, {}, 0.05, 0.3);
  CHECK(b.occupied_count() > a.occupied_count());
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x)
      if (a.occupied({x, y})) CHECK(b.occupied({x, y}));
  // A cell whose nearest point is 0.29 m from the box is blocked, 0.31 m is free.
  CHECK(b.occupied(*b.cell_at({0.3 + 0.29 + 0.001, 0.0})) == true);
  CHECK(b.occupied(*b.cell_at({0.3 + 0.31 + 0.049, 0.0})) == false);
}

#include "hoiplan/grid.hpp"

#include "hoiplan/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

namespace hoiplan {

namespace {

struct Step {
  int dx, dy;
  bool diagonal;
};

constexpr std::array<Step, 8> kSteps = {{{1, 0, false},
                                         {-1, 0, false},
                                         {0, 1, false},
                                         {0, -1, false},
                                         {1, 1, true},
                                         {1, -1, true},
                                         {-1, 1, true},
                                         {-1, -1, true}}};

std::size_t step_count(Connectivity c) { return c == Connectivity::Eight ? 8 : 4; }

bool can_step(const OccupancyGrid& grid, Cell from, const Step& s) {
  const Cell to{from.x + s.dx, from.y + s.dy};
  if (!grid.contains(to) || grid.occupied(to)) return false;
  if (s.diagonal) {
    // No corner cutting: both orthogonal neighbours must be free.
    if (grid.occupied({from.x + s.dx, from.y}) || grid.occupied({from.x, from.y + s.dy})) {
      return false;
    }
  }
  return true;
}

PathCost heuristic(Cell a, Cell b, Connectivity c) {
  const long long dx = std::abs(a.x - b.x);
  const long long dy = std::abs(a.y - b.y);
  if (c == Connectivity::Four) return {dx + dy, 0};
  return {std::max(dx, dy) - std::min(dx, dy), std::min(dx, dy)};
}

struct OpenEntry {
  PathCost f;
  PathCost h;
  Cell cell;
};

struct OpenLater {
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.h != b.h) return a.h > b.h;
    return a.cell > b.cell;
  }
};

double segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 e = b - a;
  const double l2 = e.squaredNorm();
  const double t = l2 > 0.0 ? std::clamp((p - a).dot(e) / l2, 0.0, 1.0) : 0.0;
  return (a + t * e - p).norm();
}

}  // namespace

OccupancyGrid::OccupancyGrid(Vec2 origin, double resolution, int width, int height)
    : origin_(std::move(origin)),
      resolution_(resolution),
      width_(width),
      height_(height),
      cells_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0) {}

OccupancyGrid OccupancyGrid::covering(const Bounds& b, double resolution) {
  if (!(resolution > 0.0)) {
    throw Error(ErrorCode::SchemaError, "grid resolution must be positive");
  }
  const int w = std::max(1, static_cast<int>(std::ceil((b.x1 - b.x0) / resolution - 1e-9)));
  const int h = std::max(1, static_cast<int>(std::ceil((b.y1 - b.y0) / resolution - 1e-9)));
  return OccupancyGrid(Vec2(b.x0, b.y0), resolution, w, h);
}

Vec2 OccupancyGrid::center(Cell c) const {
  return origin_ + resolution_ * Vec2(c.x + 0.5, c.y + 0.5);
}

std::optional<Cell> OccupancyGrid::cell_at(const Vec2& p) const {
  const Vec2 local = (p - origin_) / resolution_;
  if (!std::isfinite(local.x()) || !std::isfinite(local.y())) return std::nullopt;
  const double fx = std::floor(local.x());
  const double fy = std::floor(local.y());
  if (fx < 0 || fy < 0 || fx >= width_ || fy >= height_) return std::nullopt;
  return Cell{static_cast<int>(fx), static_cast<int>(fy)};
}

std::pair<Vec2, Vec2> OccupancyGrid::cell_box(Cell c) const {
  const Vec2 lo = origin_ + resolution_ * Vec2(c.x, c.y);
  return {lo, lo + Vec2::Constant(resolution_)};
}

std::size_t OccupancyGrid::occupied_count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), 1));
}

double PathCost::value() const {
  return static_cast<double>(straight) + static_cast<double>(diagonal) * std::numbers::sqrt2;
}

std::strong_ordering operator<=>(const PathCost& a, const PathCost& b) {
  // Sign of (a - b) = X - Y*sqrt(2) with integers X, Y; exact.
  const long long x = a.straight - b.straight;
  const long long y = b.diagonal - a.diagonal;
  if (x == 0 && y == 0) return std::strong_ordering::equal;
  if (x >= 0 && y <= 0) return std::strong_ordering::greater;
  if (x <= 0 && y >= 0) return std::strong_ordering::less;
  if (x > 0) {
    return x * x < 2 * y * y ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  return x * x > 2 * y * y ? std::strong_ordering::less : std::strong_ordering::greater;
}

Route astar(const OccupancyGrid& grid, Cell start, Cell goal, const AstarOptions& options) {
  if (!grid.contains(start) || grid.occupied(start)) {
    throw Error(ErrorCode::StartOccupied, "start cell is occupied or outside the grid",
                {{"cell", {start.x, start.y}}});
  }
  if (!grid.contains(goal) || grid.occupied(goal)) {
    throw Error(ErrorCode::GoalOccupied, "goal cell is occupied or outside the grid",
                {{"cell", {goal.x, goal.y}}});
  }
  const std::size_t n = static_cast<std::size_t>(grid.width()) * grid.height();
  auto idx = [&](Cell c) {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(grid.width()) +
           static_cast<std::size_t>(c.x);
  };
  std::vector<std::optional<PathCost>> g(n);
  std::vector<std::int64_t> parent(n, -1);
  std::vector<bool> closed(n, false);
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenLater> open;

  g[idx(start)] = PathCost{};
  const PathCost h0 = heuristic(start, goal, options.connectivity);
  open.push({h0, h0, start});
  const std::size_t steps = step_count(options.connectivity);

  while (!open.empty()) {
    const OpenEntry top = open.top();
    open.pop();
    const std::size_t ci = idx(top.cell);
    if (closed[ci]) continue;
    closed[ci] = true;
    if (top.cell == goal) break;
    for (std::size_t k = 0; k < steps; ++k) {
      const Step& s = kSteps[k];
      if (!can_step(grid, top.cell, s)) continue;
      const Cell next{top.cell.x + s.dx, top.cell.y + s.dy};
      const std::size_t ni = idx(next);
      if (closed[ni]) continue;
      const PathCost ng = *g[ci] + (s.diagonal ? PathCost{0, 1} : PathCost{1, 0});
      if (!g[ni] || ng < *g[ni]) {
        g[ni] = ng;
        parent[ni] = static_cast<std::int64_t>(ci);
        const PathCost h = heuristic(next, goal, options.connectivity);
        open.push({ng + h, h, next});
      }
    }
  }
  if (!closed[idx(goal)]) {
    throw Error(ErrorCode::NoPath, "no collision-free path between start and goal",
                {{"start", {start.x, start.y}}, {"goal", {goal.x, goal.y}}});
  }
  Route route;
  route.cost = *g[idx(goal)];
  for (std::int64_t i = static_cast<std::int64_t>(idx(goal)); i >= 0; i = parent[static_cast<std::size_t>(i)]) {
    route.cells.push_back({static_cast<int>(i % grid.width()), static_cast<int>(i / grid.width())});
  }
  std::reverse(route.cells.begin(), route.cells.end());
  route.waypoints = downsample_waypoints(grid, route.cells, options.stride);
  return route;
}

Route astar(const OccupancyGrid& grid, const Vec2& start, const Vec2& goal,
            const AstarOptions& options) {
  auto s = grid.cell_at(start);
  if (!s) {
    throw Error(ErrorCode::StartOccupied, "start lies outside the grid",
                {{"point", {start.x(), start.y()}}});
  }
  auto g = grid.cell_at(goal);
  if (!g) {
    throw Error(ErrorCode::GoalOccupied, "goal lies outside the grid",
                {{"point", {goal.x(), goal.y()}}});
  }
  return astar(grid, *s, *g, options);
}

std::vector<Vec2> downsample_waypoints(const OccupancyGrid& grid, const std::vector<Cell>& cells,
                                       double stride) {
  std::vector<Vec2> out;
  if (cells.empty()) return out;
  out.push_back(grid.center(cells.front()));
  if (cells.size() == 1) return out;
  for (std::size_t i = 1; i + 1 < cells.size(); ++i) {
    const Vec2 p = grid.center(cells[i]);
    if ((p - out.back()).norm() >= stride) out.push_back(p);
  }
  const Vec2 goal = grid.center(cells.back());
  if (out.size() > 1 && (goal - out.back()).norm() < stride) {
    out.back() = goal;
  } else {
    out.push_back(goal);
  }
  return out;
}

std::vector<std::optional<PathCost>> flood_costs(const OccupancyGrid& grid, Cell start,
                                                 Connectivity connectivity) {
  const std::size_t n = static_cast<std::size_t>(grid.width()) * grid.height();
  std::vector<std::optional<PathCost>> cost(n);
  if (!grid.contains(start) || grid.occupied(start)) return cost;
  auto idx = [&](Cell c) {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(grid.width()) +
           static_cast<std::size_t>(c.x);
  };
  std::vector<bool> done(n, false);
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenLater> open;
  cost[idx(start)] = PathCost{};
  open.push({PathCost{}, PathCost{}, start});
  const std::size_t steps = step_count(connectivity);
  while (!open.empty()) {
    const OpenEntry top = open.top();
    open.pop();
    const std::size_t ci = idx(top.cell);
    if (done[ci]) continue;
    done[ci] = true;
    for (std::size_t k = 0; k < steps; ++k) {
      const Step& s = kSteps[k];
      if (!can_step(grid, top.cell, s)) continue;
      const Cell next{top.cell.x + s.dx, top.cell.y + s.dy};
      const std::size_t ni = idx(next);
      const PathCost nc = *cost[ci] + (s.diagonal ? PathCost{0, 1} : PathCost{1, 0});
      if (!cost[ni] || nc < *cost[ni]) {
        cost[ni] = nc;
        open.push({nc, PathCost{}, next});
      }
    }
  }
  return cost;
}

bool polygon_hits_box(const Polygon& poly, const Vec2& box_min, const Vec2& box_max,
                      double inflation) {
  if (poly.empty()) return false;
  const std::array<Vec2, 4> box = {box_min, Vec2(box_max.x(), box_min.y()), box_max,
                                   Vec2(box_min.x(), box_max.y())};
  if (poly.size() >= 3) {
    std::vector<Vec2> axes = {Vec2::UnitX(), Vec2::UnitY()};
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Vec2 e = poly[(i + 1) % poly.size()] - poly[i];
      if (e.norm() > 0.0) axes.emplace_back(Vec2(-e.y(), e.x()).normalized());
    }
    bool overlap = true;
    for (const Vec2& axis : axes) {
      double pmin = std::numeric_limits<double>::infinity(), pmax = -pmin;
      double bmin = pmin, bmax = -pmin;
      for (const Vec2& p : poly) {
        pmin = std::min(pmin, p.dot(axis));
        pmax = std::max(pmax, p.dot(axis));
      }
      for (const Vec2& p : box) {
        bmin = std::min(bmin, p.dot(axis));
        bmax = std::max(bmax, p.dot(axis));
      }
      if (std::min(pmax, bmax) - std::max(pmin, bmin) <= 1e-12) {
        overlap = false;
        break;
      }
    }
    if (overlap) return true;
  }
  if (inflation <= 0.0) return false;
  double best = std::numeric_limits<double>::infinity();
  for (const Vec2& p : poly) {
    const Vec2 q = p.cwiseMax(box_min).cwiseMin(box_max);
    best = std::min(best, (p - q).norm());
  }
  for (const Vec2& c : box) {
    for (std::size_t i = 0; i < poly.size(); ++i) {
      best = std::min(best, segment_distance(c, poly[i], poly[(i + 1) % poly.size()]));
    }
  }
  return best < inflation;
}

OccupancyGrid rasterize(const Scene& scene, const std::set<std::string>& exclude,
                        double resolution, double inflation) {
  OccupancyGrid grid = OccupancyGrid::covering(scene.bounds, resolution);
  for (const auto& o : scene.objects) {
    if (exclude.count(o.id)) continue;
    const Polygon fp = footprint(o, o.initial_pose);
    Vec2 lo = fp.front();
    Vec2 hi = fp.front();
    for (const Vec2& p : fp) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    lo -= Vec2::Constant(inflation);
    hi += Vec2::Constant(inflation);
    const int x0 = std::max(0, static_cast<int>(std::floor((lo.x() - grid.origin().x()) / resolution)));
    const int y0 = std::max(0, static_cast<int>(std::floor((lo.y() - grid.origin().y()) / resolution)));
    const int x1 = std::min(grid.width() - 1,
                            static_cast<int>(std::floor((hi.x() - grid.origin().x()) / resolution)));
    const int y1 = std::min(grid.height() - 1,
                            static_cast<int>(std::floor((hi.y() - grid.origin().y()) / resolution)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const Cell c{x, y};
        if (grid.occupied(c)) continue;
        auto [bmin, bmax] = grid.cell_box(c);
        if (polygon_hits_box(fp, bmin, bmax, inflation)) grid.set(c, true);
      }
    }
  }
  return grid;
}

}  // namespace hoiplan

#pragma once

#include "hoiplan/scene.hpp"

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace hoiplan {

struct Cell {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(Vec2 origin, double resolution, int width, int height);

  /// Smallest grid anchored at (x0, y0) that covers the bounds.
  static OccupancyGrid covering(const Bounds& bounds, double resolution);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  const Vec2& origin() const { return origin_; }

  bool contains(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  bool occupied(Cell c) const { return cells_[index(c)] != 0; }
  void set(Cell c, bool value) { cells_[index(c)] = value ? 1 : 0; }

  Vec2 center(Cell c) const;
  std::optional<Cell> cell_at(const Vec2& p) const;
  /// Axis-aligned square covered by the cell: (min corner, max corner).
  std::pair<Vec2, Vec2> cell_box(Cell c) const;

  std::size_t occupied_count() const;

 private:
  std::size_t index(Cell c) const {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.x);
  }

  Vec2 origin_ = Vec2::Zero();
  double resolution_ = 1.0;
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> cells_;
};

/// Path length in cells as straight + diagonal * sqrt(2), compared exactly.
struct PathCost {
  long long straight = 0;
  long long diagonal = 0;

  double value() const;
  PathCost operator+(const PathCost& o) const { return {straight + o.straight, diagonal + o.diagonal}; }
  friend bool operator==(const PathCost&, const PathCost&) = default;
  friend std::strong_ordering operator<=>(const PathCost& a, const PathCost& b);
};

enum class Connectivity { Four, Eight };

struct AstarOptions {
  Connectivity connectivity = Connectivity::Eight;
  /// Minimum spacing in meters between emitted waypoints; 0 keeps every cell.
  double stride = 1.0;
};

struct Route {
  std::vector<Cell> cells;  // consecutive cells are grid neighbors
  PathCost cost;
  std::vector<Vec2> waypoints;  // downsampled cell centers, meters
};

/// Shortest path on free cells. Diagonal moves cost sqrt(2) and may not cut
/// an occupied corner. Octile (or Manhattan) heuristic; ties broken by lower
/// heuristic, then lexicographic (x, y).
/// Errors: StartOccupied, GoalOccupied (also when outside the grid), NoPath.
Route astar(const OccupancyGrid& grid, Cell start, Cell goal, const AstarOptions& options = {});
Route astar(const OccupancyGrid& grid, const Vec2& start, const Vec2& goal,
            const AstarOptions& options = {});

/// Keeps the first cell, then every cell at least `stride` from the last kept
/// one; the goal is always last. Only the final gap may be shorter, and only
/// when the route itself is shorter than the stride.
std::vector<Vec2> downsample_waypoints(const OccupancyGrid& grid, const std::vector<Cell>& cells,
                                       double stride);

/// Single-source costs over free cells; unreachable cells are nullopt.
std::vector<std::optional<PathCost>> flood_costs(const OccupancyGrid& grid, Cell start,
                                                 Connectivity connectivity);

/// Marks every cell whose square overlaps (with positive area) an object
/// footprint inflated by `inflation`. Objects in `exclude` are skipped.
OccupancyGrid rasterize(const Scene& scene, const std::set<std::string>& exclude,
                        double resolution, double inflation);

/// Convex polygon vs axis-aligned box: true when the overlap has positive
/// area or, for inflation > 0, when their distance is below `inflation`.
bool polygon_hits_box(const Polygon& poly, const Vec2& box_min, const Vec2& box_max,
                      double inflation);

}  // namespace hoiplan

#pragma once

#include "hoiplan/geometry.hpp"
#include "hoiplan/json_io.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hoiplan {

/// Convex polygon, counter-clockwise, no repeated vertices.
using Polygon = std::vector<Vec2>;

struct ObjectSpec {
  std::string id;
  Vec3 half_extents = Vec3::Constant(0.5);
  /// Local-frame "front" direction used by facing constraints.
  Vec3 canonical_dir = Vec3::UnitX();
  bool is_static = false;
  Pose initial_pose;
  std::optional<std::vector<Vec3>> points;

  friend bool operator==(const ObjectSpec&, const ObjectSpec&) = default;
};

struct Bounds {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

  bool contains(const Vec2& p, double tol = 0.0) const {
    return p.x() >= x0 - tol && p.x() <= x1 + tol && p.y() >= y0 - tol && p.y() <= y1 + tol;
  }
  Vec2 center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }

  friend bool operator==(const Bounds&, const Bounds&) = default;
};

struct Scene {
  std::vector<ObjectSpec> objects;
  Bounds bounds;
  Vec2 north = Vec2::UnitY();

  const ObjectSpec* find(std::string_view id) const;
  const ObjectSpec& at(std::string_view id) const;

  friend bool operator==(const Scene&, const Scene&) = default;
};

struct MotionFrame {
  std::vector<Vec3> joints;
  std::vector<Rot6D> joint_rot6d;
  Pose object;
  std::array<double, 2> contact = {0.0, 0.0};

  friend bool operator==(const MotionFrame&, const MotionFrame&) = default;
};

struct MotionSequence {
  int fps = 30;
  std::vector<MotionFrame> frames;

  std::size_t joint_count() const { return frames.empty() ? 0 : frames.front().joints.size(); }

  friend bool operator==(const MotionSequence&, const MotionSequence&) = default;
};

// JSON schemas. Field order on output is fixed; loaders report SchemaError
// with a JSON-pointer path and DuplicateId for repeated object ids.
json_io::Json pose_to_json(const Pose& pose);
Pose pose_from_json(const json_io::Cursor& c);

json_io::Json scene_to_json(const Scene& scene);
Scene scene_from_json(const json_io::Json& j);
Scene load_scene(const std::filesystem::path& path);
void save_scene(const Scene& scene, const std::filesystem::path& path);

json_io::Json motion_to_json(const MotionSequence& motion);
MotionSequence motion_from_json(const json_io::Json& j);
MotionSequence load_motion(const std::filesystem::path& path);
void save_motion(const MotionSequence& motion, const std::filesystem::path& path);

/// The eight corners of the object's box at `pose`, in world coordinates.
std::array<Vec3, 8> box_corners(const ObjectSpec& o, const Pose& pose);

/// Highest world z over the box corners.
double top_surface_height(const ObjectSpec& o, const Pose& pose);

/// Lowest world z over the box corners.
double bottom_height(const ObjectSpec& o, const Pose& pose);

/// Convex hull of the box corners projected onto world XY.
Polygon footprint(const ObjectSpec& o, const Pose& pose);

// Planar polygon helpers used by the solver, checker, rasterizer.
Polygon convex_hull(std::vector<Vec2> points);
double polygon_area(const Polygon& poly);
bool polygon_contains(const Polygon& poly, const Vec2& p, double tol = 0.0);
/// Every vertex of `inner` inside `outer` expanded by `tol`.
bool polygon_contains(const Polygon& outer, const Polygon& inner, double tol);
double point_polygon_distance(const Vec2& p, const Polygon& poly);

}  // namespace hoiplan

#include "hoiplan/layout.hpp"

#include <algorithm>
#include <cmath>

namespace hoiplan {

double LayoutCheck::position_error_rate() const {
  return object_count ? static_cast<double>(position_errors.size()) / object_count : 0.0;
}

double LayoutCheck::orientation_error_rate() const {
  return object_count ? static_cast<double>(orientation_errors.size()) / object_count : 0.0;
}

bool boxes_penetrate(const ObjectSpec& a, const Pose& pa, const ObjectSpec& b, const Pose& pb,
                     double tol) {
  const Mat3 ra = pa.rotation();
  const Mat3 rb = pb.rotation();
  const Vec3 t = pb.position() - pa.position();
  std::vector<Vec3> axes;
  for (int i = 0; i < 3; ++i) axes.push_back(ra.col(i));
  for (int i = 0; i < 3; ++i) axes.push_back(rb.col(i));
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) {
      Vec3 c = ra.col(i).cross(rb.col(k));
      if (c.norm() > 1e-9) axes.push_back(c.normalized());
    }
  }
  for (const Vec3& axis : axes) {
    double extent_a = 0.0;
    double extent_b = 0.0;
    for (int i = 0; i < 3; ++i) {
      extent_a += a.half_extents[i] * std::abs(ra.col(i).dot(axis));
      extent_b += b.half_extents[i] * std::abs(rb.col(i).dot(axis));
    }
    if (extent_a + extent_b - std::abs(t.dot(axis)) <= tol) {
      return false;
    }
  }
  return true;
}

LayoutCheck check_layout(const Scene& scene, const SceneMap& map,
                         std::span<const SpatialRelation> relations, double tol) {
  LayoutCheck out;
  out.object_count = map.entries.size();
  const Scene solved = apply_scene_map(scene, map);
  auto pose_of = [&](const std::string& id) { return solved.at(id).initial_pose; };

  std::set<std::string> pos_bad;
  std::set<std::string> orient_bad;
  auto flag = [&](std::set<std::string>& set, const std::string& id, std::string msg) {
    if (map.find(id)) set.insert(id);
    out.violations.push_back(std::move(msg));
  };

  std::map<std::string, int> positional_preds;
  std::set<std::string> supported;
  for (const auto& r : relations) {
    if (!std::holds_alternative<FacingRelation>(r)) ++positional_preds[subject(r)];
    if (std::holds_alternative<OnRelation>(r)) supported.insert(subject(r));
  }

  for (const auto& r : relations) {
    if (const auto* on = std::get_if<OnRelation>(&r)) {
      const ObjectSpec& a = solved.at(on->object);
      const ObjectSpec& b = solved.at(on->base);
      const double gap = bottom_height(a, pose_of(a.id)) - top_surface_height(b, pose_of(b.id));
      if (std::abs(gap) > tol) {
        flag(pos_bad, a.id,
             "on(" + a.id + ", " + b.id + "): height gap " + std::to_string(gap));
      }
      if (!polygon_contains(footprint(b, pose_of(b.id)), footprint(a, pose_of(a.id)), tol)) {
        flag(pos_bad, a.id, "on(" + a.id + ", " + b.id + "): footprint not on support");
      }
    } else if (const auto* adj = std::get_if<AdjacentRelation>(&r)) {
      if (positional_preds[adj->object] != 1) continue;
      const Vec2 expected = pose_of(adj->anchor).position().head<2>() +
                            adj->distance * compass_vector(adj->direction, scene.north);
      const double err = (pose_of(adj->object).position().head<2>() - expected).norm();
      if (err > tol) {
        flag(pos_bad, adj->object,
             "adjacent(" + adj->object + ", " + adj->anchor + "): offset error " +
                 std::to_string(err));
      }
    } else if (const auto* f = std::get_if<FacingRelation>(&r)) {
      const ObjectSpec& a = solved.at(f->object);
      const Pose pa = pose_of(a.id);
      const Vec2 dir = (pa.orientation() * a.canonical_dir).head<2>();
      const Vec2 to = pose_of(f->target).position().head<2>() - pa.position().head<2>();
      double cosine = -1.0;
      if (dir.norm() > 0.0 && to.norm() > 0.0) {
        cosine = dir.normalized().dot(to.normalized());
      }
      if (cosine < 1.0 - tol) {
        flag(orient_bad, a.id,
             "facing(" + a.id + ", " + f->target + "): cosine " + std::to_string(cosine));
      }
    }
  }

  for (const auto& e : map.entries) {
    const ObjectSpec& o = solved.at(e.id);
    const Pose p = o.initial_pose;
    if (!scene.bounds.contains(p.position().head<2>(), tol)) {
      flag(pos_bad, e.id, e.id + ": outside scene bounds");
    }
    if (positional_preds[e.id] > 0 && !supported.count(e.id) &&
        std::abs(bottom_height(o, p)) > tol) {
      flag(pos_bad, e.id, e.id + ": not resting on the floor");
    }
    const Vec3 up_before = scene.at(e.id).initial_pose.orientation() * Vec3::UnitZ();
    const Vec3 up_after = p.orientation() * Vec3::UnitZ();
    if ((up_before - up_after).norm() > tol) {
      flag(orient_bad, e.id, e.id + ": tilted away from its initial up axis");
    }
    for (const auto& other : solved.objects) {
      if (other.id == e.id) continue;
      if (boxes_penetrate(o, p, other, other.initial_pose, tol)) {
        flag(pos_bad, e.id, e.id + ": penetrates " + other.id);
      }
    }
  }
  out.position_errors.assign(pos_bad.begin(), pos_bad.end());
  out.orientation_errors.assign(orient_bad.begin(), orient_bad.end());
  return out;
}

}  // namespace hoiplan

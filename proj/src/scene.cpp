#include "hoiplan/scene.hpp"

#include "hoiplan/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hoiplan {

using json_io::Cursor;
using json_io::Json;

namespace {

Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 read_vec3(const Cursor& c) {
  c.array_size(3);
  return {c.at(0).as_double(), c.at(1).as_double(), c.at(2).as_double()};
}

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace

const ObjectSpec* Scene::find(std::string_view id) const {
  for (const auto& o : objects) {
    if (o.id == id) {
      return &o;
    }
  }
  return nullptr;
}

const ObjectSpec& Scene::at(std::string_view id) const {
  if (const ObjectSpec* o = find(id)) {
    return *o;
  }
  throw Error(ErrorCode::UnknownObject, "unknown object '" + std::string(id) + "'",
              {{"id", std::string(id)}});
}

Json pose_to_json(const Pose& pose) {
  const Quat& q = pose.orientation();
  Json j = Json::object();
  j["pos"] = vec_json(pose.position());
  j["quat"] = Json::array({q.w(), q.x(), q.y(), q.z()});
  return j;
}

Pose pose_from_json(const Cursor& c) {
  Vec3 pos = read_vec3(c.at("pos"));
  Cursor qc = c.at("quat");
  qc.array_size(4);
  Quat q(qc.at(0).as_double(), qc.at(1).as_double(), qc.at(2).as_double(), qc.at(3).as_double());
  if (!(std::abs(q.norm() - 1.0) <= 1e-6)) {
    qc.fail("quaternion must be unit length within 1e-6");
  }
  return Pose::from_unit(pos, q);
}

Json scene_to_json(const Scene& scene) {
  Json j = Json::object();
  const Bounds& b = scene.bounds;
  j["bounds"] = Json::array({b.x0, b.y0, b.x1, b.y1});
  j["north"] = Json::array({scene.north.x(), scene.north.y()});
  Json objects = Json::array();
  for (const auto& o : scene.objects) {
    Json jo = Json::object();
    jo["id"] = o.id;
    jo["half_extents"] = vec_json(o.half_extents);
    jo["canonical_dir"] = vec_json(o.canonical_dir);
    jo["static"] = o.is_static;
    jo["pose"] = pose_to_json(o.initial_pose);
    if (o.points) {
      Json pts = Json::array();
      for (const Vec3& p : *o.points) {
        pts.push_back(vec_json(p));
      }
      jo["points"] = std::move(pts);
    }
    objects.push_back(std::move(jo));
  }
  j["objects"] = std::move(objects);
  return j;
}

Scene scene_from_json(const Json& j) {
  Cursor root(j, "");
  if (!j.is_object()) {
    root.fail("expected an object");
  }
  Scene scene;
  Cursor bc = root.at("bounds");
  bc.array_size(4);
  scene.bounds = {bc.at(0).as_double(), bc.at(1).as_double(), bc.at(2).as_double(),
                  bc.at(3).as_double()};
  if (!(scene.bounds.x0 < scene.bounds.x1) || !(scene.bounds.y0 < scene.bounds.y1)) {
    bc.fail("bounds must satisfy x0 < x1 and y0 < y1");
  }
  if (root.has("north")) {
    Cursor nc = root.at("north");
    nc.array_size(2);
    scene.north = {nc.at(0).as_double(), nc.at(1).as_double()};
    if (!(std::abs(scene.north.norm() - 1.0) <= 1e-6)) {
      nc.fail("north must be a unit vector");
    }
  }
  Cursor oc = root.at("objects");
  const std::size_t n = oc.array_size();
  std::set<std::string> seen;
  for (std::size_t i = 0; i < n; ++i) {
    Cursor c = oc.at(i);
    ObjectSpec o;
    o.id = c.at("id").as_string();
    if (o.id.empty()) {
      c.at("id").fail("object id must be non-empty");
    }
    if (!seen.insert(o.id).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate object id '" + o.id + "'",
                  {{"id", o.id}, {"path", c.path() + "/id"}});
    }
    o.half_extents = read_vec3(c.at("half_extents"));
    if (!(o.half_extents.minCoeff() > 0.0)) {
      c.at("half_extents").fail("half extents must be positive");
    }
    o.canonical_dir = read_vec3(c.at("canonical_dir"));
    if (!(std::abs(o.canonical_dir.norm() - 1.0) <= 1e-6)) {
      c.at("canonical_dir").fail("canonical direction must be unit length");
    }
    o.is_static = c.at("static").as_bool();
    Cursor pc = c.at("pose");
    o.initial_pose = pose_from_json(pc);
    const Vec3& p = o.initial_pose.position();
    if (!scene.bounds.contains(p.head<2>())) {
      pc.at("pos").fail("object position outside scene bounds");
    }
    if (c.has("points")) {
      Cursor ptc = c.at("points");
      const std::size_t m = ptc.array_size();
      std::vector<Vec3> pts;
      pts.reserve(m);
      for (std::size_t k = 0; k < m; ++k) {
        pts.push_back(read_vec3(ptc.at(k)));
      }
      o.points = std::move(pts);
    }
    scene.objects.push_back(std::move(o));
  }
  return scene;
}

Scene load_scene(const std::filesystem::path& path) {
  return scene_from_json(json_io::load(path));
}

void save_scene(const Scene& scene, const std::filesystem::path& path) {
  json_io::save(path, scene_to_json(scene));
}

Json motion_to_json(const MotionSequence& motion) {
  Json j = Json::object();
  j["fps"] = motion.fps;
  Json frames = Json::array();
  for (const auto& f : motion.frames) {
    Json jf = Json::object();
    Json joints = Json::array();
    for (const Vec3& p : f.joints) {
      joints.push_back(vec_json(p));
    }
    jf["joints"] = std::move(joints);
    Json rots = Json::array();
    for (const Rot6D& r : f.joint_rot6d) {
      rots.push_back(Json::array({r[0], r[1], r[2], r[3], r[4], r[5]}));
    }
    jf["joint_rot6d"] = std::move(rots);
    jf["object"] = pose_to_json(f.object);
    jf["contact"] = Json::array({f.contact[0], f.contact[1]});
    frames.push_back(std::move(jf));
  }
  j["frames"] = std::move(frames);
  return j;
}

MotionSequence motion_from_json(const Json& j) {
  Cursor root(j, "");
  if (!j.is_object()) {
    root.fail("expected an object");
  }
  MotionSequence m;
  Cursor fc = root.at("fps");
  long long fps = fc.as_int();
  if (fps <= 0 || fps > 100000) {
    fc.fail("fps must be a positive integer");
  }
  m.fps = static_cast<int>(fps);
  Cursor frames = root.at("frames");
  const std::size_t n = frames.array_size();
  std::size_t joint_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    Cursor c = frames.at(t);
    MotionFrame f;
    Cursor jc = c.at("joints");
    const std::size_t jn = jc.array_size();
    if (t == 0) {
      joint_count = jn;
    } else if (jn != joint_count) {
      jc.fail("joint count differs from frame 0");
    }
    for (std::size_t k = 0; k < jn; ++k) {
      f.joints.push_back(read_vec3(jc.at(k)));
    }
    Cursor rc = c.at("joint_rot6d");
    rc.array_size(jn);
    for (std::size_t k = 0; k < jn; ++k) {
      Cursor r = rc.at(k);
      r.array_size(6);
      Rot6D v;
      for (std::size_t e = 0; e < 6; ++e) {
        v[e] = r.at(e).as_double();
      }
      f.joint_rot6d.push_back(v);
    }
    f.object = pose_from_json(c.at("object"));
    Cursor lc = c.at("contact");
    lc.array_size(2);
    for (std::size_t h = 0; h < 2; ++h) {
      double l = lc.at(h).as_double();
      if (!(l >= 0.0 && l <= 1.0)) {
        lc.at(h).fail("contact label must lie in [0, 1]");
      }
      f.contact[h] = l;
    }
    m.frames.push_back(std::move(f));
  }
  return m;
}

MotionSequence load_motion(const std::filesystem::path& path) {
  return motion_from_json(json_io::load(path));
}

void save_motion(const MotionSequence& motion, const std::filesystem::path& path) {
  json_io::save(path, motion_to_json(motion));
}

std::array<Vec3, 8> box_corners(const ObjectSpec& o, const Pose& pose) {
  std::array<Vec3, 8> out;
  const Vec3& h = o.half_extents;
  for (int i = 0; i < 8; ++i) {
    Vec3 local((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(), (i & 4) ? h.z() : -h.z());
    out[static_cast<std::size_t>(i)] = pose.transform_point(local);
  }
  return out;
}

double top_surface_height(const ObjectSpec& o, const Pose& pose) {
  double top = -std::numeric_limits<double>::infinity();
  for (const Vec3& c : box_corners(o, pose)) {
    top = std::max(top, c.z());
  }
  return top;
}

double bottom_height(const ObjectSpec& o, const Pose& pose) {
  double bottom = std::numeric_limits<double>::infinity();
  for (const Vec3& c : box_corners(o, pose)) {
    bottom = std::min(bottom, c.z());
  }
  return bottom;
}

Polygon footprint(const ObjectSpec& o, const Pose& pose) {
  std::vector<Vec2> pts;
  pts.reserve(8);
  for (const Vec3& c : box_corners(o, pose)) {
    pts.emplace_back(c.x(), c.y());
  }
  return convex_hull(std::move(pts));
}

// Andrew's monotone chain; collinear points are dropped.
Polygon convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) {
    return pts;
  }
  // Near-coincident corners (e.g. the top and bottom faces of an upright box)
  // collapse to within rounding of each other; treat them as one point.
  constexpr double kEps = 1e-12;
  Polygon hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t pass = 0; pass < 2; ++pass) {
    const std::size_t start = k;
    for (std::size_t idx = 0; idx < pts.size(); ++idx) {
      const Vec2& p = pass == 0 ? pts[idx] : pts[pts.size() - 1 - idx];
      while (k >= start + 2 && cross2(hull[k - 1] - hull[k - 2], p - hull[k - 2]) <= kEps) {
        --k;
      }
      hull[k++] = p;
    }
    --k;
  }
  hull.resize(k);
  Polygon cleaned;
  for (const Vec2& p : hull) {
    if (cleaned.empty() || (p - cleaned.back()).norm() > 1e-9) {
      cleaned.push_back(p);
    }
  }
  if (cleaned.size() > 1 && (cleaned.front() - cleaned.back()).norm() <= 1e-9) {
    cleaned.pop_back();
  }
  return cleaned;
}

double polygon_area(const Polygon& poly) {
  double a = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    a += cross2(poly[i], poly[(i + 1) % poly.size()]);
  }
  return 0.5 * a;
}

bool polygon_contains(const Polygon& poly, const Vec2& p, double tol) {
  if (poly.size() < 3) {
    return false;
  }
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    const Vec2 e = b - a;
    const double len = e.norm();
    if (len == 0.0) continue;
    // Signed distance to the left of edge a->b.
    if (cross2(e, p - a) / len < -tol) {
      return false;
    }
  }
  return true;
}

bool polygon_contains(const Polygon& outer, const Polygon& inner, double tol) {
  for (const Vec2& p : inner) {
    if (!polygon_contains(outer, p, tol)) {
      return false;
    }
  }
  return true;
}

double point_polygon_distance(const Vec2& p, const Polygon& poly) {
  if (polygon_contains(poly, p)) {
    return 0.0;
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[(i + 1) % poly.size()];
    const Vec2 e = b - a;
    const double l2 = e.squaredNorm();
    double t = l2 > 0.0 ? std::clamp((p - a).dot(e) / l2, 0.0, 1.0) : 0.0;
    best = std::min(best, (a + t * e - p).norm());
  }
  return best;
}

}  // namespace hoiplan

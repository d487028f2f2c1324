#include "hoiplan/render.hpp"

#include <algorithm>
#include <cstdio>

namespace hoiplan {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s(buf);
  if (s == "-0.000") s = "0.000";
  return s;
}

std::string escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(const Scene& scene, const SceneMap* map, std::span<const PlanEntry> routes,
                       const SvgOptions& options) {
  const double k = options.pixels_per_meter;
  const Bounds& b = scene.bounds;
  const double width = (b.x1 - b.x0) * k;
  const double height = (b.y1 - b.y0) * k;
  auto px = [&](const Vec2& p) { return Vec2((p.x() - b.x0) * k, (b.y1 - p.y()) * k); };
  auto pt = [&](const Vec2& p) {
    const Vec2 q = px(p);
    return num(q.x()) + "," + num(q.y());
  };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
       num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
  s += "  <rect class=\"bounds\" x=\"0.000\" y=\"0.000\" width=\"" + num(width) + "\" height=\"" +
       num(height) + "\" fill=\"none\" stroke=\"#000000\"/>\n";

  for (const auto& o : scene.objects) {
    Pose pose = o.initial_pose;
    if (map) {
      if (const SceneMapEntry* e = map->find(o.id)) pose = e->pose();
    }
    const Polygon fp = footprint(o, pose);
    std::string points;
    for (const Vec2& p : fp) {
      if (!points.empty()) points += ' ';
      points += pt(p);
    }
    const char* cls = o.is_static ? "object static" : "object movable";
    const char* fill = o.is_static ? "#c8c8c8" : "#9ecae1";
    s += "  <polygon class=\"" + std::string(cls) + "\" data-id=\"" + escape(o.id) +
         "\" points=\"" + points + "\" fill=\"" + fill + "\" stroke=\"#333333\"/>\n";

    const Vec2 center = pose.position().head<2>();
    const Vec2 dir = (pose.orientation() * o.canonical_dir).head<2>();
    if (dir.norm() > 1e-9) {
      const double len = std::max(o.half_extents.x(), o.half_extents.y());
      const Vec2 tip = center + len * dir.normalized();
      const Vec2 a = px(center);
      const Vec2 t = px(tip);
      s += "  <line class=\"heading\" data-id=\"" + escape(o.id) + "\" x1=\"" + num(a.x()) +
           "\" y1=\"" + num(a.y()) + "\" x2=\"" + num(t.x()) + "\" y2=\"" + num(t.y()) +
           "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
    }
    const Vec2 c = px(center);
    s += "  <text class=\"label\" x=\"" + num(c.x()) + "\" y=\"" + num(c.y()) +
         "\" font-size=\"12\" text-anchor=\"middle\">" + escape(o.id) + "</text>\n";
  }

  for (const auto& r : routes) {
    if (r.route.empty()) continue;
    std::string points;
    for (const Vec2& p : r.route) {
      if (!points.empty()) points += ' ';
      points += pt(p);
    }
    s += "  <polyline class=\"route\" data-object=\"" + escape(r.object) + "\" points=\"" +
         points + "\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"2\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace hoiplan

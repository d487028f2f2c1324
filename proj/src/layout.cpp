#include "hoiplan/layout.hpp"

#include "hoiplan/error.hpp"
#include "hoiplan/random.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace hoiplan {

using json_io::Cursor;
using json_io::Json;

namespace {

int kind_rank(const SpatialRelation& r) { return static_cast<int>(r.index()); }

bool edge_less(const GraphEdge& a, const GraphEdge& b) {
  if (a.to != b.to) return a.to < b.to;
  if (a.from != b.from) return a.from < b.from;
  if (kind_rank(a.relation) != kind_rank(b.relation)) {
    return kind_rank(a.relation) < kind_rank(b.relation);
  }
  const auto* aa = std::get_if<AdjacentRelation>(&a.relation);
  const auto* ab = std::get_if<AdjacentRelation>(&b.relation);
  if (aa && ab) {
    if (aa->direction != ab->direction) return aa->direction < ab->direction;
    return aa->distance < ab->distance;
  }
  return false;
}

bool edge_equal(const GraphEdge& a, const GraphEdge& b) {
  return a.to == b.to && a.from == b.from && a.relation == b.relation;
}

// Depth-first search for a cycle in `adj`; returns the path with the first
// node repeated at the end, or an empty vector.
std::vector<std::string> find_cycle(const std::map<std::string, std::vector<std::string>>& adj) {
  enum class Mark { None, Active, Done };
  std::map<std::string, Mark> mark;
  std::vector<std::string> stack;
  std::vector<std::string> cycle;

  auto dfs = [&](auto&& self, const std::string& v) -> bool {
    mark[v] = Mark::Active;
    stack.push_back(v);
    auto it = adj.find(v);
    if (it != adj.end()) {
      for (const auto& w : it->second) {
        Mark m = mark.count(w) ? mark[w] : Mark::None;
        if (m == Mark::Active) {
          auto pos = std::find(stack.begin(), stack.end(), w);
          cycle.assign(pos, stack.end());
          cycle.push_back(w);
          return true;
        }
        if (m == Mark::None && self(self, w)) return true;
      }
    }
    stack.pop_back();
    mark[v] = Mark::Done;
    return false;
  };
  for (const auto& [v, _] : adj) {
    if ((mark.count(v) ? mark[v] : Mark::None) == Mark::None && dfs(dfs, v)) {
      return cycle;
    }
  }
  return {};
}

[[noreturn]] void throw_cycle(const std::vector<std::string>& cycle) {
  std::string path;
  for (const auto& id : cycle) {
    if (!path.empty()) path += " -> ";
    path += id;
  }
  throw Error(ErrorCode::CycleDetected, "relations form a cycle: " + path, {{"cycle", cycle}});
}

/// Facing constraints keyed by subject, validated.
std::map<std::string, std::string> facing_targets(const Scene& scene,
                                                  std::span<const FacingRelation> facing) {
  std::map<std::string, std::string> out;
  for (const auto& f : facing) {
    const ObjectSpec& o = scene.at(f.object);
    scene.at(f.target);
    if (o.is_static) {
      throw Error(ErrorCode::StaticTarget, "cannot reorient static object '" + f.object + "'",
                  {{"id", f.object}});
    }
    auto [it, inserted] = out.emplace(f.object, f.target);
    if (!inserted && it->second != f.target) {
      throw Error(ErrorCode::ConflictingFacing,
                  "'" + f.object + "' must face both '" + it->second + "' and '" + f.target + "'",
                  {{"id", f.object}, {"targets", {it->second, f.target}}});
    }
  }
  return out;
}

Quat facing_rotation(const ObjectSpec& o, const Quat& initial, const Vec3& from, const Vec3& to) {
  const Vec3 c = initial * o.canonical_dir;
  const Vec2 cxy = c.head<2>();
  if (cxy.norm() < 1e-6) {
    throw Error(ErrorCode::DegenerateCanonical,
                "canonical direction of '" + o.id + "' has no horizontal component",
                {{"id", o.id}});
  }
  const Vec2 t = (to - from).head<2>();
  if (t.norm() <= 1e-6) {
    throw Error(ErrorCode::CoincidentPositions,
                "'" + o.id + "' and its facing target coincide in XY", {{"id", o.id}});
  }
  const double angle = std::atan2(cxy.x() * t.y() - cxy.y() * t.x(), cxy.dot(t));
  return (yaw_rotation(angle) * initial).normalized();
}

/// Height of the box center above its lowest corner (yaw-invariant).
double rest_height(const ObjectSpec& o, const Quat& q) {
  return -bottom_height(o, Pose::from_unit(Vec3::Zero(), q));
}

/// Radius of the smallest origin-centered disc holding the XY footprint.
double footprint_radius(const ObjectSpec& o, const Quat& q) {
  double r = 0.0;
  for (const Vec3& c : box_corners(o, Pose::from_unit(Vec3::Zero(), q))) {
    r = std::max(r, c.head<2>().norm());
  }
  return r;
}

struct Disc {
  Vec2 center;
  double radius;
};

class Resolver {
 public:
  Resolver(const SceneGraph& graph, const Scene& scene, std::uint64_t seed,
           const SolverConfig& config, const std::map<std::string, std::string>* facing)
      : graph_(graph), scene_(scene), config_(config), facing_(facing), rng_(seed) {
    for (const auto& o : scene.objects) {
      positions_[o.id] = o.initial_pose.position();
      orientations_[o.id] = o.initial_pose.orientation();
    }
  }

  void run() {
    std::set<std::string> pos_done(graph_.static_set);
    std::set<std::string> orient_done(graph_.static_set);
    std::set<std::string> pos_pending(graph_.movable_set);
    std::set<std::string> orient_pending(graph_.movable_set);

    while (!pos_pending.empty() || !orient_pending.empty()) {
      std::vector<std::string> ready;
      for (const auto& v : pos_pending) {
        bool ok = true;
        for (const GraphEdge* e : graph_.predecessors(v)) {
          const bool is_on = std::holds_alternative<OnRelation>(e->relation);
          if (!pos_done.count(e->from) || (is_on && !orient_done.count(e->from))) {
            ok = false;
            break;
          }
        }
        if (ok) ready.push_back(v);
      }
      for (const auto& v : ready) {
        place(v);
        pos_done.insert(v);
        pos_pending.erase(v);
        diagnostics.order.push_back(v);
      }
      if (!ready.empty()) diagnostics.rounds.push_back(ready);

      std::vector<std::string> oriented;
      for (const auto& v : orient_pending) {
        if (!pos_done.count(v)) continue;
        std::optional<std::string> target;
        if (facing_) {
          if (auto it = facing_->find(v); it != facing_->end()) target = it->second;
        }
        if (target && !pos_done.count(*target)) continue;
        if (target) {
          orientations_[v] = facing_rotation(scene_.at(v), scene_.at(v).initial_pose.orientation(),
                                             positions_.at(v), positions_.at(*target));
        }
        oriented.push_back(v);
      }
      for (const auto& v : oriented) {
        orient_done.insert(v);
        orient_pending.erase(v);
      }
      if (ready.empty() && oriented.empty()) {
        std::vector<std::string> remaining(pos_pending.begin(), pos_pending.end());
        throw Error(ErrorCode::Unsolvable, "no object can be resolved",
                    {{"remaining", remaining}});
      }
    }
  }

  std::map<std::string, Vec3> positions() const { return positions_; }
  std::map<std::string, Quat> orientations() const { return orientations_; }

  LayoutDiagnostics diagnostics;

 private:
  void place(const std::string& v) {
    const auto preds = graph_.predecessors(v);
    if (preds.empty()) {
      return;
    }
    const ObjectSpec& obj = scene_.at(v);
    const Quat q = scene_.at(v).initial_pose.orientation();
    const double lift = rest_height(obj, q);
    const double radius = footprint_radius(obj, q);

    std::vector<Vec3> suggestions;
    std::optional<double> on_z;
    std::vector<std::string> supports;
    for (const GraphEdge* e : preds) {
      const Pose support(positions_.at(e->from), orientations_.at(e->from));
      if (std::holds_alternative<OnRelation>(e->relation)) {
        const double z = top_surface_height(scene_.at(e->from), support) + lift;
        const Vec2 xy = sample_on(v, e->from, support, radius);
        suggestions.emplace_back(xy.x(), xy.y(), z);
        on_z = on_z ? std::max(*on_z, z) : z;
        supports.push_back(e->from);
      } else {
        const auto& adj = std::get<AdjacentRelation>(e->relation);
        const Vec2 xy =
            support.position().head<2>() + adj.distance * compass_vector(adj.direction, scene_.north);
        suggestions.emplace_back(xy.x(), xy.y(), lift);
      }
    }
    Vec3 mean = Vec3::Zero();
    for (const Vec3& s : suggestions) mean += s;
    mean /= static_cast<double>(suggestions.size());
    if (on_z) mean.z() = *on_z;

    if (suggestions.size() > 1) {
      double residual = 0.0;
      for (const Vec3& s : suggestions) {
        residual = std::max(residual, (s.head<2>() - mean.head<2>()).norm());
      }
      diagnostics.residuals[v] = residual;
    }
    for (const auto& s : supports) {
      occupants_[s].push_back({mean.head<2>(), radius});
    }
    if (!scene_.bounds.contains(mean.head<2>(), 1e-9)) {
      throw Error(ErrorCode::OutOfBounds, "'" + v + "' would be placed outside the scene bounds",
                  {{"id", v}, {"pos", {mean.x(), mean.y(), mean.z()}}});
    }
    positions_[v] = mean;
  }

  Vec2 sample_on(const std::string& v, const std::string& u, const Pose& support, double radius) {
    const Vec3& h = scene_.at(u).half_extents;
    const double ax = h.x() - radius;
    const double ay = h.y() - radius;
    const Vec2 center = support.position().head<2>();
    if (ax < 0.0 || ay < 0.0) {
      diagnostics.warnings.push_back(
          {v, "SupportTooSmall", "'" + v + "' is wider than the top of '" + u + "'"});
      return center;
    }
    const auto& siblings = occupants_[u];
    for (int attempt = 0; attempt < config_.max_placement_tries; ++attempt) {
      const double lx = rng_.uniform(-ax, ax);
      const double ly = rng_.uniform(-ay, ay);
      const Vec2 p = support.transform_point(Vec3(lx, ly, 0.0)).head<2>();
      bool clear = true;
      for (const Disc& d : siblings) {
        if ((d.center - p).norm() < d.radius + radius) {
          clear = false;
          break;
        }
      }
      if (clear) return p;
    }
    diagnostics.warnings.push_back({v, "PlacementCongestion",
                                    "no free spot for '" + v + "' on '" + u + "' after " +
                                        std::to_string(config_.max_placement_tries) +
                                        " tries; using the support center"});
    return center;
  }

  const SceneGraph& graph_;
  const Scene& scene_;
  SolverConfig config_;
  const std::map<std::string, std::string>* facing_;
  Rng rng_;
  std::map<std::string, Vec3> positions_;
  std::map<std::string, Quat> orientations_;
  std::map<std::string, std::vector<Disc>> occupants_;
};

}  // namespace

std::vector<const GraphEdge*> SceneGraph::predecessors(const std::string& id) const {
  std::vector<const GraphEdge*> out;
  auto it = std::lower_bound(edges.begin(), edges.end(), id,
                             [](const GraphEdge& e, const std::string& key) { return e.to < key; });
  for (; it != edges.end() && it->to == id; ++it) {
    out.push_back(&*it);
  }
  return out;
}

SceneGraph build_graph(const Scene& scene, std::span<const SpatialRelation> relations) {
  SceneGraph g;
  for (const auto& o : scene.objects) {
    g.nodes.push_back(o.id);
    (o.is_static ? g.static_set : g.movable_set).insert(o.id);
  }
  std::sort(g.nodes.begin(), g.nodes.end());

  for (const auto& r : relations) {
    const std::string& a = subject(r);
    const std::string& b = reference(r);
    const ObjectSpec& oa = scene.at(a);
    scene.at(b);
    if (oa.is_static) {
      throw Error(ErrorCode::StaticTarget, "relation would move static object '" + a + "'",
                  {{"id", a}, {"relation", render_relation(r)}});
    }
    if (const auto* f = std::get_if<FacingRelation>(&r)) {
      g.facing.push_back(*f);
    } else {
      g.edges.push_back({b, a, r});
    }
  }
  std::sort(g.edges.begin(), g.edges.end(), edge_less);
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end(), edge_equal), g.edges.end());
  std::sort(g.facing.begin(), g.facing.end(), [](const FacingRelation& x, const FacingRelation& y) {
    return std::tie(x.object, x.target) < std::tie(y.object, y.target);
  });
  g.facing.erase(std::unique(g.facing.begin(), g.facing.end()), g.facing.end());

  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& id : g.nodes) adj[id];
  for (const auto& e : g.edges) adj[e.from].push_back(e.to);
  if (auto cycle = find_cycle(adj); !cycle.empty()) {
    throw_cycle(cycle);
  }
  return g;
}

PositionResult compute_positions(const SceneGraph& graph, const Scene& scene, std::uint64_t seed,
                                 const SolverConfig& config) {
  Resolver r(graph, scene, seed, config, nullptr);
  r.run();
  return {r.positions(), std::move(r.diagnostics)};
}

std::map<std::string, Quat> compute_orientations(const Scene& scene,
                                                 const std::map<std::string, Vec3>& positions,
                                                 std::span<const FacingRelation> facing) {
  const auto targets = facing_targets(scene, facing);
  std::map<std::string, Quat> out;
  for (const auto& o : scene.objects) {
    out[o.id] = o.initial_pose.orientation();
  }
  auto position_of = [&](const std::string& id) {
    auto it = positions.find(id);
    return it != positions.end() ? it->second : scene.at(id).initial_pose.position();
  };
  for (const auto& [id, target] : targets) {
    const ObjectSpec& o = scene.at(id);
    out[id] = facing_rotation(o, o.initial_pose.orientation(), position_of(id), position_of(target));
  }
  return out;
}

LayoutResult solve(const Scene& scene, std::span<const SpatialRelation> relations,
                   std::uint64_t seed, const SolverConfig& config) {
  const SceneGraph graph = build_graph(scene, relations);
  const auto targets = facing_targets(scene, graph.facing);

  // An object on a facing support waits for the support's facing target.
  std::map<std::string, std::vector<std::string>> deps;
  for (const auto& id : graph.nodes) deps[id];
  for (const auto& e : graph.edges) {
    deps[e.from].push_back(e.to);
    if (std::holds_alternative<OnRelation>(e.relation)) {
      if (auto it = targets.find(e.from); it != targets.end()) {
        deps[it->second].push_back(e.to);
      }
    }
  }
  if (auto cycle = find_cycle(deps); !cycle.empty()) {
    throw_cycle(cycle);
  }

  Resolver r(graph, scene, seed, config, &targets);
  r.run();
  const auto positions = r.positions();
  const auto orientations = r.orientations();

  LayoutResult result;
  for (const auto& id : graph.movable_set) {
    result.map.entries.push_back({id, positions.at(id), orientations.at(id)});
  }
  result.diagnostics = std::move(r.diagnostics);
  return result;
}

const SceneMapEntry* SceneMap::find(std::string_view id) const {
  for (const auto& e : entries) {
    if (e.id == id) return &e;
  }
  return nullptr;
}

Scene apply_scene_map(const Scene& scene, const SceneMap& map) {
  Scene out = scene;
  for (auto& o : out.objects) {
    if (const SceneMapEntry* e = map.find(o.id)) {
      o.initial_pose = e->pose();
    }
  }
  return out;
}

Json scene_map_to_json(const SceneMap& map) {
  Json entries = Json::array();
  for (const auto& e : map.entries) {
    Json j = Json::object();
    j["id"] = e.id;
    j["pos"] = Json::array({e.position.x(), e.position.y(), e.position.z()});
    j["quat"] = Json::array({e.orientation.w(), e.orientation.x(), e.orientation.y(),
                             e.orientation.z()});
    entries.push_back(std::move(j));
  }
  Json root = Json::object();
  root["entries"] = std::move(entries);
  return root;
}

SceneMap scene_map_from_json(const Json& j) {
  Cursor root(j, "");
  Cursor ec = root.at("entries");
  SceneMap map;
  std::set<std::string> seen;
  for (std::size_t i = 0, n = ec.array_size(); i < n; ++i) {
    Cursor c = ec.at(i);
    SceneMapEntry e;
    e.id = c.at("id").as_string();
    if (!seen.insert(e.id).second) {
      throw Error(ErrorCode::DuplicateId, "duplicate scene-map id '" + e.id + "'",
                  {{"id", e.id}, {"path", c.path() + "/id"}});
    }
    // Same shape as a scene pose.
    Pose p = pose_from_json(c);
    e.position = p.position();
    e.orientation = p.orientation();
    map.entries.push_back(std::move(e));
  }
  return map;
}

void save_scene_map(const SceneMap& map, const std::filesystem::path& path) {
  json_io::save(path, scene_map_to_json(map));
}

SceneMap load_scene_map(const std::filesystem::path& path) {
  return scene_map_from_json(json_io::load(path));
}

Json diagnostics_to_json(const LayoutDiagnostics& d) {
  Json j = Json::object();
  j["order"] = d.order;
  j["rounds"] = d.rounds;
  Json residuals = Json::object();
  for (const auto& [id, r] : d.residuals) residuals[id] = r;
  j["residuals"] = std::move(residuals);
  Json warnings = Json::array();
  for (const auto& w : d.warnings) {
    warnings.push_back({{"id", w.id}, {"kind", w.kind}, {"message", w.message}});
  }
  j["warnings"] = std::move(warnings);
  return j;
}

}  // namespace hoiplan

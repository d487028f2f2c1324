#include "hoiplan/task_planner.hpp"

#include "hoiplan/error.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>

namespace hoiplan {

namespace {

using json_io::Cursor;
using json_io::Json;

void set_pose(Scene& scene, const std::string& id, const Pose& pose) {
  for (auto& o : scene.objects) {
    if (o.id == id) o.initial_pose = pose;
  }
}

Cell nearest_free(const OccupancyGrid& grid, const Vec2& p) {
  std::optional<Cell> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      const Cell c{x, y};
      if (grid.occupied(c)) continue;
      const double d = (grid.center(c) - p).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
  }
  if (!best) {
    throw Error(ErrorCode::StartOccupied, "no free cell for the agent to start in");
  }
  return *best;
}

PlannedLeg plan_leg(OccupancyGrid grid, Cell start, Polygon target, const OccupancyGrid* blocked,
                    const PlannerConfig& config, const std::string& object) {
  if (grid.occupied(start)) {
    throw Error(ErrorCode::StartOccupied, "agent cell is occupied",
                {{"cell", {start.x, start.y}}, {"object", object}});
  }
  const auto costs = flood_costs(grid, start, Connectivity::Eight);
  std::optional<Cell> goal;
  std::optional<PathCost> goal_cost;
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      const Cell c{x, y};
      const auto& cost = costs[static_cast<std::size_t>(y) * grid.width() + x];
      if (!cost) continue;
      if (blocked && blocked->occupied(c)) continue;
      if (point_polygon_distance(grid.center(c), target) > config.reach) continue;
      if (!goal || *cost < *goal_cost || (*cost == *goal_cost && c < *goal)) {
        goal = c;
        goal_cost = *cost;
      }
    }
  }
  if (!goal) {
    throw Error(ErrorCode::NoPath, "no reachable cell within reach of '" + object + "'",
                {{"object", object}, {"start", {start.x, start.y}}});
  }
  PlannedLeg leg;
  leg.target = std::move(target);
  if (*goal != start) {
    Route r = astar(grid, start, *goal, {Connectivity::Eight, config.stride});
    leg.cells = std::move(r.cells);
    leg.waypoints = std::move(r.waypoints);
  }
  leg.grid = std::move(grid);
  return leg;
}

}  // namespace

std::vector<SpatialRelation> infer_support_relations(const Scene& scene, double tol) {
  std::vector<const ObjectSpec*> sorted;
  for (const auto& o : scene.objects) sorted.push_back(&o);
  std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->id < b->id; });
  std::vector<SpatialRelation> out;
  for (const ObjectSpec* a : sorted) {
    if (a->is_static) continue;
    const double bottom = bottom_height(*a, a->initial_pose);
    if (std::abs(bottom) <= tol) continue;
    const Vec2 center = a->initial_pose.position().head<2>();
    for (const ObjectSpec* b : sorted) {
      if (b == a) continue;
      if (std::abs(top_surface_height(*b, b->initial_pose) - bottom) > tol) continue;
      if (!polygon_contains(footprint(*b, b->initial_pose), center, tol)) continue;
      out.emplace_back(OnRelation{a->id, b->id});
      break;
    }
  }
  return out;
}

OrderResult dependency_order(const Scene& scene, std::span<const SpatialRelation> current,
                             std::span<const ActionStep> proposed,
                             std::span<const SpatialRelation> target) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < proposed.size(); ++i) {
    const std::string& id = proposed[i].object_id;
    const ObjectSpec* o = scene.find(id);
    if (!o) {
      throw Error(ErrorCode::UnknownObject, "plan step names unknown object '" + id + "'",
                  {{"id", id}, {"step", i}});
    }
    if (o->is_static) {
      throw Error(ErrorCode::StaticTarget, "plan step moves static object '" + id + "'",
                  {{"id", id}, {"step", i}});
    }
    if (!index.emplace(id, i).second) {
      throw Error(ErrorCode::DuplicateStep, "object '" + id + "' appears in more than one step",
                  {{"id", id}});
    }
  }
  std::vector<std::string> movable;
  for (const auto& o : scene.objects) {
    if (!o.is_static) movable.push_back(o.id);
  }
  std::sort(movable.begin(), movable.end());
  for (const auto& id : movable) {
    if (!index.count(id)) {
      throw Error(ErrorCode::MissingStep, "no plan step for movable object '" + id + "'",
                  {{"id", id}});
    }
  }

  // Precedence edges over proposal indices.
  std::set<std::pair<std::size_t, std::size_t>> edges;
  auto add = [&](const std::string& before, const std::string& after) {
    auto b = index.find(before);
    auto a = index.find(after);
    if (b == index.end() || a == index.end() || b->second == a->second) return;
    edges.emplace(b->second, a->second);
  };
  for (const auto& r : current) {
    if (const auto* on = std::get_if<OnRelation>(&r)) add(on->object, on->base);
  }
  for (const auto& r : target) {
    if (const auto* on = std::get_if<OnRelation>(&r)) add(on->base, on->object);
  }

  OrderResult out;
  for (const auto& [b, a] : edges) {
    if (b > a) out.violations.emplace_back(proposed[b].object_id, proposed[a].object_id);
  }

  // Walk the proposal in order; each step first pulls in its unfinished
  // prerequisites, earliest proposed first.
  const std::size_t n = proposed.size();
  std::vector<std::vector<std::size_t>> pred(n);
  for (const auto& [b, a] : edges) pred[a].push_back(b);
  enum class Mark { None, Active, Done };
  std::vector<Mark> mark(n, Mark::None);
  std::vector<std::size_t> order;
  std::vector<std::size_t> stack;
  auto visit = [&](auto&& self, std::size_t i) -> void {
    if (mark[i] == Mark::Done) return;
    if (mark[i] == Mark::Active) {
      Json cycle = Json::array();
      auto it = std::find(stack.begin(), stack.end(), i);
      for (; it != stack.end(); ++it) cycle.push_back(proposed[*it].object_id);
      cycle.push_back(proposed[i].object_id);
      throw Error(ErrorCode::CycleDetected, "step ordering constraints form a cycle",
                  {{"cycle", cycle}});
    }
    mark[i] = Mark::Active;
    stack.push_back(i);
    for (std::size_t p : pred[i]) self(self, p);
    stack.pop_back();
    mark[i] = Mark::Done;
    order.push_back(i);
  };
  for (std::size_t i = 0; i < n; ++i) visit(visit, i);
  for (std::size_t k = 0; k < n; ++k) {
    out.steps.push_back(proposed[order[k]]);
    if (order[k] != k) out.corrections.push_back({proposed[order[k]].object_id, order[k], k});
  }
  return out;
}

std::vector<ActionStep> resolve_steps(const Scene& scene, std::span<const ActionStep> steps) {
  std::vector<ActionStep> out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::string& name = steps[i].object_id;
    const ObjectSpec* match = scene.find(name);
    if (!match) {
      const std::string lower = to_lower_ascii(name);
      for (const auto& o : scene.objects) {
        if (to_lower_ascii(o.id) == lower) {
          match = &o;
          break;
        }
      }
    }
    if (!match) {
      throw Error(ErrorCode::UnknownObject, "plan step names unknown object '" + name + "'",
                  {{"id", name}, {"step", i}});
    }
    out.push_back({match->id, action_text(match->id)});
  }
  return out;
}

std::vector<Vec2> PlannedStep::route() const {
  std::vector<Vec2> out = approach.waypoints;
  for (const Vec2& p : carry.waypoints) {
    if (!out.empty() && out.back() == p) continue;
    out.push_back(p);
  }
  return out;
}

ExecutionPlan plan_routes(const Scene& scene, const SceneMap& map,
                          std::span<const ActionStep> steps, const PlannerConfig& config) {
  Scene current = scene;
  ExecutionPlan plan;
  Cell agent;
  {
    const OccupancyGrid g0 = rasterize(current, {}, config.resolution, config.agent_radius);
    if (config.agent_start) {
      auto c = g0.cell_at(*config.agent_start);
      if (!c || g0.occupied(*c)) {
        throw Error(ErrorCode::StartOccupied, "agent start is occupied or outside the scene",
                    {{"point", {config.agent_start->x(), config.agent_start->y()}}});
      }
      agent = *c;
    } else {
      agent = nearest_free(g0, scene.bounds.center());
    }
    plan.agent_start = g0.center(agent);
  }

  for (const ActionStep& step : steps) {
    const ObjectSpec& obj = current.at(step.object_id);
    PlannedStep ps;
    ps.step = step;

    ps.approach = plan_leg(rasterize(current, {}, config.resolution, config.agent_radius), agent,
                           footprint(obj, obj.initial_pose), nullptr, config, obj.id);
    if (!ps.approach.cells.empty()) agent = ps.approach.cells.back();

    const SceneMapEntry* entry = map.find(obj.id);
    const Pose goal_pose = entry ? entry->pose() : obj.initial_pose;
    Scene placed{{obj}, current.bounds, current.north};
    placed.objects.front().initial_pose = goal_pose;
    const OccupancyGrid blocked = rasterize(placed, {}, config.resolution, config.agent_radius);
    ps.carry = plan_leg(rasterize(current, {obj.id}, config.resolution, config.agent_radius), agent,
                        footprint(obj, goal_pose), &blocked, config, obj.id);
    if (!ps.carry.cells.empty()) agent = ps.carry.cells.back();

    set_pose(current, obj.id, goal_pose);
    plan.steps.push_back(std::move(ps));
  }
  return plan;
}

std::vector<PlanEntry> plan_entries(const ExecutionPlan& plan) {
  std::vector<PlanEntry> out;
  for (const auto& s : plan.steps) out.push_back({s.step.object_id, s.step.text, s.route()});
  return out;
}

Json plan_to_json(std::span<const PlanEntry> entries) {
  Json steps = Json::array();
  for (const auto& e : entries) {
    Json route = Json::array();
    for (const Vec2& p : e.route) route.push_back(Json::array({p.x(), p.y()}));
    Json s = Json::object();
    s["object"] = e.object;
    s["text"] = e.text;
    s["route"] = std::move(route);
    steps.push_back(std::move(s));
  }
  Json j = Json::object();
  j["steps"] = std::move(steps);
  return j;
}

std::vector<PlanEntry> plan_from_json(const Json& j) {
  Cursor root(j, "");
  Cursor sc = root.at("steps");
  std::vector<PlanEntry> out;
  for (std::size_t i = 0, n = sc.array_size(); i < n; ++i) {
    Cursor c = sc.at(i);
    PlanEntry e;
    e.object = c.at("object").as_string();
    e.text = c.at("text").as_string();
    Cursor rc = c.at("route");
    for (std::size_t k = 0, m = rc.array_size(); k < m; ++k) {
      Cursor p = rc.at(k);
      p.array_size(2);
      e.route.emplace_back(p.at(std::size_t{0}).as_double(), p.at(std::size_t{1}).as_double());
    }
    out.push_back(std::move(e));
  }
  return out;
}

void save_plan(std::span<const PlanEntry> entries, const std::filesystem::path& path) {
  json_io::save(path, plan_to_json(entries));
}

std::vector<PlanEntry> load_plan(const std::filesystem::path& path) {
  return plan_from_json(json_io::load(path));
}

}  // namespace hoiplan

#include "../support/generators.hpp"
#include "../support/oracles.hpp"
#include "hoiplan/json_io.hpp"
#include "hoiplan/task_planner.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>

using namespace hoiplan;

namespace {

ObjectSpec box(const std::string& id, Vec3 half, Vec3 pos, bool is_static = false) {
  ObjectSpec o;
  o.id = id;
  o.half_extents = half;
  o.is_static = is_static;
  o.initial_pose = Pose(pos, Quat::Identity());
  return o;
}

std::vector<ActionStep> steps_of(const std::vector<std::string>& ids) {
  std::vector<ActionStep> out;
  for (const auto& id : ids) out.push_back({id, action_text(id)});
  return out;
}

std::vector<std::string> ids_of(const std::vector<ActionStep>& steps) {
  std::vector<std::string> out;
  for (const auto& s : steps) out.push_back(s.object_id);
  return out;
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

Scene vase_scene() {
  Scene s;
  s.bounds = {-3, -3, 3, 3};
  s.objects = {box("table", {0.5, 0.4, 0.375}, {0, 0, 0.375}),
               box("vase", {0.08, 0.08, 0.15}, {0.1, 0.1, 0.9})};
  return s;
}

}  // namespace

TEST_CASE("support relations are read off the initial poses") {
  const auto rels = infer_support_relations(vase_scene());
  REQUIRE(rels.size() == 1);
  CHECK(rels[0] == SpatialRelation(OnRelation{"vase", "table"}));
}

TEST_CASE("vase on table moves first") {
  const Scene s = vase_scene();
  const auto r = dependency_order(s, infer_support_relations(s), steps_of({"table", "vase"}));
  CHECK(ids_of(r.steps) == std::vector<std::string>{"vase", "table"});
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0] == std::pair<std::string, std::string>{"vase", "table"});
  CHECK(r.corrections.size() == 2);
}

TEST_CASE("no support relations keeps the proposal verbatim") {
  Scene s;
  s.objects = {box("a", {0.1, 0.1, 0.1}, {0, 0, 0.1}), box("b", {0.1, 0.1, 0.1}, {1, 0, 0.1}),
               box("c", {0.1, 0.1, 0.1}, {2, 0, 0.1})};
  const auto r = dependency_order(s, {}, steps_of({"c", "a", "b"}));
  CHECK(ids_of(r.steps) == std::vector<std::string>{"c", "a", "b"});
  CHECK(r.corrections.empty());
}

TEST_CASE("chain c on b on a is unstacked top down from every proposal") {
  Scene s;
  s.objects = {box("a", {0.4, 0.4, 0.2}, {0, 0, 0.2}), box("b", {0.3, 0.3, 0.1}, {0, 0, 0.5}),
               box("c", {0.1, 0.1, 0.1}, {0, 0, 0.7})};
  const auto current = infer_support_relations(s);
  CHECK(current.size() == 2);
  std::vector<std::string> perm = {"a", "b", "c"};
  do {
    const auto r = dependency_order(s, current, steps_of(perm));
    CHECK(ids_of(r.steps) == std::vector<std::string>{"c", "b", "a"});
  } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST_CASE("step set errors") {
  const Scene s = vase_scene();
  CHECK(code_of([&] { dependency_order(s, {}, steps_of({"table"})); }) == ErrorCode::MissingStep);
  CHECK(code_of([&] { dependency_order(s, {}, steps_of({"table", "vase", "vase"})); }) ==
        ErrorCode::DuplicateStep);
  CHECK(code_of([&] { dependency_order(s, {}, steps_of({"table", "vase", "cat"})); }) ==
        ErrorCode::UnknownObject);
  const std::vector<SpatialRelation> loop = {OnRelation{"vase", "table"}};
  const std::vector<SpatialRelation> back = {OnRelation{"vase", "table"}};
  // Currently on the table and also targeted onto it: both orders required.
  CHECK(code_of([&] { dependency_order(s, loop, steps_of({"table", "vase"}), back); }) ==
        ErrorCode::CycleDetected);
}

TEST_CASE("ordering satisfies every constraint and keeps consistent proposals") {
  Rng rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.below(5);
    Scene s;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) {
      ids.push_back(std::string(1, static_cast<char>('a' + i)));
      s.objects.push_back(box(ids.back(), {0.1, 0.1, 0.1}, {double(i), 0, 0.1}));
    }
    std::vector<std::size_t> rank(n);
    std::iota(rank.begin(), rank.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(rank[i - 1], rank[rng.below(i)]);
    std::vector<SpatialRelation> current;
    std::vector<std::pair<std::string, std::string>> need;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (rank[i] < rank[j] && rng.uniform() < 0.4) {
          current.push_back(OnRelation{ids[i], ids[j]});
          need.emplace_back(ids[i], ids[j]);
        }
    auto perm = ids;
    do {
      const auto r = dependency_order(s, current, steps_of(perm));
      const auto got = ids_of(r.steps);
      CHECK(oracle::respects(got, need));
      if (oracle::respects(perm, need)) {
        CHECK(got == perm);
        CHECK(r.corrections.empty());
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
}

TEST_CASE("step names resolve case-insensitively") {
  const Scene s = vase_scene();
  const auto r = resolve_steps(s, steps_of({"Table", "VASE"}));
  CHECK(r[0].object_id == "table");
  CHECK(r[1].text == action_text("vase"));
  CHECK(code_of([&] { resolve_steps(s, steps_of({"lamp"})); }) == ErrorCode::UnknownObject);
}

TEST_CASE("routes avoid obstacles and end within reach") {
  Scene s;
  s.bounds = {-4, -4, 4, 4};
  s.objects = {box("wall", {0.1, 2.5, 1.0}, {0, 0, 1.0}, true),
               box("crate", {0.3, 0.3, 0.3}, {-2.5, 0, 0.3}),
               box("stool", {0.2, 0.2, 0.3}, {2.5, -2.5, 0.3})};
  SceneMap map;
  map.entries = {{"crate", {2.5, 2.5, 0.3}, Quat::Identity()},
                 {"stool", {-2.5, -2.5, 0.3}, Quat::Identity()}};
  PlannerConfig cfg;
  cfg.agent_start = Vec2(-3.5, 3.5);
  const auto steps = steps_of({"crate", "stool"});
  const ExecutionPlan plan = plan_routes(s, map, steps, cfg);
  REQUIRE(plan.steps.size() == 2);
  Scene current = s;
  for (const auto& st : plan.steps) {
    for (const PlannedLeg* leg : {&st.approach, &st.carry}) {
      for (const Cell& c : leg->cells) CHECK(!leg->grid.occupied(c));
      if (!leg->cells.empty()) {
        const Vec2 end = leg->grid.center(leg->cells.back());
        CHECK(point_polygon_distance(end, leg->target) <= cfg.reach + 1e-9);
      }
    }
    // The carried object is absent from its own carry grid.
    const ObjectSpec& o = current.at(st.step.object_id);
    const Vec2 c = o.initial_pose.position().head<2>();
    CHECK(st.approach.grid.occupied(*st.approach.grid.cell_at(c)));
    CHECK(!st.carry.grid.occupied(*st.carry.grid.cell_at(c)));
    for (auto& obj : current.objects) {
      if (obj.id == st.step.object_id) obj.initial_pose = map.find(obj.id)->pose();
    }
  }
  // Every cell of every route is outside the inflated obstacle footprints.
  for (const auto& st : plan.steps) {
    for (const Cell& cell : st.carry.cells) {
      const Vec2 p = st.carry.grid.center(cell);
      CHECK(point_polygon_distance(p, footprint(s.objects[0], s.objects[0].initial_pose)) >= 0.3);
    }
  }
}

TEST_CASE("an agent already within reach needs no approach") {
  Scene s;
  s.bounds = {-3, -3, 3, 3};
  s.objects = {box("cup", {0.05, 0.05, 0.05}, {0.5, 0, 0.05})};
  SceneMap map;
  map.entries = {{"cup", {-2, 0, 0.05}, Quat::Identity()}};
  PlannerConfig cfg;
  cfg.agent_start = Vec2(0, 0);
  const auto plan = plan_routes(s, map, steps_of({"cup"}), cfg);
  CHECK(plan.steps[0].approach.cells.empty());
  CHECK(!plan.steps[0].carry.cells.empty());
}

TEST_CASE("plan json round trip") {
  std::vector<PlanEntry> e = {{"cup", action_text("cup"), {{0.5, 1.25}, {1.5, 2}}},
                              {"box", action_text("box"), {}}};
  const std::string text = json_io::dump(plan_to_json(e));
  const auto back = plan_from_json(json_io::parse(text));
  CHECK(json_io::dump(plan_to_json(back)) == text);
  CHECK(back[0].route[1] == Vec2(1.5, 2));
}

#include "../support/generators.hpp"
#include "hoiplan/json_io.hpp"
#include "hoiplan/layout.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace hoiplan;

namespace {

ObjectSpec box(const std::string& id, Vec3 half, Vec3 pos, bool is_static = false,
               Vec3 dir = Vec3::UnitX()) {
  ObjectSpec o;
  o.id = id;
  o.half_extents = half;
  o.canonical_dir = dir;
  o.is_static = is_static;
  o.initial_pose = Pose(pos, Quat::Identity());
  return o;
}

Scene room() {
  Scene s;
  s.bounds = {-5, -5, 5, 5};
  return s;
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

TEST_CASE("on relation edge points from support to object") {
  Scene s = room();
  s.objects = {box("table", {0.5, 0.5, 0.375}, {0, 0, 0.375}), box("monitor", {0.2, 0.05, 0.2}, {2, 2, 0.2})};
  const auto rels = parse_relations("on(monitor, table)");
  const SceneGraph g = build_graph(s, rels);
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0].from == "table");
  CHECK(g.edges[0].to == "monitor");
}

TEST_CASE("empty relation list gives an edgeless graph") {
  Scene s = room();
  s.objects = {box("a", {0.2, 0.2, 0.2}, {0, 0, 0.2})};
  CHECK(build_graph(s, {}).edges.empty());
}

TEST_CASE("graph errors") {
  Scene s = room();
  s.objects = {box("a", {0.2, 0.2, 0.2}, {0, 0, 0.2}), box("b", {0.2, 0.2, 0.2}, {1, 0, 0.2}),
               box("wall", {0.2, 0.2, 0.2}, {3, 0, 0.2}, true)};
  CHECK(code_of([&] { build_graph(s, parse_relations("on(a, b)\non(b, a)")); }) ==
        ErrorCode::CycleDetected);
  CHECK(code_of([&] { build_graph(s, parse_relations("on(a, ghost)")); }) ==
        ErrorCode::UnknownObject);
  CHECK(code_of([&] { build_graph(s, parse_relations("on(wall, a)")); }) ==
        ErrorCode::StaticTarget);
  try {
    build_graph(s, parse_relations("adjacent(a, b, north, 1)\nadjacent(b, a, south, 1)"));
    FAIL("cycle not reported");
  } catch (const Error& e) {
    CHECK(e.detail().contains("cycle"));
  }
}

TEST_CASE("adjacent places the object along the compass direction") {
  Scene s = room();
  s.objects = {box("door", {0.5, 0.05, 1.0}, {0, 0, 1.0}, true),
               box("table", {0.6, 0.4, 0.375}, {3, 3, 2.0})};
  const auto m = solve(s, parse_relations("adjacent(table, door, north, 1)"), 0).map;
  const SceneMapEntry* t = m.find("table");
  REQUIRE(t);
  CHECK(t->position.x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(t->position.y() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(t->position.z() == doctest::Approx(0.375).epsilon(1e-12));
}

TEST_CASE("north frame rotates compass directions") {
  Scene s = room();
  s.north = {1, 0};
  s.objects = {box("door", {0.1, 0.1, 0.1}, {0, 0, 0.1}, true), box("t", {0.2, 0.2, 0.2}, {3, 3, 0.2})};
  const auto m = solve(s, parse_relations("adjacent(t, door, east, 2)"), 0).map;
  // east is north turned clockwise: (0, -1).
  CHECK(m.find("t")->position.x() == doctest::Approx(0.0));
  CHECK(m.find("t")->position.y() == doctest::Approx(-2.0));
}

TEST_CASE("on aligns the bottom with the support top") {
  Scene s = room();
  s.objects = {box("table", {0.5, 0.5, 0.375}, {0, 0, 0.375}, true),
               box("box", {0.1, 0.1, 0.25}, {2, 2, 0.25})};
  const auto m = solve(s, parse_relations("on(box, table)"), 7).map;
  const auto* b = m.find("box");
  CHECK(b->position.z() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(b->position.x()) <= 0.4 + 1e-12);
  CHECK(std::abs(b->position.y()) <= 0.4 + 1e-12);
}

TEST_CASE("two predecessors average their suggestions") {
  Scene s = room();
  s.objects = {box("a", {0.1, 0.1, 0.1}, {0, 0, 0.1}, true), box("b", {0.1, 0.1, 0.1}, {2, 0, 0.1}, true),
               box("c", {0.1, 0.1, 0.1}, {4, 4, 0.1})};
  const auto single_a = solve(s, parse_relations("adjacent(c, a, north, 1)"), 0).map;
  const auto single_b = solve(s, parse_relations("adjacent(c, b, north, 2)"), 0).map;
  const auto both = solve(s, parse_relations("adjacent(c, a, north, 1)\nadjacent(c, b, north, 2)"), 0);
  const Vec3 expect = 0.5 * (single_a.find("c")->position + single_b.find("c")->position);
  CHECK((both.map.find("c")->position - expect).norm() < 1e-12);
  CHECK(both.diagnostics.residuals.at("c") > 0.0);
}

TEST_CASE("facing turns the canonical direction toward the target") {
  Scene s = room();
  s.objects = {box("monitor", {0.2, 0.05, 0.2}, {0, 0, 0.2}, false, Vec3::UnitX()),
               box("chair", {0.2, 0.2, 0.4}, {2, 0, 0.4}, true)};
  std::map<std::string, Vec3> pos = {{"monitor", {0, 0, 0.2}}, {"chair", {2, 0, 0.4}}};
  const std::vector<FacingRelation> f = {{"monitor", "chair"}};
  auto q = compute_orientations(s, pos, f).at("monitor");
  CHECK(geodesic_angle(q, Quat::Identity()) < 1e-12);
  pos["chair"] = {0, 2, 0.4};
  q = compute_orientations(s, pos, f).at("monitor");
  CHECK(geodesic_angle(q, yaw_rotation(std::numbers::pi / 2)) < 1e-12);
}

TEST_CASE("facing errors") {
  Scene s = room();
  s.objects = {box("m", {0.2, 0.05, 0.2}, {0, 0, 0.2}), box("a", {0.2, 0.2, 0.4}, {2, 0, 0.4}, true),
               box("b", {0.2, 0.2, 0.4}, {0, 2, 0.4}, true)};
  std::map<std::string, Vec3> pos = {{"m", {0, 0, 0.2}}, {"a", {2, 0, 0.4}}, {"b", {0, 2, 0.4}}};
  const std::vector<FacingRelation> two = {{"m", "a"}, {"m", "b"}};
  CHECK(code_of([&] { compute_orientations(s, pos, two); }) == ErrorCode::ConflictingFacing);
  pos["a"] = {0, 0, 3.0};
  const std::vector<FacingRelation> one = {{"m", "a"}};
  CHECK(code_of([&] { compute_orientations(s, pos, one); }) == ErrorCode::CoincidentPositions);
}

TEST_CASE("objects without facing keep their initial orientation") {
  Scene s = room();
  s.objects = {box("door", {0.1, 0.1, 0.1}, {0, 0, 0.1}, true), box("t", {0.2, 0.2, 0.2}, {3, 3, 0.2})};
  s.objects[1].initial_pose = Pose({3, 3, 0.2}, yaw_rotation(0.7));
  const auto m = solve(s, parse_relations("adjacent(t, door, north, 2)"), 0).map;
  CHECK(geodesic_angle(m.find("t")->orientation, yaw_rotation(0.7)) < 1e-12);
}

TEST_CASE("solver output satisfies every invariant on random scenes") {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    CAPTURE(seed);
    const auto c = gen::random_layout_case(seed);
    const LayoutResult r = solve(c.scene, c.relations, seed);
    const LayoutCheck check = check_layout(c.scene, r.map, c.relations);
    for (const auto& v : check.violations) MESSAGE(v);
    CHECK(check.violations.empty());
    CHECK(check.position_error_rate() == 0.0);
    CHECK(check.orientation_error_rate() == 0.0);
    // One entry per movable object, all inside the bounds.
    std::size_t movable = 0;
    for (const auto& o : c.scene.objects) movable += o.is_static ? 0 : 1;
    CHECK(r.map.entries.size() == movable);
  }
}

TEST_CASE("resolution order waits for all predecessors") {
  for (std::uint64_t seed = 100; seed < 130; ++seed) {
    const auto c = gen::random_layout_case(seed);
    const SceneGraph g = build_graph(c.scene, c.relations);
    const auto r = solve(c.scene, c.relations, seed);
    std::map<std::string, std::size_t> at;
    for (std::size_t i = 0; i < r.diagnostics.order.size(); ++i) at[r.diagnostics.order[i]] = i;
    for (const auto& e : g.edges) {
      if (g.static_set.count(e.from)) continue;
      CHECK(at.at(e.from) < at.at(e.to));
    }
    for (const auto& round : r.diagnostics.rounds) {
      CHECK(std::is_sorted(round.begin(), round.end()));
    }
  }
}

TEST_CASE("solve is deterministic and independent of relation order") {
  for (std::uint64_t seed = 200; seed < 220; ++seed) {
    auto c = gen::random_layout_case(seed);
    const std::string a = json_io::dump(scene_map_to_json(solve(c.scene, c.relations, 3).map));
    const std::string b = json_io::dump(scene_map_to_json(solve(c.scene, c.relations, 3).map));
    std::reverse(c.relations.begin(), c.relations.end());
    const std::string rev = json_io::dump(scene_map_to_json(solve(c.scene, c.relations, 3).map));
    CHECK(a == b);
    CHECK(a == rev);
  }
}

TEST_CASE("checker flags wrong heights, penetration and wrong facing") {
  Scene s = room();
  s.objects = {box("table", {0.5, 0.5, 0.375}, {0, 0, 0.375}, true),
               box("cup", {0.05, 0.05, 0.1}, {0, 0, 0.85}),
               box("lamp", {0.2, 0.2, 0.2}, {3, 0, 0.2})};
  const auto rels = parse_relations("on(cup, table)\nfacing(lamp, table)");
  SceneMap m;
  m.entries = {{"cup", {0, 0, 0.9}, Quat::Identity()}, {"lamp", {0.3, 0, 0.2}, Quat::Identity()}};
  const LayoutCheck c = check_layout(s, m, rels);
  CHECK(c.position_error_rate() == doctest::Approx(1.0));  // floating cup, lamp inside table
  CHECK(c.orientation_error_rate() == doctest::Approx(0.5));
  m.entries = {{"cup", {0, 0, 0.85}, Quat::Identity()},
               {"lamp", {3, 0, 0.2}, yaw_rotation(std::numbers::pi)}};
  const LayoutCheck ok = check_layout(s, m, rels);
  CHECK(ok.violations.empty());
}

TEST_CASE("scene map json round trip") {
  const auto c = gen::random_layout_case(5);
  const SceneMap m = solve(c.scene, c.relations, 1).map;
  const std::string text = json_io::dump(scene_map_to_json(m));
  CHECK(json_io::dump(scene_map_to_json(scene_map_from_json(json_io::parse(text)))) == text);
}

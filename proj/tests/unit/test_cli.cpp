#include "../support/generators.hpp"
#include "hoiplan/json_io.hpp"
#include "hoiplan/layout.hpp"
#include "hoiplan/llm.hpp"
#include "hoiplan/motion.hpp"
#include "hoiplan/scene.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <regex>
#include <string>

using namespace hoiplan;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = HOIPLAN_FIXTURES;

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(HOIPLAN_CLI) + " " + args + " 2>" +
                          (fs::temp_directory_path() / "hoiplan_cli_stderr.txt").string();
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string last_stderr() {
  return json_io::read_file(fs::temp_directory_path() / "hoiplan_cli_stderr.txt");
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "hoiplan_cli_test" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string sh(const fs::path& p) { return "'" + p.string() + "'"; }

std::string workspace_instruction() {
  std::string s = json_io::read_file(kFixtures + "/workspace_instruction.txt");
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

std::string plan_args(const fs::path& out) {
  return "plan " + sh(kFixtures + "/workspace_scene.json") + " -i '" + workspace_instruction() +
         "' --fixtures " + sh(kFixtures + "/llm") + " --out " + sh(out) + " --svg " +
         sh(out / "workspace.svg");
}

struct Arrow {
  Vec2 from, to;
};

std::map<std::string, Arrow> arrows(const std::string& svg) {
  std::map<std::string, Arrow> out;
  const std::regex line(
      "<line class=\"heading\" data-id=\"([^\"]+)\" x1=\"([-0-9.]+)\" y1=\"([-0-9.]+)\" "
      "x2=\"([-0-9.]+)\" y2=\"([-0-9.]+)\"");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), line); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    // SVG y grows downwards.
    out[m[1]] = {{std::stod(m[2]), -std::stod(m[3])}, {std::stod(m[4]), -std::stod(m[5])}};
  }
  return out;
}

MotionSequence rigid_static_motion(const GraspFile& grasp, std::size_t frames) {
  Rng rng(3);
  MotionSequence m = gen::carry_case(rng, frames, 5, frames - 5).motion;
  const Pose object = m.frames[0].object;
  for (auto& f : m.frames) {
    f.object = object;
    for (const auto& h : grasp.hands) {
      const Pose w = compose(object, h.grasp.wrist);
      f.joints[h.chain[2]] = w.position();
      f.joint_rot6d[h.chain[2]] = rot6d_encode(w.orientation());
    }
  }
  return m;
}

}  // namespace

TEST_CASE("plan writes golden artifacts deterministically") {
  const fs::path a = scratch("plan_a");
  const fs::path b = scratch("plan_b");
  REQUIRE(run(plan_args(a)).code == 0);
  REQUIRE(run(plan_args(b)).code == 0);
  for (const char* f : {"plan.json", "scene_map.json", "workspace.svg"}) {
    CAPTURE(f);
    const std::string got = json_io::read_file(a / f);
    CHECK(got == json_io::read_file(b / f));
    CHECK(got == json_io::read_file(kFixtures + "/golden/" + f));
  }
  const auto plan = json_io::parse(json_io::read_file(a / "plan.json"));
  std::vector<std::string> order;
  for (const auto& s : plan["steps"]) order.push_back(s["object"]);
  CHECK(order == std::vector<std::string>{"vase", "table", "monitor", "chair"});
}

TEST_CASE("rendered arrows point where facing relations say") {
  const fs::path d = scratch("arrows");
  REQUIRE(run(plan_args(d)).code == 0);
  const auto map = load_scene_map(d / "scene_map.json");
  const auto a = arrows(json_io::read_file(d / "workspace.svg"));
  for (const auto& [who, target] : {std::pair<std::string, std::string>{"monitor", "chair"},
                                    {"chair", "monitor"}}) {
    CAPTURE(who);
    REQUIRE(a.count(who) == 1);
    const Vec2 drawn = a.at(who).to - a.at(who).from;
    const Vec2 want = (map.find(target)->position - map.find(who)->position).head<2>();
    const double angle = std::acos(std::clamp(drawn.normalized().dot(want.normalized()), -1.0, 1.0));
    CHECK(angle < 1e-3);
  }
}

TEST_CASE("render of an empty scene is the bounds rectangle only") {
  const fs::path d = scratch("empty");
  Scene s;
  s.bounds = {0, 0, 2, 1};
  save_scene(s, d / "scene.json");
  REQUIRE(run("render " + sh(d / "scene.json") + " -o " + sh(d / "out.svg")).code == 0);
  const std::string svg = json_io::read_file(d / "out.svg");
  CHECK(svg.find("<rect class=\"bounds\"") != std::string::npos);
  CHECK(svg.find("<polygon") == std::string::npos);
  CHECK(svg.find("<line") == std::string::npos);
  CHECK(svg.find("<polyline") == std::string::npos);
}

TEST_CASE("usage and domain errors use distinct exit codes") {
  const fs::path d = scratch("errors");
  CHECK(run("plan " + sh(kFixtures + "/workspace_scene.json") + " -i x --backend gpt5").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("").code == 2);

  Scene s;
  s.bounds = {-2, -2, 2, 2};
  for (const char* id : {"a", "b"}) {
    ObjectSpec o;
    o.id = id;
    o.half_extents = {0.2, 0.2, 0.2};
    o.initial_pose = Pose({id[0] == 'a' ? -1.0 : 1.0, 0, 0.2}, Quat::Identity());
    s.objects.push_back(o);
  }
  save_scene(s, d / "scene.json");
  const std::string instr = "stack each on the other";
  json_io::write_file(d / (prompt_hash(render_prompt(s, instr)) + ".txt"),
                      "```relations\non(a, b)\non(b, a)\n```\n```plan\n"
                      "lift the a, move the a, put down the a\nlift the b, move the b, put down the b\n```\n");
  const Run r = run("plan " + sh(d / "scene.json") + " -i '" + instr + "' --fixtures " + sh(d) +
                    " --out " + sh(d / "out"));
  CHECK(r.code == 1);
  const auto err = json_io::parse(last_stderr());
  CHECK(err["error"]["code"] == "layout.CycleDetected");
  CHECK(run("plan " + sh(d / "scene.json") + " -i 'unregistered' --fixtures " + sh(d)).code == 1);
  CHECK(json_io::parse(last_stderr())["error"]["code"] == "llm.MissingFixture");
}

TEST_CASE("score of identical motions is perfect") {
  const fs::path d = scratch("score");
  Rng rng(1);
  MotionSequence m = gen::random_motion(rng, 1, 22);
  m.frames.resize(8, m.frames[0]);
  save_motion(m, d / "m.json");
  const Run r = run("score --ref " + sh(d / "m.json") + " --sim " + sh(d / "m.json"));
  REQUIRE(r.code == 0);
  const auto j = json_io::parse(r.out);
  CHECK(j["reward"]["total"].get<double>() == 1.05);
  CHECK(j["tracking_error"]["E_h"].get<double>() == 0.0);
  CHECK(j["tracking_error"]["E_o"].get<double>() == 0.0);
  CHECK(j["per_frame"].size() == 8);
}

TEST_CASE("postprocess leaves an already consistent motion untouched") {
  const fs::path d = scratch("post_identity");
  Rng rng(2);
  const GraspFile grasp = gen::carry_case(rng, 2, 0, 1).grasp;
  const MotionSequence m = rigid_static_motion(grasp, 40);
  save_motion(m, d / "in.json");
  save_grasp(grasp, d / "grasp.json");
  REQUIRE(run("postprocess --motion " + sh(d / "in.json") + " --grasp " + sh(d / "grasp.json") +
              " -o " + sh(d / "out.json"))
              .code == 0);
  CHECK(json_io::read_file(d / "out.json") == json_io::read_file(d / "in.json"));
  CHECK(fs::exists(d / "out.diagnostics.json"));
}

TEST_CASE("postprocess spreads a boundary jump over the window") {
  const fs::path d = scratch("post_jump");
  Rng rng(4);
  auto cc = gen::carry_case(rng, 80, 20, 60);
  // Still object before and after, a 10 cm jump into a smooth carry.
  for (std::size_t t = 0; t < 80; ++t) {
    const double s = t < 20 ? 0.0 : t >= 60 ? 1.0 : (static_cast<double>(t) - 20.0) / 40.0;
    cc.motion.frames[t].object =
        Pose(Vec3(0.25, 0.3 + 0.2 * s + (t >= 20 && t < 60 ? 0.1 : 0.0), 1.0), Quat::Identity());
  }
  save_motion(cc.motion, d / "in.json");
  save_grasp(cc.grasp, d / "grasp.json");
  REQUIRE(run("postprocess --motion " + sh(d / "in.json") + " --grasp " + sh(d / "grasp.json") +
              " -o " + sh(d / "out.json") + " --diagnostics " + sh(d / "diag.json"))
              .code == 0);
  auto max_jump = [](const MotionSequence& m) {
    double j = 0;
    for (std::size_t t = 1; t < m.frames.size(); ++t)
      j = std::max(j, (m.frames[t].object.position() - m.frames[t - 1].object.position()).norm());
    return j;
  };
  const MotionSequence out = load_motion(d / "out.json");
  CHECK(max_jump(cc.motion) > 0.1);
  CHECK(max_jump(out) < 0.03);
  const auto diag = json_io::parse(json_io::read_file(d / "diag.json"));
  CHECK(diag["window"] == 15);
}

TEST_CASE("route and prompt subcommands") {
  const Run r = run("route " + sh(kFixtures + "/workspace_scene.json") + " --from -3.5 3.5 --to 3 -3.5");
  REQUIRE(r.code == 0);
  const auto j = json_io::parse(r.out);
  CHECK(j["route"].size() >= 2);
  CHECK(j["cost"].get<double>() > 0);
  CHECK(run("route " + sh(kFixtures + "/workspace_scene.json") + " --from 3.5 1 --to 0 0").code == 1);
  const Run p = run("prompt " + sh(kFixtures + "/workspace_scene.json") + " -i '" +
                    workspace_instruction() + "'");
  REQUIRE(p.code == 0);
  CHECK(fs::exists(kFixtures + "/llm/" + json_io::parse(p.out)["hash"].get<std::string>() + ".txt"));
}

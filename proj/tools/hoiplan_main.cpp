#include "hoiplan/error.hpp"
#include "hoiplan/json_io.hpp"
#include "hoiplan/layout.hpp"
#include "hoiplan/llm.hpp"
#include "hoiplan/motion.hpp"
#include "hoiplan/pipeline.hpp"
#include "hoiplan/render.hpp"
#include "hoiplan/reward.hpp"
#include "hoiplan/task_planner.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using hoiplan::json_io::Json;

namespace {

constexpr int kDomainError = 1;
constexpr int kUsageError = 2;

void emit(const Json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << hoiplan::json_io::dump(j);
  } else {
    hoiplan::json_io::save(out, j);
  }
}

Json route_json(const hoiplan::Route& r) {
  Json pts = Json::array();
  for (const auto& p : r.waypoints) pts.push_back(Json::array({p.x(), p.y()}));
  Json j = Json::object();
  j["route"] = std::move(pts);
  j["cost"] = r.cost.value();
  j["straight_moves"] = r.cost.straight;
  j["diagonal_moves"] = r.cost.diagonal;
  j["cells"] = r.cells.size();
  return j;
}

hoiplan::Vec2 parse_point(const std::vector<double>& v) { return {v.at(0), v.at(1)}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Instruction-driven object rearrangement planning and motion tools"};
  app.require_subcommand(1);

  // plan
  auto* plan = app.add_subcommand("plan", "Scene + instruction -> scene_map.json and plan.json");
  std::string plan_scene, instruction, backend = "mock", fixtures = "fixtures/llm", plan_out = ".";
  std::uint64_t seed = 0;
  double resolution = 0.05, agent_radius = 0.3;
  std::string plan_svg;
  plan->add_option("scene", plan_scene, "scene.json")->required()->check(CLI::ExistingFile);
  plan->add_option("--instruction,-i", instruction, "Instruction text")->required();
  plan->add_option("--backend", backend, "LLM backend")
      ->check(CLI::IsMember({"mock", "http"}))
      ->capture_default_str();
  plan->add_option("--fixtures", fixtures, "Mock response directory")->capture_default_str();
  plan->add_option("--seed", seed, "Layout sampling seed")->capture_default_str();
  plan->add_option("--resolution", resolution, "Planning grid resolution (m)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  plan->add_option("--agent-radius", agent_radius, "Agent radius (m)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  plan->add_option("--out,-o", plan_out, "Output directory")->capture_default_str();
  plan->add_option("--svg", plan_svg, "Also render the solved layout to this SVG");

  // render
  auto* render = app.add_subcommand("render", "Top-down SVG of a scene, layout and routes");
  std::string render_scene, render_map, render_plan, render_out;
  render->add_option("scene", render_scene, "scene.json")->required()->check(CLI::ExistingFile);
  render->add_option("scene_map", render_map, "scene_map.json")->check(CLI::ExistingFile);
  render->add_option("--plan", render_plan, "plan.json with routes")->check(CLI::ExistingFile);
  render->add_option("--out,-o", render_out, "SVG output path")->required();

  // score
  auto* score = app.add_subcommand("score", "Tracking reward and error of a simulated motion");
  std::string ref_path, sim_path, weights_path, score_out;
  score->add_option("--ref", ref_path, "Reference motion.json")->required()->check(CLI::ExistingFile);
  score->add_option("--sim", sim_path, "Simulated motion.json")->required()->check(CLI::ExistingFile);
  score->add_option("--weights", weights_path, "weights.json (default: built-in body weights)")
      ->check(CLI::ExistingFile);
  score->add_option("--out,-o", score_out, "Report path (default: stdout)");

  // postprocess
  auto* post = app.add_subcommand("postprocess", "Static-object, wrist and IK post-processing");
  std::string motion_path, grasp_path, post_out, diag_out;
  hoiplan::PostprocessOptions post_opts;
  post->add_option("--motion", motion_path, "motion.json")->required()->check(CLI::ExistingFile);
  post->add_option("--grasp", grasp_path, "grasp.json")->required()->check(CLI::ExistingFile);
  post->add_option("--out,-o", post_out, "Output motion.json")->required();
  post->add_option("--diagnostics", diag_out, "Diagnostics path (default: <out>.diagnostics.json)");
  post->add_option("--window", post_opts.window, "Blend window (frames)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  post->add_option("--threshold", post_opts.segment.threshold, "Contact label threshold")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  post->add_option("--min-run", post_opts.segment.min_run, "Shortest contact run (frames)")
      ->capture_default_str();

  // route
  auto* route = app.add_subcommand("route", "Single A* route between two points");
  std::string route_scene, route_map, route_out;
  std::vector<double> from, to;
  double stride = 1.0;
  bool four = false;
  route->add_option("scene", route_scene, "scene.json")->required()->check(CLI::ExistingFile);
  route->add_option("--scene-map", route_map, "Use solved poses")->check(CLI::ExistingFile);
  route->add_option("--from", from, "Start x y")->required()->expected(2);
  route->add_option("--to", to, "Goal x y")->required()->expected(2);
  route->add_option("--resolution", resolution, "Grid resolution (m)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  route->add_option("--agent-radius", agent_radius, "Agent radius (m)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  route->add_option("--stride", stride, "Waypoint spacing (m)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  route->add_flag("--four-connected", four, "Disallow diagonal moves");
  route->add_option("--out,-o", route_out, "Output path (default: stdout)");

  // prompt
  auto* prompt = app.add_subcommand("prompt", "Print the rendered prompt and its fixture hash");
  std::string prompt_scene;
  prompt->add_option("scene", prompt_scene, "scene.json")->required()->check(CLI::ExistingFile);
  prompt->add_option("--instruction,-i", instruction, "Instruction text")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*plan) {
      const hoiplan::Scene scene = hoiplan::load_scene(plan_scene);
      const auto llm = hoiplan::make_backend(backend, fixtures);
      hoiplan::PipelineConfig cfg;
      cfg.seed = seed;
      cfg.planner.resolution = resolution;
      cfg.planner.agent_radius = agent_radius;
      const hoiplan::PipelineResult r = hoiplan::run_pipeline(scene, instruction, *llm, cfg);
      const fs::path dir(plan_out);
      fs::create_directories(dir);
      const auto entries = hoiplan::plan_entries(r.plan);
      hoiplan::save_plan(entries, dir / "plan.json");
      hoiplan::save_scene_map(r.layout.map, dir / "scene_map.json");
      Json diag = hoiplan::diagnostics_to_json(r.layout.diagnostics);
      Json corrections = Json::array();
      for (const auto& c : r.order.corrections) {
        corrections.push_back({{"object", c.object}, {"from", c.from_index}, {"to", c.to_index}});
      }
      diag["order_corrections"] = std::move(corrections);
      hoiplan::json_io::save(dir / "layout_diagnostics.json", diag);
      if (!plan_svg.empty()) {
        hoiplan::json_io::write_file(plan_svg,
                                     hoiplan::render_svg(scene, &r.layout.map, entries));
      }
      return 0;
    }
    if (*render) {
      const hoiplan::Scene scene = hoiplan::load_scene(render_scene);
      std::optional<hoiplan::SceneMap> map;
      if (!render_map.empty()) map = hoiplan::load_scene_map(render_map);
      std::vector<hoiplan::PlanEntry> entries;
      if (!render_plan.empty()) entries = hoiplan::load_plan(render_plan);
      hoiplan::json_io::write_file(render_out,
                                   hoiplan::render_svg(scene, map ? &*map : nullptr, entries));
      return 0;
    }
    if (*score) {
      const auto ref = hoiplan::load_motion(ref_path);
      const auto sim = hoiplan::load_motion(sim_path);
      const auto weights = weights_path.empty() ? hoiplan::default_body_weights()
                                                : hoiplan::load_weights(weights_path);
      emit(hoiplan::score_report(ref, sim, weights), score_out);
      return 0;
    }
    if (*post) {
      const auto motion = hoiplan::load_motion(motion_path);
      const auto grasp = hoiplan::load_grasp(grasp_path);
      const auto r = hoiplan::postprocess_motion(motion, grasp, post_opts);
      hoiplan::save_motion(r.motion, post_out);
      const fs::path diag = diag_out.empty()
                                ? fs::path(post_out).replace_extension(".diagnostics.json")
                                : fs::path(diag_out);
      hoiplan::json_io::save(diag, r.diagnostics);
      return 0;
    }
    if (*route) {
      hoiplan::Scene scene = hoiplan::load_scene(route_scene);
      if (!route_map.empty()) scene = hoiplan::apply_scene_map(scene, hoiplan::load_scene_map(route_map));
      const auto grid = hoiplan::rasterize(scene, {}, resolution, agent_radius);
      hoiplan::AstarOptions opts;
      opts.connectivity = four ? hoiplan::Connectivity::Four : hoiplan::Connectivity::Eight;
      opts.stride = stride;
      const auto r = hoiplan::astar(grid, parse_point(from), parse_point(to), opts);
      emit(route_json(r), route_out);
      return 0;
    }
    if (*prompt) {
      const hoiplan::Scene scene = hoiplan::load_scene(prompt_scene);
      const auto bundle = hoiplan::render_prompt(scene, instruction);
      Json j = Json::object();
      j["hash"] = hoiplan::prompt_hash(bundle);
      j["system"] = bundle.system_text;
      j["user"] = bundle.user_text;
      std::cout << hoiplan::json_io::dump(j);
      return 0;
    }
  } catch (const hoiplan::Error& e) {
    Json j = Json::object();
    j["error"] = e.to_json();
    std::cerr << j.dump() << "\n";
    return kDomainError;
  } catch (const std::exception& e) {
    Json j = Json::object();
    j["error"] = {{"code", "internal"}, {"message", e.what()}, {"detail", Json::object()}};
    std::cerr << j.dump() << "\n";
    return kDomainError;
  }
  return kUsageError;
}

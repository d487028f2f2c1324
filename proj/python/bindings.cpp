#include "hoiplan/error.hpp"
#include "hoiplan/json_io.hpp"
#include "hoiplan/layout.hpp"
#include "hoiplan/llm.hpp"
#include "hoiplan/motion.hpp"
#include "hoiplan/pipeline.hpp"
#include "hoiplan/reward.hpp"
#include "hoiplan/task_planner.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
namespace hp = hoiplan;
using hp::json_io::Json;

namespace {

hp::Scene scene_of(const std::string& text) { return hp::scene_from_json(hp::json_io::parse(text)); }

hp::MotionSequence motion_of(const std::string& text) {
  return hp::motion_from_json(hp::json_io::parse(text));
}

py::dict relation_dict(const hp::SpatialRelation& r) {
  py::dict d;
  if (const auto* on = std::get_if<hp::OnRelation>(&r)) {
    d["kind"] = "on";
    d["object"] = on->object;
    d["base"] = on->base;
  } else if (const auto* adj = std::get_if<hp::AdjacentRelation>(&r)) {
    d["kind"] = "adjacent";
    d["object"] = adj->object;
    d["anchor"] = adj->anchor;
    d["direction"] = std::string(hp::to_string(adj->direction));
    d["distance"] = adj->distance;
  } else {
    const auto& f = std::get<hp::FacingRelation>(r);
    d["kind"] = "facing";
    d["object"] = f.object;
    d["target"] = f.target;
  }
  return d;
}

hp::Quat quat_of(const std::array<double, 4>& wxyz) {
  return hp::Quat(wxyz[0], wxyz[1], wxyz[2], wxyz[3]).normalized();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Layout solving, routing, motion post-processing and reward evaluation.";

  static py::exception<hp::Error> error(m, "HoiplanError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const hp::Error& e) {
      py::object inst = py::reinterpret_borrow<py::object>(error.ptr())(e.what());
      inst.attr("code") = std::string(hp::to_string(e.code()));
      inst.attr("detail") = e.detail().dump();
      PyErr_SetObject(error.ptr(), inst.ptr());
    }
  });

  m.def("parse_relations", [](const std::string& text) {
    py::list out;
    for (const auto& r : hp::parse_relations(text)) out.append(relation_dict(r));
    return out;
  }, py::arg("text"));

  m.def("render_relations", [](const std::string& text) {
    return hp::render_relations(hp::parse_relations(text));
  }, py::arg("text"), "Canonical one-call-per-line form of a relation listing.");

  m.def("solve_layout", [](const std::string& scene_json, const std::string& relations,
                           std::uint64_t seed) {
    const hp::Scene scene = scene_of(scene_json);
    const auto rels = hp::parse_relations(relations);
    return hp::json_io::dump(hp::scene_map_to_json(hp::solve(scene, rels, seed).map));
  }, py::arg("scene_json"), py::arg("relations"), py::arg("seed") = 0,
        "Returns the scene map as JSON text.");

  m.def("check_layout", [](const std::string& scene_json, const std::string& scene_map_json,
                           const std::string& relations) {
    const hp::Scene scene = scene_of(scene_json);
    const auto map = hp::scene_map_from_json(hp::json_io::parse(scene_map_json));
    const auto rels = hp::parse_relations(relations);
    const hp::LayoutCheck c = hp::check_layout(scene, map, rels);
    py::dict d;
    d["position_errors"] = c.position_errors;
    d["orientation_errors"] = c.orientation_errors;
    d["violations"] = c.violations;
    d["position_error_rate"] = c.position_error_rate();
    d["orientation_error_rate"] = c.orientation_error_rate();
    return d;
  }, py::arg("scene_json"), py::arg("scene_map_json"), py::arg("relations"));

  m.def("astar", [](const std::vector<std::vector<bool>>& occupied, std::pair<int, int> start,
                    std::pair<int, int> goal, int connectivity) {
    const int h = static_cast<int>(occupied.size());
    const int w = h ? static_cast<int>(occupied.front().size()) : 0;
    hp::OccupancyGrid grid(hp::Vec2::Zero(), 1.0, w, h);
    for (int y = 0; y < h; ++y) {
      if (static_cast<int>(occupied[y].size()) != w) {
        throw py::value_error("occupancy rows must have equal length");
      }
      for (int x = 0; x < w; ++x) grid.set({x, y}, occupied[y][x]);
    }
    hp::AstarOptions opts;
    opts.connectivity = connectivity == 4 ? hp::Connectivity::Four : hp::Connectivity::Eight;
    opts.stride = 0.0;
    const hp::Route r = hp::astar(grid, hp::Cell{start.first, start.second},
                                  hp::Cell{goal.first, goal.second}, opts);
    std::vector<std::pair<int, int>> cells;
    for (const auto& c : r.cells) cells.emplace_back(c.x, c.y);
    py::dict d;
    d["cells"] = cells;
    d["cost"] = r.cost.value();
    d["straight"] = r.cost.straight;
    d["diagonal"] = r.cost.diagonal;
    return d;
  }, py::arg("occupied"), py::arg("start"), py::arg("goal"), py::arg("connectivity") = 8,
        "occupied[y][x]; cells are (x, y).");

  m.def("dependency_order", [](const std::string& scene_json, const std::vector<std::string>& ids) {
    const hp::Scene scene = scene_of(scene_json);
    std::vector<hp::ActionStep> steps;
    for (const auto& id : ids) steps.push_back({id, hp::action_text(id)});
    const auto r = hp::dependency_order(scene, hp::infer_support_relations(scene), steps);
    std::vector<std::string> out;
    for (const auto& s : r.steps) out.push_back(s.object_id);
    return out;
  }, py::arg("scene_json"), py::arg("objects"));

  m.def("rot6d_encode", [](const hp::Mat3& r) {
    const hp::Rot6D v = hp::rot6d_encode(r);
    return std::vector<double>(v.begin(), v.end());
  }, py::arg("rotation"));
  m.def("rot6d_decode", [](const std::array<double, 6>& v) { return hp::rot6d_decode(v); },
        py::arg("rot6d"));
  m.def("geodesic_angle", [](const std::array<double, 4>& a, const std::array<double, 4>& b) {
    return hp::geodesic_angle(quat_of(a), quat_of(b));
  }, py::arg("a"), py::arg("b"), "Quaternions as [w, x, y, z].");

  m.def("segment_hand", [](const std::vector<double>& labels, double threshold,
                           std::size_t min_run) {
    const auto h = hp::segment_hand(labels, {threshold, min_run});
    auto t = [](const hp::FrameRange& r) { return std::make_pair(r.begin, r.end); };
    return py::make_tuple(t(h.pre), t(h.contact), t(h.post));
  }, py::arg("labels"), py::arg("threshold") = 0.5, py::arg("min_run") = 5);

  m.def("hand_alpha", &hp::hand_alpha, py::arg("distance"));
  m.def("energy_reward", [](const std::vector<hp::Vec3>& accels) {
    return hp::energy_reward(accels);
  }, py::arg("accelerations"));

  m.def("score", [](const std::string& ref_json, const std::string& sim_json,
                    std::optional<std::string> weights_json) {
    const auto weights = weights_json ? hp::weights_from_json(hp::json_io::parse(*weights_json))
                                      : hp::default_body_weights();
    return hp::json_io::dump(hp::score_report(motion_of(ref_json), motion_of(sim_json), weights));
  }, py::arg("ref_json"), py::arg("sim_json"), py::arg("weights_json") = py::none());

  m.def("default_weights", [] { return hp::json_io::dump(hp::weights_to_json(hp::default_body_weights())); });

  m.def("postprocess", [](const std::string& motion_json, const std::string& grasp_json,
                          std::size_t window) {
    hp::PostprocessOptions opts;
    opts.window = window;
    const auto r = hp::postprocess_motion(motion_of(motion_json),
                                          hp::grasp_from_json(hp::json_io::parse(grasp_json)), opts);
    return py::make_tuple(hp::json_io::dump(hp::motion_to_json(r.motion)),
                          hp::json_io::dump(r.diagnostics));
  }, py::arg("motion_json"), py::arg("grasp_json"), py::arg("window") = 15,
        "Returns (motion_json, diagnostics_json).");

  m.def("render_prompt", [](const std::string& scene_json, const std::string& instruction) {
    const auto b = hp::render_prompt(scene_of(scene_json), instruction);
    py::dict d;
    d["system"] = b.system_text;
    d["user"] = b.user_text;
    d["hash"] = hp::prompt_hash(b);
    return d;
  }, py::arg("scene_json"), py::arg("instruction"));

  m.def("extract_sections", [](const std::string& text) {
    const auto s = hp::extract_sections(text);
    py::dict d;
    d["relations"] = s.relations_text;
    d["plan"] = s.plan_text;
    d["reasoning"] = s.reasoning_text;
    return d;
  }, py::arg("text"));

  m.def("plan", [](const std::string& scene_json, const std::string& instruction,
                   const std::string& fixtures_dir, std::uint64_t seed) {
    const hp::Scene scene = scene_of(scene_json);
    hp::MockBackend backend(fixtures_dir);
    hp::PipelineConfig cfg;
    cfg.seed = seed;
    const auto r = hp::run_pipeline(scene, instruction, backend, cfg);
    py::dict d;
    d["plan"] = hp::json_io::dump(hp::plan_to_json(hp::plan_entries(r.plan)));
    d["scene_map"] = hp::json_io::dump(hp::scene_map_to_json(r.layout.map));
    return d;
  }, py::arg("scene_json"), py::arg("instruction"), py::arg("fixtures_dir"), py::arg("seed") = 0,
        "Full pipeline with the mock backend; returns plan and scene map JSON text.");
}

#pragma once

#include "hoiplan/layout.hpp"
#include "hoiplan/task_planner.hpp"

#include <span>
#include <string>

namespace hoiplan {

struct SvgOptions {
  double pixels_per_meter = 100.0;
};

/// Top-down view with +y up: bounds, object footprints (scene-map poses when
/// given), heading arrows along each canonical direction, plan routes.
/// Arrows are <line class="heading" data-id="..."> from the object center.
std::string render_svg(const Scene& scene, const SceneMap* map, std::span<const PlanEntry> routes,
                       const SvgOptions& options = {});

}  // namespace hoiplan

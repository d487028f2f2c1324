#pragma once

#include "hoiplan/grid.hpp"
#include "hoiplan/layout.hpp"
#include "hoiplan/relations.hpp"
#include "hoiplan/scene.hpp"

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hoiplan {

/// on(a, b) for every movable a whose bottom rests on the top surface of b
/// (within tol) and whose footprint center lies over b's footprint.
std::vector<SpatialRelation> infer_support_relations(const Scene& scene, double tol = 1e-3);

struct OrderCorrection {
  std::string object;
  std::size_t from_index = 0;
  std::size_t to_index = 0;
};

struct OrderResult {
  std::vector<ActionStep> steps;
  /// Violated (before, after) pairs of the proposal.
  std::vector<std::pair<std::string, std::string>> violations;
  std::vector<OrderCorrection> corrections;
};

/// Reorders `proposed` so that every object moves before its current
/// supporter: on(a, b) in `current` with both movable puts a before b.
/// Target relations add the opposite constraint (b placed before a).
/// Steps keep their proposed order except that each one is preceded by its
/// unfinished prerequisites, so a consistent proposal comes back unchanged.
/// Errors: MissingStep, DuplicateStep, UnknownObject, StaticTarget,
/// CycleDetected.
OrderResult dependency_order(const Scene& scene, std::span<const SpatialRelation> current,
                             std::span<const ActionStep> proposed,
                             std::span<const SpatialRelation> target = {});

/// Maps each step's object name to the scene id (case-insensitive) and
/// rewrites the text with the scene's spelling. Errors: UnknownObject.
std::vector<ActionStep> resolve_steps(const Scene& scene, std::span<const ActionStep> steps);

struct PlannerConfig {
  double resolution = 0.05;
  double agent_radius = 0.3;
  double reach = 1.0;
  /// Waypoint spacing: walking speed (1 m/s) times one second.
  double stride = 1.0;
  std::optional<Vec2> agent_start;  // default: free cell nearest the bounds center
};

struct PlannedLeg {
  OccupancyGrid grid;
  std::vector<Cell> cells;  // empty when no motion is needed
  std::vector<Vec2> waypoints;
  Polygon target;  // footprint the leg must end within reach of
};

struct PlannedStep {
  ActionStep step;
  PlannedLeg approach;
  PlannedLeg carry;

  std::vector<Vec2> route() const;
};

struct ExecutionPlan {
  Vec2 agent_start = Vec2::Zero();
  std::vector<PlannedStep> steps;
};

/// Per step: walk to a pre-grasp cell within reach of the object, then carry
/// it to a cell within reach of its target footprint. The grid is rebuilt
/// from current poses for every leg; the carried object is excluded from its
/// own carry grid. Errors: StartOccupied, GoalOccupied, NoPath.
ExecutionPlan plan_routes(const Scene& scene, const SceneMap& map,
                          std::span<const ActionStep> steps, const PlannerConfig& config = {});

struct PlanEntry {
  std::string object;
  std::string text;
  std::vector<Vec2> route;
};

std::vector<PlanEntry> plan_entries(const ExecutionPlan& plan);
json_io::Json plan_to_json(std::span<const PlanEntry> entries);
std::vector<PlanEntry> plan_from_json(const json_io::Json& j);
void save_plan(std::span<const PlanEntry> entries, const std::filesystem::path& path);
std::vector<PlanEntry> load_plan(const std::filesystem::path& path);

}  // namespace hoiplan

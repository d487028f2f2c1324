#pragma once

#include "hoiplan/json_io.hpp"
#include "hoiplan/relations.hpp"
#include "hoiplan/scene.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace hoiplan {

/// Positional edge, directed from the reference object to the constrained one.
struct GraphEdge {
  std::string from;
  std::string to;
  SpatialRelation relation;  // OnRelation or AdjacentRelation
};

struct SceneGraph {
  std::vector<std::string> nodes;  // sorted
  std::vector<GraphEdge> edges;    // sorted by (to, from, kind)
  std::vector<FacingRelation> facing;
  std::set<std::string> static_set;
  std::set<std::string> movable_set;

  std::vector<const GraphEdge*> predecessors(const std::string& id) const;
};

/// Errors: UnknownObject, StaticTarget (a relation tries to move a static
/// object), CycleDetected (detail "cycle" lists the path).
SceneGraph build_graph(const Scene& scene, std::span<const SpatialRelation> relations);

struct LayoutWarning {
  std::string id;
  std::string kind;  // "PlacementCongestion" | "SupportTooSmall"
  std::string message;
};

struct LayoutDiagnostics {
  /// Position-resolution order, and the ready set of every round.
  std::vector<std::string> order;
  std::vector<std::vector<std::string>> rounds;
  /// Largest XY distance between an object's final position and any single
  /// predecessor's suggestion; only objects with two or more predecessors.
  std::map<std::string, double> residuals;
  std::vector<LayoutWarning> warnings;
};

struct PositionResult {
  std::map<std::string, Vec3> positions;  // every object in the scene
  LayoutDiagnostics diagnostics;
};

struct SolverConfig {
  int max_placement_tries = 64;
};

/// Scene-graph propagation: static objects are resolved up front; each round
/// resolves, in id order, every movable object whose predecessors are all
/// resolved. A node's position is the mean of its predecessors' suggestions;
/// "on" fixes the height to the support's top surface after averaging.
/// Supports keep their initial orientation here.
PositionResult compute_positions(const SceneGraph& graph, const Scene& scene, std::uint64_t seed,
                                 const SolverConfig& config = {});

/// Yaw-only rotation turning each facing object's canonical direction toward
/// its target. Objects without a facing constraint keep their initial
/// orientation. Errors: ConflictingFacing, CoincidentPositions,
/// DegenerateCanonical, StaticTarget, UnknownObject.
std::map<std::string, Quat> compute_orientations(const Scene& scene,
                                                 const std::map<std::string, Vec3>& positions,
                                                 std::span<const FacingRelation> facing);

struct SceneMapEntry {
  std::string id;
  Vec3 position;
  Quat orientation;

  Pose pose() const { return Pose::from_unit(position, orientation); }
};

struct SceneMap {
  std::vector<SceneMapEntry> entries;  // sorted by id, one per movable object

  const SceneMapEntry* find(std::string_view id) const;
};

struct LayoutResult {
  SceneMap map;
  LayoutDiagnostics diagnostics;
};

/// Full solve. Facing objects that support other objects are oriented before
/// their dependents are placed, so the supported objects are sampled against
/// the final footprint. Deterministic in (scene, relation set, seed).
LayoutResult solve(const Scene& scene, std::span<const SpatialRelation> relations,
                   std::uint64_t seed, const SolverConfig& config = {});

/// Copy of `scene` with every scene-map object moved to its target pose.
Scene apply_scene_map(const Scene& scene, const SceneMap& map);

json_io::Json scene_map_to_json(const SceneMap& map);
SceneMap scene_map_from_json(const json_io::Json& j);
void save_scene_map(const SceneMap& map, const std::filesystem::path& path);
SceneMap load_scene_map(const std::filesystem::path& path);

json_io::Json diagnostics_to_json(const LayoutDiagnostics& d);

// Layout checking: invariant violations and the placement-error rates.

struct LayoutCheck {
  std::size_t object_count = 0;
  std::vector<std::string> position_errors;     // ids with wrong height / penetration
  std::vector<std::string> orientation_errors;  // ids facing the wrong way or tilted
  std::vector<std::string> violations;          // human-readable invariant failures

  double position_error_rate() const;
  double orientation_error_rate() const;
};

/// Checks, within `tol`:
///  on(a,b): bottom(a) = top(b) and footprint(a) inside footprint(b);
///  adjacent(a,b,dir,d) with a single positional predecessor: XY offset = d*dir;
///  facing(a,b): canonical direction points at b;
///  every moved object: no box penetration, yaw-only change, inside bounds.
LayoutCheck check_layout(const Scene& scene, const SceneMap& map,
                         std::span<const SpatialRelation> relations, double tol = 1e-6);

/// Penetration depth test between two oriented boxes (separating axes).
bool boxes_penetrate(const ObjectSpec& a, const Pose& pa, const ObjectSpec& b, const Pose& pb,
                     double tol);

}  // namespace hoiplan

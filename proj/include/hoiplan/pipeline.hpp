#pragma once

#include "hoiplan/layout.hpp"
#include "hoiplan/llm.hpp"
#include "hoiplan/task_planner.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace hoiplan {

struct PipelineConfig {
  std::uint64_t seed = 0;
  SolverConfig solver;
  PlannerConfig planner;
};

struct PipelineResult {
  PromptBundle prompt;
  LlmResponse response;
  std::vector<SpatialRelation> relations;
  LayoutResult layout;
  OrderResult order;
  ExecutionPlan plan;
};

/// Object names in relations matched to scene ids, exact first, then
/// case-insensitively. Unmatched names are left for the solver to reject.
std::vector<SpatialRelation> resolve_relation_ids(const Scene& scene,
                                                  std::vector<SpatialRelation> relations);

/// prompt -> completion -> relations and plan -> layout -> ordering -> routes.
PipelineResult run_pipeline(const Scene& scene, std::string_view instruction,
                            LlmBackend& backend, const PipelineConfig& config = {});

}  // namespace hoiplan

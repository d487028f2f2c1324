#include "hoiplan/pipeline.hpp"

namespace hoiplan {

namespace {

void resolve_name(const Scene& scene, std::string& name) {
  if (scene.find(name)) return;
  const std::string lower = to_lower_ascii(name);
  for (const auto& o : scene.objects) {
    if (to_lower_ascii(o.id) == lower) {
      name = o.id;
      return;
    }
  }
}

}  // namespace

std::vector<SpatialRelation> resolve_relation_ids(const Scene& scene,
                                                  std::vector<SpatialRelation> relations) {
  for (auto& r : relations) {
    std::visit(
        [&](auto& rel) {
          using T = std::decay_t<decltype(rel)>;
          resolve_name(scene, rel.object);
          if constexpr (std::is_same_v<T, OnRelation>) {
            resolve_name(scene, rel.base);
          } else if constexpr (std::is_same_v<T, AdjacentRelation>) {
            resolve_name(scene, rel.anchor);
          } else {
            resolve_name(scene, rel.target);
          }
        },
        r);
  }
  return relations;
}

PipelineResult run_pipeline(const Scene& scene, std::string_view instruction,
                            LlmBackend& backend, const PipelineConfig& config) {
  PipelineResult r;
  r.prompt = render_prompt(scene, instruction);
  r.response = complete(r.prompt, backend);
  r.relations = resolve_relation_ids(scene, parse_relations(r.response.extracted.relations_text));
  const std::vector<ActionStep> proposed =
      resolve_steps(scene, parse_plan(r.response.extracted.plan_text));
  r.layout = solve(scene, r.relations, config.seed, config.solver);
  r.order = dependency_order(scene, infer_support_relations(scene), proposed, r.relations);
  r.plan = plan_routes(scene, r.layout.map, r.order.steps, config.planner);
  return r;
}

}  // namespace hoiplan

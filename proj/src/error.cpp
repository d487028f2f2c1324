#include "hoiplan/error.hpp"

namespace hoiplan {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateRotation: return "geometry.DegenerateRotation";
    case ErrorCode::EmptyCloud: return "geometry.EmptyCloud";
    case ErrorCode::SchemaError: return "scene.SchemaError";
    case ErrorCode::DuplicateId: return "scene.DuplicateId";
    case ErrorCode::Io: return "scene.Io";
    case ErrorCode::ParseError: return "relations.ParseError";
    case ErrorCode::ArityError: return "relations.ArityError";
    case ErrorCode::BadDistance: return "relations.BadDistance";
    case ErrorCode::BadDirection: return "relations.BadDirection";
    case ErrorCode::UnknownRelation: return "relations.UnknownRelation";
    case ErrorCode::SelfRelation: return "relations.SelfRelation";
    case ErrorCode::TemplateMismatch: return "relations.TemplateMismatch";
    case ErrorCode::InconsistentObject: return "relations.InconsistentObject";
    case ErrorCode::UnknownObject: return "layout.UnknownObject";
    case ErrorCode::CycleDetected: return "layout.CycleDetected";
    case ErrorCode::StaticTarget: return "layout.StaticTarget";
    case ErrorCode::Unsolvable: return "layout.Unsolvable";
    case ErrorCode::CoincidentPositions: return "layout.CoincidentPositions";
    case ErrorCode::ConflictingFacing: return "layout.ConflictingFacing";
    case ErrorCode::DegenerateCanonical: return "layout.DegenerateCanonical";
    case ErrorCode::OutOfBounds: return "layout.OutOfBounds";
    case ErrorCode::MissingStep: return "planner.MissingStep";
    case ErrorCode::DuplicateStep: return "planner.DuplicateStep";
    case ErrorCode::StartOccupied: return "planner.StartOccupied";
    case ErrorCode::GoalOccupied: return "planner.GoalOccupied";
    case ErrorCode::NoPath: return "planner.NoPath";
    case ErrorCode::ShapeMismatch: return "motion.ShapeMismatch";
    case ErrorCode::WindowOutOfRange: return "motion.WindowOutOfRange";
    case ErrorCode::EmptyContact: return "motion.EmptyContact";
    case ErrorCode::LinkSetMismatch: return "reward.LinkSetMismatch";
    case ErrorCode::FingerSetMismatch: return "reward.FingerSetMismatch";
    case ErrorCode::NonFiniteInput: return "reward.NonFiniteInput";
    case ErrorCode::LengthMismatch: return "reward.LengthMismatch";
    case ErrorCode::Transport: return "llm.Transport";
    case ErrorCode::Timeout: return "llm.Timeout";
    case ErrorCode::MissingFixture: return "llm.MissingFixture";
    case ErrorCode::SectionMissing: return "llm.SectionMissing";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message, nlohmann::json detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      detail_(std::move(detail)) {}

nlohmann::json Error::to_json() const {
  nlohmann::json j;
  j["code"] = std::string(to_string(code_));
  j["message"] = what();
  j["detail"] = detail_;
  return j;
}

}  // namespace hoiplan

#pragma once

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace hoiplan {

/// Every failure surfaced by the library carries one of these codes. The
/// string form is module-qualified ("layout.CycleDetected") and is what the
/// CLI prints in its structured error payload.
enum class ErrorCode {
  // geometry
  DegenerateRotation,
  EmptyCloud,
  // scene / json
  SchemaError,
  DuplicateId,
  Io,
  // relations
  ParseError,
  ArityError,
  BadDistance,
  BadDirection,
  UnknownRelation,
  SelfRelation,
  TemplateMismatch,
  InconsistentObject,
  // layout
  UnknownObject,
  CycleDetected,
  StaticTarget,
  Unsolvable,
  CoincidentPositions,
  ConflictingFacing,
  DegenerateCanonical,
  OutOfBounds,
  // planner
  MissingStep,
  DuplicateStep,
  StartOccupied,
  GoalOccupied,
  NoPath,
  // motion
  ShapeMismatch,
  WindowOutOfRange,
  EmptyContact,
  // reward
  LinkSetMismatch,
  FingerSetMismatch,
  NonFiniteInput,
  LengthMismatch,
  // llm
  Transport,
  Timeout,
  MissingFixture,
  SectionMissing,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        nlohmann::json detail = nlohmann::json::object());

  ErrorCode code() const noexcept { return code_; }
  const nlohmann::json& detail() const noexcept { return detail_; }

  /// {"code": ..., "message": ..., "detail": {...}}
  nlohmann::json to_json() const;

 private:
  ErrorCode code_;
  nlohmann::json detail_;
};

}  // namespace hoiplan

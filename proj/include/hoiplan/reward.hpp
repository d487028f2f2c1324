#pragma once

#include "hoiplan/json_io.hpp"
#include "hoiplan/scene.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hoiplan {

/// One body link of the tracking weights. A paired link (both wrists, both
/// feet, ...) lists several joints and its weight is split equally.
struct LinkWeight {
  std::string name;
  std::vector<std::size_t> joints;
  double w_q = 0.0;
  double w_p = 0.0;
};

struct NormalizedWeights {
  std::vector<std::pair<std::size_t, double>> q;  // (joint, weight), ascending joint
  std::vector<std::pair<std::size_t, double>> p;
  double object_q = 0.0;
  double object_p = 0.0;
};

struct BodyWeights {
  std::vector<LinkWeight> links;
  double object_w_q = 1.0;
  double object_w_p = 1.0;
  /// Joints whose accelerations enter the energy term (feet and wrists).
  std::vector<std::size_t> end_effectors;

  /// Per-joint weights normalized so each family sums to 1; the object term
  /// is included only when an object is active.
  NormalizedWeights normalized(bool object_active) const;
};

/// Unnormalized body-link weights on the 22-joint SMPL body skeleton.
BodyWeights default_body_weights();
json_io::Json weights_to_json(const BodyWeights& w);
BodyWeights weights_from_json(const json_io::Json& j);
BodyWeights load_weights(const std::filesystem::path& path);

struct HandFrame {
  Pose wrist;
  std::vector<Vec3> fingers;  // world positions
};

struct TrackFrame {
  std::vector<Vec3> positions;     // per joint, world
  std::vector<Quat> orientations;  // per joint, world
  std::optional<Pose> object;      // the active manipulation target
  std::array<HandFrame, 2> hands;
};

/// 0.5 exp(-15 sum w_q e_q^2) + 0.5 exp(-15 sum w_p e_p^2).
/// Errors: LinkSetMismatch.
double body_reward(const TrackFrame& sim, const TrackFrame& ref, const BodyWeights& weights);

/// 1 at d <= 0.25 m, 0 at d >= 1 m, linear in between.
double hand_alpha(double distance);

/// Reference wrist-to-object distance per hand; infinite without an object.
std::array<double, 2> hand_object_distances(const TrackFrame& ref);

/// exp(-(5/|F|) sum_f [alpha e_fo + (1 - alpha) e_fw]) with alpha taken per
/// hand from `distances`. No fingers gives 1. Errors: FingerSetMismatch.
double hand_reward(const TrackFrame& sim, const TrackFrame& ref,
                   const std::array<double, 2>& distances);

/// exp(-(1/900) sum ||a||^2). Errors: NonFiniteInput.
double energy_reward(std::span<const Vec3> accelerations);

struct RewardBreakdown {
  double body = 0.0;
  double hand = 0.0;
  double energy = 0.0;
  double total = 0.0;
};

/// total = 0.8 body + 0.2 hand + 0.05 energy.
RewardBreakdown total_reward(const TrackFrame& sim, const TrackFrame& ref,
                             const BodyWeights& weights, std::span<const Vec3> accelerations);

/// Second differences times fps^2 per joint; the two end frames copy their
/// interior neighbour. Fewer than three frames yields zeros.
std::vector<std::vector<Vec3>> joint_accelerations(const MotionSequence& motion,
                                                   std::span<const std::size_t> joints);

struct TrackingError {
  double e_h = 0.0;  // cm
  double e_o = 0.0;  // cm
};

/// Mean per-frame mean-per-joint error and mean object-position error.
/// Errors: LengthMismatch.
TrackingError tracking_error(const MotionSequence& sim, const MotionSequence& ref);

/// Joint rotations decoded from 6D, the object as the active target on every
/// frame, wrists from the given joints, no fingers.
TrackFrame track_frame(const MotionFrame& frame, std::array<std::size_t, 2> wrist_joints = {20, 21});

/// Full report for a simulated sequence against its reference.
json_io::Json score_report(const MotionSequence& ref, const MotionSequence& sim,
                           const BodyWeights& weights);

}  // namespace hoiplan

#pragma once

#include "hoiplan/json_io.hpp"
#include "hoiplan/scene.hpp"

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hoiplan {

/// Half-open frame range [begin, end).
struct FrameRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool empty() const { return end <= begin; }
  std::size_t size() const { return empty() ? 0 : end - begin; }
  bool contains(std::size_t t) const { return t >= begin && t < end; }
  friend bool operator==(const FrameRange&, const FrameRange&) = default;
};

struct HandPhases {
  FrameRange pre;
  FrameRange contact;  // empty contact is written as [T, T)
  FrameRange post;
};

struct SegmentOptions {
  double threshold = 0.5;
  std::size_t min_run = 5;
};

/// Contact is the longest run of labels >= threshold once runs shorter than
/// min_run are erased (earliest run wins ties); pre/post are its flanks.
HandPhases segment_hand(std::span<const double> labels, const SegmentOptions& options = {});

struct PhaseSegmentation {
  std::array<HandPhases, 2> hands;  // left, right
};

PhaseSegmentation segment_phases(std::span<const std::array<double, 2>> labels,
                                 const SegmentOptions& options = {});

/// Mean wrist pose over the contact frames. Errors: EmptyContact.
Pose average_wrist_pose(std::span<const Pose> wrist, FrameRange contact);

struct RelativePoseLoss {
  double total = 0.0;
  std::vector<double> per_frame;
};

/// Surface points expressed in the wrist frame for every frame:
/// R_w^-1 (R_o K + T_o - T_w).
std::vector<std::vector<Vec3>> wrist_frame_points(std::span<const Pose> object,
                                                  std::span<const Pose> wrist,
                                                  std::span<const Vec3> k_rest);

/// sum_t L_t * || K_hat_w,t - K_w,t ||_1 with K_hat_w from the predicted
/// object and wrist poses. Errors: ShapeMismatch.
RelativePoseLoss relative_pose_loss(std::span<const Pose> object, std::span<const Pose> wrist,
                                    std::span<const Vec3> k_rest,
                                    const std::vector<std::vector<Vec3>>& k_ref,
                                    std::span<const double> labels);

/// 100 seeded surface samples of the object's rest box.
std::vector<Vec3> rest_surface_points(const Vec3& half_extents, std::size_t count = 100,
                                      std::uint64_t seed = 0x6b5f72657374);

enum class SmoothDirection { Forward, Backward };

/// Blends the correction (static_pose relative to traj[boundary]) into the
/// frames boundary, boundary +/- 1, ... with weight 1 - k / window. The
/// position delta is added; the rotation delta is scaled in axis-angle and
/// composed on the left. Frames with zero weight are returned untouched.
/// Errors: WindowOutOfRange.
std::vector<Pose> smooth_boundary(std::span<const Pose> traj, std::size_t boundary,
                                  std::size_t window, const Pose& static_pose,
                                  SmoothDirection direction = SmoothDirection::Forward);

struct GraspPose {
  Pose wrist;                  // in the object frame
  std::vector<double> fingers; // passed through untouched
};

/// Contact frames: R_o R_hat and R_o T_hat + T_o. The correction at each
/// contact boundary is ramped out over `window` frames of the neighbouring
/// phase; frames further away keep their input pose.
/// Errors: EmptyContact, ShapeMismatch.
std::vector<Pose> recompute_wrist(std::span<const Pose> object, std::span<const Pose> wrist,
                                  const GraspPose& grasp, FrameRange contact,
                                  std::size_t window = 15);

struct ConditionTensors {
  Eigen::MatrixXd s_r;  // T x (9J + 12)
  Eigen::MatrixXd w;    // T x 18
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> s_mask;
  Eigen::Matrix<bool, Eigen::Dynamic, 2> contact;
};

struct ConditionOptions {
  std::size_t waypoint_interval = 30;
  std::size_t root_joint = 0;
};

/// Row layout of S_r: joint positions (3J), joint 6D rotations (6J), object
/// position (3), object rotation row-major (9). Frame 0 carries the full
/// pose, the last frame the object pose, frame k * interval the k-th 2D
/// waypoint in the root joint's x/y, and every frame outside object contact
/// the static object pose. W holds each hand's grasp wrist pose (position,
/// 6D) on that hand's contact frames. Errors: ShapeMismatch.
ConditionTensors build_conditions(const MotionSequence& motion, const PhaseSegmentation& seg,
                                  const std::array<GraspPose, 2>& grasp,
                                  std::span<const Vec2> waypoints,
                                  const ConditionOptions& options = {});

struct IkResult {
  std::vector<Vec3> positions;   // joint positions after solving, root unchanged
  std::vector<Quat> rotations;   // accumulated world rotation of each segment
  double residual = 0.0;
  int iterations = 0;
  std::vector<double> residual_history;  // initial residual first
  bool reachable = true;
};

/// Cyclic coordinate descent on a positional chain; positions[0] is the
/// fixed root and the last position the end effector.
IkResult ik_solve(std::span<const Vec3> chain, const Vec3& target, int max_iters = 100,
                  double tol = 1e-6);

struct HandSetup {
  std::string side;  // "left" | "right"
  std::array<std::size_t, 3> chain;  // shoulder, elbow, wrist joint indices
  GraspPose grasp;
};

struct PostprocessOptions {
  SegmentOptions segment;
  std::size_t window = 15;
  Vec3 object_half_extents = Vec3::Constant(0.1);
  int ik_iters = 100;
  double ik_tol = 1e-10;
};

struct GraspFile {
  std::array<HandSetup, 2> hands;
  std::optional<Vec3> object_half_extents;
};

GraspFile default_grasp_file();
json_io::Json grasp_to_json(const GraspFile& g);
GraspFile grasp_from_json(const json_io::Json& j);
GraspFile load_grasp(const std::filesystem::path& path);
void save_grasp(const GraspFile& g, const std::filesystem::path& path);

struct PostprocessResult {
  MotionSequence motion;
  json_io::Json diagnostics;
};

/// Static object outside the union of the hands' contact ranges, ramped
/// corrections at both boundaries, wrists recomputed from the grasp on each
/// hand's contact frames and blended into its pre/post frames, then arm IK.
PostprocessResult postprocess_motion(const MotionSequence& motion, const GraspFile& grasp,
                                     const PostprocessOptions& options = {});

std::vector<Pose> wrist_track(const MotionSequence& motion, std::size_t joint);
std::vector<Pose> object_track(const MotionSequence& motion);

}  // namespace hoiplan

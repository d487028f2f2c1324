#pragma once

#include <Eigen/Geometry>

#include <array>
#include <span>
#include <vector>

namespace hoiplan {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Quat = Eigen::Quaterniond;

/// Rigid transform. The orientation is kept as a unit quaternion; rotation
/// matrices and the 6D codec only appear at I/O boundaries.
class Pose {
 public:
  Pose() : position_(Vec3::Zero()), orientation_(Quat::Identity()) {}

  /// Normalizes `orientation`.
  Pose(const Vec3& position, const Quat& orientation);

  /// Stores `orientation` bit-for-bit; it must already be unit within 1e-6.
  /// Used by loaders so that a reload reproduces the saved values exactly.
  static Pose from_unit(const Vec3& position, const Quat& orientation);

  static Pose identity() { return Pose(); }

  const Vec3& position() const { return position_; }
  const Quat& orientation() const { return orientation_; }
  Mat3 rotation() const { return orientation_.toRotationMatrix(); }

  Vec3 transform_point(const Vec3& p) const { return orientation_ * p + position_; }
  Vec3 inverse_transform_point(const Vec3& p) const {
    return orientation_.conjugate() * (p - position_);
  }

  Mat4 matrix() const;

  friend bool operator==(const Pose& a, const Pose& b) {
    return a.position_ == b.position_ && a.orientation_.coeffs() == b.orientation_.coeffs();
  }

 private:
  struct Raw {};
  Pose(Raw, const Vec3& position, const Quat& orientation)
      : position_(position), orientation_(orientation) {}

  Vec3 position_;
  Quat orientation_;
};

/// parent ∘ local: the pose of `local` expressed in the parent's frame.
Pose compose(const Pose& parent, const Pose& local);
Pose invert(const Pose& p);

/// First two columns of a rotation matrix, column-major.
using Rot6D = std::array<double, 6>;

Rot6D rot6d_encode(const Mat3& rotation);
Rot6D rot6d_encode(const Quat& orientation);

/// Gram-Schmidt on the two columns, third column by cross product.
/// Throws DegenerateRotation if either column has norm <= 1e-8 or they are
/// parallel.
Mat3 rot6d_decode(const Rot6D& r);

/// Angle in radians of the rotation taking `a` to `b`, in [0, pi].
double geodesic_angle(const Quat& a, const Quat& b);

/// Rotation about world +z.
Quat yaw_rotation(double radians);

/// Axis-angle vector (axis * angle) of a unit quaternion, angle in [0, pi].
Vec3 rotation_log(const Quat& q);
Quat rotation_exp(const Vec3& axis_angle);

/// Sign-aligned, normalized quaternion mean. Empty input yields identity.
Quat average_orientation(std::span<const Quat> orientations);

Pose average_pose(std::span<const Pose> poses);

}  // namespace hoiplan

#include "hoiplan/geometry.hpp"

#include "hoiplan/error.hpp"

#include <cmath>

namespace hoiplan {

Pose::Pose(const Vec3& position, const Quat& orientation)
    : position_(position), orientation_(orientation.normalized()) {}

Pose Pose::from_unit(const Vec3& position, const Quat& orientation) {
  if (std::abs(orientation.norm() - 1.0) > 1e-6) {
    return Pose(position, orientation);
  }
  return Pose(Raw{}, position, orientation);
}

Mat4 Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation();
  m.topRightCorner<3, 1>() = position_;
  return m;
}

Pose compose(const Pose& parent, const Pose& local) {
  return Pose(parent.transform_point(local.position()),
              parent.orientation() * local.orientation());
}

Pose invert(const Pose& p) {
  Quat inv = p.orientation().conjugate();
  return Pose(-(inv * p.position()), inv);
}

Rot6D rot6d_encode(const Mat3& rotation) {
  return {rotation(0, 0), rotation(1, 0), rotation(2, 0),
          rotation(0, 1), rotation(1, 1), rotation(2, 1)};
}

Rot6D rot6d_encode(const Quat& orientation) {
  return rot6d_encode(Mat3(orientation.normalized().toRotationMatrix()));
}

Mat3 rot6d_decode(const Rot6D& r) {
  Vec3 a(r[0], r[1], r[2]);
  Vec3 b(r[3], r[4], r[5]);
  const double na = a.norm();
  const double nb = b.norm();
  if (!(na > 1e-8) || !(nb > 1e-8)) {
    throw Error(ErrorCode::DegenerateRotation, "6D rotation column is near zero");
  }
  Vec3 x = a / na;
  Vec3 y = b - x.dot(b) * x;
  const double ny = y.norm();
  if (!(ny > 1e-8 * nb)) {
    throw Error(ErrorCode::DegenerateRotation, "6D rotation columns are parallel");
  }
  y /= ny;
  Mat3 m;
  m.col(0) = x;
  m.col(1) = y;
  m.col(2) = x.cross(y);
  return m;
}

double geodesic_angle(const Quat& a, const Quat& b) {
  Quat rel = a.conjugate() * b;
  return 2.0 * std::atan2(rel.vec().norm(), std::abs(rel.w()));
}

Quat yaw_rotation(double radians) {
  return Quat(std::cos(radians / 2.0), 0.0, 0.0, std::sin(radians / 2.0));
}

Vec3 rotation_log(const Quat& q_in) {
  Quat q = q_in.normalized();
  if (q.w() < 0.0) {
    q.coeffs() = -q.coeffs();
  }
  const double s = q.vec().norm();
  if (s < 1e-12) {
    // Small-angle limit: 2 * vec / w.
    return 2.0 * q.vec() / q.w();
  }
  const double angle = 2.0 * std::atan2(s, q.w());
  return q.vec() * (angle / s);
}

Quat rotation_exp(const Vec3& axis_angle) {
  const double angle = axis_angle.norm();
  if (angle < 1e-12) {
    Quat q(1.0, 0.5 * axis_angle.x(), 0.5 * axis_angle.y(), 0.5 * axis_angle.z());
    return q.normalized();
  }
  const double h = 0.5 * angle;
  Vec3 v = axis_angle * (std::sin(h) / angle);
  return Quat(std::cos(h), v.x(), v.y(), v.z());
}

Quat average_orientation(std::span<const Quat> orientations) {
  if (orientations.empty()) {
    return Quat::Identity();
  }
  const Eigen::Vector4d ref = orientations.front().coeffs();
  Eigen::Vector4d sum = Eigen::Vector4d::Zero();
  for (const Quat& q : orientations) {
    Eigen::Vector4d c = q.coeffs();
    sum += c.dot(ref) < 0.0 ? Eigen::Vector4d(-c) : c;
  }
  Quat mean;
  mean.coeffs() = sum;
  if (mean.norm() < 1e-12) {
    return orientations.front().normalized();
  }
  return mean.normalized();
}

Pose average_pose(std::span<const Pose> poses) {
  if (poses.empty()) {
    return Pose::identity();
  }
  Vec3 p = Vec3::Zero();
  std::vector<Quat> qs;
  qs.reserve(poses.size());
  for (const Pose& pose : poses) {
    p += pose.position();
    qs.push_back(pose.orientation());
  }
  return Pose(p / static_cast<double>(poses.size()), average_orientation(qs));
}

}  // namespace hoiplan

#pragma once

#include <Eigen/Dense>

#include <cmath>

#include "radiant/errors.hpp"
#include "radiant/geometry.hpp"

namespace radiant {

/// Proper rigid motion p' = R p + t (meters).
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidTransform identity() { return {}; }

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 operator*(const Vec3& p) const { return apply(p); }

  /// (this ∘ other)(p) = this(other(p))
  RigidTransform operator*(const RigidTransform& other) const {
    return {rotation * other.rotation, rotation * other.translation + translation};
  }

  RigidTransform inverse() const {
    const Mat3 rt = rotation.transpose();
    return {rt, -(rt * translation)};
  }

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
  }

  /// Angle of the rotation part in degrees.
  double rotation_angle_deg() const {
    const Vec3 skew(rotation(2, 1) - rotation(1, 2), rotation(0, 2) - rotation(2, 0), rotation(1, 0) - rotation(0, 1));
    return rad_to_deg(std::atan2(0.5 * skew.norm(), 0.5 * (rotation.trace() - 1.0)));
  }

  bool is_orthonormal(double tol = 1e-9) const {
    return (rotation * rotation.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() <= tol &&
           std::abs(rotation.determinant() - 1.0) <= tol;
  }

  void validate(double tol = 1e-9) const {
    if (!rotation.allFinite() || !translation.allFinite()) {
      throw Error(ErrorKind::InvalidArgument, "rigid transform has non-finite entries");
    }
    if (!is_orthonormal(tol)) {
      throw Error(ErrorKind::InvalidArgument, "rigid transform rotation is not orthonormal with det 1");
    }
  }

  static RigidTransform from_matrix(const Eigen::Matrix4d& m) {
    return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
  }

  static RigidTransform from_axis_angle(const Vec3& axis, double angle_rad, const Vec3& t = Vec3::Zero()) {
    return {Eigen::AngleAxisd(angle_rad, axis.normalized()).toRotationMatrix(), t};
  }
};

/// Difference between two transforms: rotation angle (deg) and translation distance (m).
inline std::pair<double, double> transform_error(const RigidTransform& a, const RigidTransform& b) {
  const RigidTransform d = a.inverse() * b;
  return {d.rotation_angle_deg(), (a.translation - b.translation).norm()};
}

}  // namespace radiant

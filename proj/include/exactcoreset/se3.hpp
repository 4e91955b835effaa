#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "exactcoreset/quadratic.hpp"

namespace exactcoreset {

/// Rigid transform. Tangent vectors are ordered [rotation; translation] and
/// applied right-multiplicatively: T' = T * exp(delta).
struct Pose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return rotation * p + translation; }
};

Eigen::Matrix3d skew(const Eigen::Vector3d& v);

Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);

/// a^-1 * b, the relative pose.
Pose between(const Pose& a, const Pose& b);

/// SE(3) exponential map, [rotation; translation] tangent ordering.
Pose exp_se3(const Vector6d& tangent);
Vector6d log_se3(const Pose& p);

/// T * exp(delta); restores orthonormality if accumulated drift exceeds 1e-9.
Pose retract(const Pose& p, const Vector6d& delta);

double orthonormality_drift(const Pose& p);
Pose renormalized(const Pose& p);

double rotation_angle(const Eigen::Matrix3d& r);

}  // namespace exactcoreset

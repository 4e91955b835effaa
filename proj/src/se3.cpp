#include "exactcoreset/se3.hpp"

#include <cmath>

namespace exactcoreset {

namespace {
constexpr double kDriftLimit = 1e-9;
}

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(),  //
      v.z(), 0.0, -v.x(),   //
      -v.y(), v.x(), 0.0;
  return m;
}

Pose compose(const Pose& a, const Pose& b) {
  Pose out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  if (orthonormality_drift(out) > kDriftLimit) {
    out = renormalized(out);
  }
  return out;
}

Pose inverse(const Pose& p) {
  Pose out;
  out.rotation = p.rotation.transpose();
  out.translation = -(out.rotation * p.translation);
  return out;
}

Pose between(const Pose& a, const Pose& b) { return compose(inverse(a), b); }

Pose exp_se3(const Vector6d& tangent) {
  const Eigen::Vector3d omega = tangent.head<3>();
  const Eigen::Vector3d rho = tangent.tail<3>();
  const double theta = omega.norm();
  const Eigen::Matrix3d w = skew(omega);

  double a;  // sin(theta)/theta
  double b;  // (1 - cos(theta))/theta^2
  double c;  // (theta - sin(theta))/theta^3
  if (theta < 1e-8) {
    a = 1.0 - theta * theta / 6.0;
    b = 0.5 - theta * theta / 24.0;
    c = 1.0 / 6.0 - theta * theta / 120.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
    c = (theta - std::sin(theta)) / (theta * theta * theta);
  }

  Pose out;
  out.rotation = Eigen::Matrix3d::Identity() + a * w + b * w * w;
  const Eigen::Matrix3d v = Eigen::Matrix3d::Identity() + b * w + c * w * w;
  out.translation = v * rho;
  return out;
}

Vector6d log_se3(const Pose& p) {
  const double cos_theta = std::clamp((p.rotation.trace() - 1.0) * 0.5, -1.0, 1.0);
  const double theta = std::acos(cos_theta);

  Eigen::Vector3d omega;
  if (theta < 1e-8) {
    omega = 0.5 * Eigen::Vector3d(p.rotation(2, 1) - p.rotation(1, 2),
                                  p.rotation(0, 2) - p.rotation(2, 0),
                                  p.rotation(1, 0) - p.rotation(0, 1));
  } else if (theta > M_PI - 1e-6) {
    // Near pi the axis comes from the symmetric part.
    const Eigen::Matrix3d s = 0.5 * (p.rotation + Eigen::Matrix3d::Identity());
    Eigen::Vector3d axis;
    int k = 0;
    s.diagonal().maxCoeff(&k);
    axis = s.col(k) / std::sqrt(s(k, k));
    axis.normalize();
    omega = theta * axis;
  } else {
    const double scale = theta / (2.0 * std::sin(theta));
    omega = scale * Eigen::Vector3d(p.rotation(2, 1) - p.rotation(1, 2),
                                    p.rotation(0, 2) - p.rotation(2, 0),
                                    p.rotation(1, 0) - p.rotation(0, 1));
  }

  const Eigen::Matrix3d w = skew(omega);
  Eigen::Matrix3d v_inv;
  if (theta < 1e-8) {
    v_inv = Eigen::Matrix3d::Identity() - 0.5 * w + (1.0 / 12.0) * w * w;
  } else {
    const double half = 0.5 * theta;
    const double coeff = (1.0 - half * std::cos(half) / std::sin(half)) / (theta * theta);
    v_inv = Eigen::Matrix3d::Identity() - 0.5 * w + coeff * w * w;
  }

  Vector6d out;
  out.head<3>() = omega;
  out.tail<3>() = v_inv * p.translation;
  return out;
}

Pose retract(const Pose& p, const Vector6d& delta) { return compose(p, exp_se3(delta)); }

double orthonormality_drift(const Pose& p) {
  return (p.rotation.transpose() * p.rotation - Eigen::Matrix3d::Identity())
      .cwiseAbs()
      .maxCoeff();
}

Pose renormalized(const Pose& p) {
  Eigen::Quaterniond q(p.rotation);
  q.normalize();
  Pose out;
  out.rotation = q.toRotationMatrix();
  out.translation = p.translation;
  return out;
}

double rotation_angle(const Eigen::Matrix3d& r) {
  return std::acos(std::clamp((r.trace() - 1.0) * 0.5, -1.0, 1.0));
}

}  // namespace exactcoreset

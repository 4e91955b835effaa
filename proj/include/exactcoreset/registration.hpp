#pragma once

#include <Eigen/Core>
#include <vector>

#include "exactcoreset/point_cloud.hpp"
#include "exactcoreset/quadratic.hpp"
#include "exactcoreset/se3.hpp"

namespace exactcoreset {

/// One matched point pair with its whitener. phi is the lower-triangular
/// Cholesky factor of Omega = (C_target + R C_source R^T)^-1 at the pose the
/// correspondence was formed at; it stays fixed afterwards so the residual
/// e = phi^T d keeps e^T e = d^T Omega d at that pose.
struct Correspondence {
  Eigen::Index source_index = 0;
  Eigen::Index target_index = 0;
  Eigen::Matrix3d phi = Eigen::Matrix3d::Identity();
};

/// Whitener for one pair of covariances under relative rotation r_ij.
Eigen::Matrix3d whitener(const Eigen::Matrix3d& cov_target, const Eigen::Matrix3d& cov_source,
                         const Eigen::Matrix3d& r_ij);

/// Nearest-target-mean match for every source point under t_ij, capped at
/// max_dist. Throws NoOverlap when nothing matches.
std::vector<Correspondence> find_correspondences(const GaussianPointCloud& target,
                                                 const GaussianPointCloud& source,
                                                 const Pose& t_ij, double max_dist);

/// Whitened residual phi^T (mu_target - T_ij mu_source) at the current poses.
Eigen::Vector3d residual(const Correspondence& corr, const GaussianPointCloud& target,
                         const GaussianPointCloud& source, const Pose& t_i, const Pose& t_j);

/// Analytic d(residual)/d(tangent of T_j), phi held fixed. Rotation block
/// first, translation block second.
Eigen::Matrix<double, 3, 6> jacobian(const Correspondence& corr, const GaussianPointCloud& target,
                                     const GaussianPointCloud& source, const Pose& t_i,
                                     const Pose& t_j);

/// Stacked scalar residual system, rows ordered (pair 0: x, y, z, pair 1: ...).
ResidualSystem linearize_pair(const std::vector<Correspondence>& correspondences,
                              const GaussianPointCloud& target, const GaussianPointCloud& source,
                              const Pose& t_i, const Pose& t_j);

}  // namespace exactcoreset

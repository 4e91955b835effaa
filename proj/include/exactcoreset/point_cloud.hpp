#pragma once

#include <Eigen/Core>
#include <vector>

namespace exactcoreset {

/// GICP-style cloud: every point carries a mean and a PSD covariance that
/// models the local surface shape.
struct GaussianPointCloud {
  std::vector<Eigen::Vector3d> means;
  std::vector<Eigen::Matrix3d> covariances;

  std::size_t size() const { return means.size(); }
};

struct CovarianceConfig {
  int k_neighbors = 10;
  // Regularized eigenvalues become lambda_max * (epsilon, 1, 1).
  double epsilon = 1e-3;
};

/// Per-point covariance of the k nearest neighbors (the point itself
/// included), eigenvalue-regularized toward a plane model.
GaussianPointCloud estimate_covariances(const std::vector<Eigen::Vector3d>& points,
                                        const CovarianceConfig& config = {});

}  // namespace exactcoreset

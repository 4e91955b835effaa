#include "exactcoreset/point_cloud.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>

#include "exactcoreset/errors.hpp"
#include "exactcoreset/kdtree.hpp"
#include "exactcoreset/parallel.hpp"

namespace exactcoreset {

GaussianPointCloud estimate_covariances(const std::vector<Eigen::Vector3d>& points,
                                        const CovarianceConfig& config) {
  const int k = config.k_neighbors;
  if (k < 4) {
    throw TooFewPoints("k_neighbors must be at least 4, got " + std::to_string(k));
  }
  if (points.size() < static_cast<std::size_t>(k)) {
    throw TooFewPoints("need at least " + std::to_string(k) + " points, got " +
                       std::to_string(points.size()));
  }

  const KdTree3 tree(points);
  GaussianPointCloud cloud;
  cloud.means = points;
  cloud.covariances.resize(points.size());

  parallel_for(static_cast<std::int64_t>(points.size()), [&](std::int64_t i) {
    const auto idx = static_cast<std::size_t>(i);
    const std::vector<int> nn = tree.knn(points[idx], k);

    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const int j : nn) {
      mean += points[static_cast<std::size_t>(j)];
    }
    mean /= static_cast<double>(nn.size());

    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const int j : nn) {
      const Eigen::Vector3d d = points[static_cast<std::size_t>(j)] - mean;
      cov += d * d.transpose();
    }
    cov /= static_cast<double>(nn.size());

    // Plane-favoring regularization: keep the eigenvectors, replace the
    // eigenvalues by lambda_max * (eps, 1, 1).
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    const double lambda_max = std::max(eig.eigenvalues()(2), 1e-12);
    const Eigen::Vector3d values(config.epsilon * lambda_max, lambda_max, lambda_max);
    cloud.covariances[idx] =
        eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
  });

  return cloud;
}

}  // namespace exactcoreset

#include "exactcoreset/registration.hpp"

#include <Eigen/Cholesky>

#include "exactcoreset/errors.hpp"
#include "exactcoreset/kdtree.hpp"
#include "exactcoreset/parallel.hpp"

namespace exactcoreset {

Eigen::Matrix3d whitener(const Eigen::Matrix3d& cov_target, const Eigen::Matrix3d& cov_source,
                         const Eigen::Matrix3d& r_ij) {
  const Eigen::Matrix3d fused = cov_target + r_ij * cov_source * r_ij.transpose();
  const Eigen::Matrix3d omega = fused.inverse();
  return Eigen::LLT<Eigen::Matrix3d>(omega).matrixL();
}

std::vector<Correspondence> find_correspondences(const GaussianPointCloud& target,
                                                 const GaussianPointCloud& source,
                                                 const Pose& t_ij, double max_dist) {
  if (target.size() == 0 || source.size() == 0) {
    throw NoOverlap("empty cloud");
  }
  const KdTree3 tree(target.means);

  std::vector<int> match(source.size(), -1);
  parallel_for(static_cast<std::int64_t>(source.size()), [&](std::int64_t i) {
    const auto idx = static_cast<std::size_t>(i);
    match[idx] = tree.nearest(t_ij.apply(source.means[idx]), max_dist);
  });

  std::vector<Correspondence> out;
  out.reserve(source.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (match[i] < 0) {
      continue;
    }
    Correspondence corr;
    corr.source_index = static_cast<Eigen::Index>(i);
    corr.target_index = match[i];
    corr.phi = whitener(target.covariances[static_cast<std::size_t>(match[i])],
                        source.covariances[i], t_ij.rotation);
    out.push_back(corr);
  }
  if (out.empty()) {
    throw NoOverlap("no source point found a target neighbor within " + std::to_string(max_dist));
  }
  return out;
}

Eigen::Vector3d residual(const Correspondence& corr, const GaussianPointCloud& target,
                         const GaussianPointCloud& source, const Pose& t_i, const Pose& t_j) {
  const Pose t_ij = between(t_i, t_j);
  const Eigen::Vector3d d =
      target.means[static_cast<std::size_t>(corr.target_index)] -
      t_ij.apply(source.means[static_cast<std::size_t>(corr.source_index)]);
  return corr.phi.transpose() * d;
}

Eigen::Matrix<double, 3, 6> jacobian(const Correspondence& corr, const GaussianPointCloud& target,
                                     const GaussianPointCloud& source, const Pose& t_i,
                                     const Pose& t_j) {
  (void)target;
  const Pose t_ij = between(t_i, t_j);
  const Eigen::Vector3d& mu = source.means[static_cast<std::size_t>(corr.source_index)];
  Eigen::Matrix<double, 3, 6> j;
  const Eigen::Matrix3d phi_t_r = corr.phi.transpose() * t_ij.rotation;
  j.leftCols<3>() = phi_t_r * skew(mu);
  j.rightCols<3>() = -phi_t_r;
  return j;
}

ResidualSystem linearize_pair(const std::vector<Correspondence>& correspondences,
                              const GaussianPointCloud& target, const GaussianPointCloud& source,
                              const Pose& t_i, const Pose& t_j) {
  if (correspondences.empty()) {
    throw NoOverlap("cannot linearize a pair without correspondences");
  }
  const Pose t_ij = between(t_i, t_j);
  const Eigen::Index n = static_cast<Eigen::Index>(correspondences.size());

  ResidualSystem system;
  system.residuals.resize(3 * n);
  system.jacobian.resize(3 * n, kTangentDim);

  for (Eigen::Index k = 0; k < n; ++k) {
    const Correspondence& corr = correspondences[static_cast<std::size_t>(k)];
    const Eigen::Vector3d& mu = source.means[static_cast<std::size_t>(corr.source_index)];
    const Eigen::Vector3d d =
        target.means[static_cast<std::size_t>(corr.target_index)] - t_ij.apply(mu);
    const Eigen::Matrix3d phi_t_r = corr.phi.transpose() * t_ij.rotation;

    system.residuals.segment<3>(3 * k) = corr.phi.transpose() * d;
    system.jacobian.block<3, 3>(3 * k, 0) = phi_t_r * skew(mu);
    system.jacobian.block<3, 3>(3 * k, 3) = -phi_t_r;
  }
  return system;
}

}  // namespace exactcoreset

#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "exactcoreset/errors.hpp"
#include "exactcoreset/registration.hpp"
#include "exactcoreset/rng.hpp"
#include "exactcoreset/synthetic.hpp"

using namespace exactcoreset;

namespace {

std::vector<Eigen::Vector3d> random_points(int n, std::uint64_t seed, double spread = 3.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-spread, spread);
  std::vector<Eigen::Vector3d> points(static_cast<std::size_t>(n));
  for (auto& p : points) {
    p = Eigen::Vector3d(unit(rng), unit(rng), unit(rng));
  }
  return points;
}

GaussianPointCloud cloud_with_identity_covs(const std::vector<Eigen::Vector3d>& points) {
  GaussianPointCloud cloud;
  cloud.means = points;
  cloud.covariances.assign(points.size(), Eigen::Matrix3d::Identity());
  return cloud;
}

Pose random_pose(std::mt19937_64& rng, double max_angle_rad, double max_translation) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector6d tangent;
  tangent.head<3>() = max_angle_rad * unit(rng) * random_unit_vector(rng);
  tangent.tail<3>() = max_translation * unit(rng) * random_unit_vector(rng);
  return exp_se3(tangent);
}

GaussianPointCloud random_gaussian_cloud(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GaussianPointCloud cloud;
  cloud.means = random_points(n, seed + 1);
  std::uniform_real_distribution<double> unit(0.2, 1.5);
  for (int i = 0; i < n; ++i) {
    // Random PSD covariance with bounded anisotropy.
    Eigen::Matrix3d a;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        a(r, c) = unit(rng) - 0.85;
      }
    }
    cloud.covariances.push_back(a * a.transpose() + 0.05 * Eigen::Matrix3d::Identity());
  }
  return cloud;
}

}  // namespace

TEST_CASE("covariance estimation regularizes coplanar neighborhoods") {
  // 10 coplanar points (z = 0).
  std::vector<Eigen::Vector3d> points;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    points.emplace_back(unit(rng), unit(rng), 0.0);
  }
  CovarianceConfig config;
  config.k_neighbors = 10;
  const GaussianPointCloud cloud = estimate_covariances(points, config);
  for (const auto& cov : cloud.covariances) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    CHECK(eig.eigenvalues()(0) ==
          doctest::Approx(1e-3 * eig.eigenvalues()(2)).epsilon(1e-9));
  }
}

TEST_CASE("covariances on a sphere are symmetric PSD") {
  std::mt19937_64 rng(9);
  std::vector<Eigen::Vector3d> points;
  for (int i = 0; i < 300; ++i) {
    points.push_back(random_unit_vector(rng));
  }
  CovarianceConfig config;
  config.k_neighbors = 9;
  const GaussianPointCloud cloud = estimate_covariances(points, config);
  for (const auto& cov : cloud.covariances) {
    CHECK((cov - cov.transpose()).cwiseAbs().maxCoeff() < 1e-14);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    CHECK(eig.eigenvalues()(0) >= 0.0);
  }
}

TEST_CASE("covariance estimation rejects too-small inputs") {
  CovarianceConfig config;
  config.k_neighbors = 12;
  CHECK_THROWS_AS(estimate_covariances(random_points(8, 2), config), TooFewPoints);
  config.k_neighbors = 3;
  CHECK_THROWS_AS(estimate_covariances(random_points(8, 2), config), TooFewPoints);
}

TEST_CASE("identical clouds match to themselves under the identity") {
  const GaussianPointCloud cloud = cloud_with_identity_covs(random_points(120, 15));
  const auto corrs = find_correspondences(cloud, cloud, Pose{}, 0.5);
  REQUIRE(corrs.size() == cloud.size());
  for (const auto& corr : corrs) {
    CHECK(corr.source_index == corr.target_index);
  }
}

TEST_CASE("disjoint clouds raise NoOverlap") {
  const auto base = random_points(50, 16, 1.0);
  GaussianPointCloud target = cloud_with_identity_covs(base);
  auto moved = base;
  for (auto& p : moved) {
    p += Eigen::Vector3d(100.0, 0.0, 0.0);
  }
  GaussianPointCloud source = cloud_with_identity_covs(moved);
  CHECK_THROWS_AS(find_correspondences(target, source, Pose{}, 0.5), NoOverlap);
}

TEST_CASE("correspondences match the exhaustive search oracle") {
  const GaussianPointCloud target = cloud_with_identity_covs(random_points(2400, 17));
  const GaussianPointCloud source = cloud_with_identity_covs(random_points(500, 18));
  std::mt19937_64 rng(19);
  const Pose t_ij = random_pose(rng, 0.3, 0.5);
  const double max_dist = 0.6;

  const auto corrs = find_correspondences(target, source, t_ij, max_dist);

  std::size_t expected = 0;
  for (std::size_t s = 0; s < source.size(); ++s) {
    const Eigen::Vector3d q = t_ij.apply(source.means[s]);
    int best = -1;
    double best_sq = max_dist * max_dist;
    for (std::size_t t = 0; t < target.size(); ++t) {
      const double d = (target.means[t] - q).squaredNorm();
      if (d < best_sq || (d == best_sq && best == -1)) {
        best_sq = d;
        best = static_cast<int>(t);
      }
    }
    if (best < 0) {
      continue;
    }
    REQUIRE(expected < corrs.size());
    CHECK(corrs[expected].source_index == static_cast<Eigen::Index>(s));
    CHECK(corrs[expected].target_index == best);
    ++expected;
  }
  CHECK(corrs.size() == expected);
}

TEST_CASE("whitener satisfies phi phi^T = omega") {
  std::mt19937_64 rng(20);
  for (int i = 0; i < 50; ++i) {
    const GaussianPointCloud cloud = random_gaussian_cloud(2, rng());
    const Pose t_ij = random_pose(rng, 0.8, 2.0);
    const Eigen::Matrix3d phi =
        whitener(cloud.covariances[0], cloud.covariances[1], t_ij.rotation);
    const Eigen::Matrix3d omega =
        (cloud.covariances[0] + t_ij.rotation * cloud.covariances[1] * t_ij.rotation.transpose())
            .inverse();
    CHECK((phi * phi.transpose() - omega).cwiseAbs().maxCoeff() <=
          1e-10 * omega.cwiseAbs().maxCoeff());
    // Lower triangular.
    CHECK(phi(0, 1) == 0.0);
    CHECK(phi(0, 2) == 0.0);
    CHECK(phi(1, 2) == 0.0);
  }
}

TEST_CASE("residual vanishes at perfect alignment") {
  const GaussianPointCloud target = cloud_with_identity_covs({{1.0, 2.0, 3.0}});
  const GaussianPointCloud source = cloud_with_identity_covs({{0.5, -1.0, 0.25}});
  std::mt19937_64 rng(21);
  const Pose t_j = random_pose(rng, 0.5, 1.0);
  // Place the target mean exactly where the source maps to.
  GaussianPointCloud aligned = target;
  aligned.means[0] = t_j.apply(source.means[0]);

  Correspondence corr;
  corr.phi = whitener(aligned.covariances[0], source.covariances[0], t_j.rotation);
  CHECK(residual(corr, aligned, source, Pose{}, t_j).norm() < 1e-12);
}

TEST_CASE("whitened residual reproduces the closed-form arithmetic case") {
  // mu' = (1,0,0), mu = 0, identity poses, C = C' = I.
  const GaussianPointCloud target = cloud_with_identity_covs({{1.0, 0.0, 0.0}});
  const GaussianPointCloud source = cloud_with_identity_covs({{0.0, 0.0, 0.0}});
  Correspondence corr;
  corr.phi = whitener(target.covariances[0], source.covariances[0], Eigen::Matrix3d::Identity());
  const Eigen::Vector3d e = residual(corr, target, source, Pose{}, Pose{});
  CHECK(e.x() == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(std::abs(e.y()) < 1e-15);
  CHECK(std::abs(e.z()) < 1e-15);
  CHECK(e.squaredNorm() == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("whitening identity e^T e = d^T omega d holds for random configurations") {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 100; ++i) {
    const GaussianPointCloud target = random_gaussian_cloud(1, rng());
    const GaussianPointCloud source = random_gaussian_cloud(1, rng());
    const Pose t_i = random_pose(rng, 0.6, 2.0);
    const Pose t_j = random_pose(rng, 0.6, 2.0);
    const Pose t_ij = between(t_i, t_j);

    Correspondence corr;
    corr.phi = whitener(target.covariances[0], source.covariances[0], t_ij.rotation);
    const Eigen::Vector3d e = residual(corr, target, source, t_i, t_j);

    const Eigen::Vector3d d = target.means[0] - t_ij.apply(source.means[0]);
    const Eigen::Matrix3d omega =
        (target.covariances[0] +
         t_ij.rotation * source.covariances[0] * t_ij.rotation.transpose())
            .inverse();
    const double quad = d.dot(omega * d);
    CHECK(e.squaredNorm() == doctest::Approx(quad).epsilon(1e-12));
  }
}

namespace {

// Central finite differences of the whitened residual w.r.t. the T_j tangent,
// phi fixed.
Eigen::Matrix<double, 3, 6> jacobian_fd(const Correspondence& corr,
                                        const GaussianPointCloud& target,
                                        const GaussianPointCloud& source, const Pose& t_i,
                                        const Pose& t_j, double step = 1e-6) {
  Eigen::Matrix<double, 3, 6> j;
  for (int k = 0; k < 6; ++k) {
    Vector6d delta = Vector6d::Zero();
    delta(k) = step;
    const Eigen::Vector3d plus = residual(corr, target, source, t_i, retract(t_j, delta));
    delta(k) = -step;
    const Eigen::Vector3d minus = residual(corr, target, source, t_i, retract(t_j, delta));
    j.col(k) = (plus - minus) / (2.0 * step);
  }
  return j;
}

}  // namespace

TEST_CASE("translation block of the jacobian is -phi^T R_ij") {
  std::mt19937_64 rng(23);
  const GaussianPointCloud source = random_gaussian_cloud(1, rng());
  const Pose t_i = random_pose(rng, 0.5, 1.0);
  const Pose t_j = random_pose(rng, 0.5, 1.0);
  const Pose t_ij = between(t_i, t_j);

  GaussianPointCloud target = random_gaussian_cloud(1, rng());
  target.means[0] = t_ij.apply(source.means[0]);  // e = 0 configuration

  Correspondence corr;
  corr.phi = whitener(target.covariances[0], source.covariances[0], t_ij.rotation);
  const auto j = jacobian(corr, target, source, t_i, t_j);
  const Eigen::Matrix3d expected = -corr.phi.transpose() * t_ij.rotation;
  CHECK((j.rightCols<3>() - expected).cwiseAbs().maxCoeff() < 1e-12);

  const auto fd = jacobian_fd(corr, target, source, t_i, t_j);
  CHECK((j.rightCols<3>() - fd.rightCols<3>()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("rotation block matches finite differences under pure translation offsets") {
  const GaussianPointCloud target = cloud_with_identity_covs({{0.4, -0.7, 1.3}});
  const GaussianPointCloud source = cloud_with_identity_covs({{1.0, 2.0, -0.5}});
  Pose t_j;
  t_j.translation = Eigen::Vector3d(0.3, 0.1, -0.2);  // identity rotations

  Correspondence corr;
  corr.phi = whitener(target.covariances[0], source.covariances[0], t_j.rotation);
  const auto j = jacobian(corr, target, source, Pose{}, t_j);
  const auto fd = jacobian_fd(corr, target, source, Pose{}, t_j);
  CHECK((j.leftCols<3>() - fd.leftCols<3>()).cwiseAbs().maxCoeff() <=
        1e-5 * std::max(1.0, fd.cwiseAbs().maxCoeff()));
  // With R_ij = I the rotation block is phi^T [mu]x up to sign convention;
  // finite differences pin the sign.
  const Eigen::Matrix3d pattern = corr.phi.transpose() * skew(source.means[0]);
  CHECK((j.leftCols<3>() - pattern).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("analytic jacobian matches finite differences on 100 random configurations") {
  std::mt19937_64 rng(24);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const GaussianPointCloud target = random_gaussian_cloud(1, rng());
    const GaussianPointCloud source = random_gaussian_cloud(1, rng());
    const Pose t_i = random_pose(rng, 30.0 * M_PI / 180.0, 2.0);
    const Pose t_j = random_pose(rng, 30.0 * M_PI / 180.0, 2.0);
    const Pose t_ij = between(t_i, t_j);

    Correspondence corr;
    corr.phi = whitener(target.covariances[0], source.covariances[0], t_ij.rotation);
    const auto j = jacobian(corr, target, source, t_i, t_j);
    const auto fd = jacobian_fd(corr, target, source, t_i, t_j);
    const double rel =
        (j - fd).cwiseAbs().maxCoeff() / std::max(fd.cwiseAbs().maxCoeff(), 1e-12);
    worst = std::max(worst, rel);
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("linearize_pair stacks rows point-major") {
  const GaussianPointCloud target = cloud_with_identity_covs(random_points(40, 25));
  const GaussianPointCloud source = cloud_with_identity_covs(random_points(40, 26));
  const auto corrs = find_correspondences(target, source, Pose{}, 5.0);
  REQUIRE(!corrs.empty());
  const ResidualSystem system = linearize_pair(corrs, target, source, Pose{}, Pose{});
  CHECK(system.rows() == 3 * static_cast<Eigen::Index>(corrs.size()));

  // Row blocks agree with the per-correspondence functions.
  for (std::size_t k = 0; k < corrs.size(); ++k) {
    const Eigen::Vector3d e = residual(corrs[k], target, source, Pose{}, Pose{});
    const auto j = jacobian(corrs[k], target, source, Pose{}, Pose{});
    CHECK((system.residuals.segment<3>(3 * static_cast<Eigen::Index>(k)) - e).norm() < 1e-15);
    CHECK((system.jacobian.block<3, 6>(3 * static_cast<Eigen::Index>(k), 0) - j)
              .cwiseAbs()
              .maxCoeff() < 1e-15);
  }
}

TEST_CASE("single correspondence yields three rows") {
  const GaussianPointCloud target = cloud_with_identity_covs({{0.0, 0.0, 0.0}});
  const GaussianPointCloud source = cloud_with_identity_covs({{0.05, 0.0, 0.0}});
  const auto corrs = find_correspondences(target, source, Pose{}, 1.0);
  REQUIRE(corrs.size() == 1);
  CHECK(linearize_pair(corrs, target, source, Pose{}, Pose{}).rows() == 3);
}

TEST_CASE("perfect alignment gives zero cost and gradient") {
  const auto points = random_points(200, 27);
  const GaussianPointCloud cloud = cloud_with_identity_covs(points);
  const auto corrs = find_correspondences(cloud, cloud, Pose{}, 0.5);
  const ResidualSystem system = linearize_pair(corrs, cloud, cloud, Pose{}, Pose{});
  const QuadraticModel model = quadratic_of(system);
  CHECK(model.c == 0.0);
  CHECK(model.b.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("pair Hessian matches the per-point accumulation oracle on a large pair") {
  std::mt19937_64 rng(28);
  const auto base = random_points(10000, 29, 8.0);
  GaussianPointCloud target = cloud_with_identity_covs(base);
  auto jittered = base;
  std::normal_distribution<double> noise(0.0, 0.01);
  for (auto& p : jittered) {
    p += Eigen::Vector3d(noise(rng), noise(rng), noise(rng));
  }
  const GaussianPointCloud source = cloud_with_identity_covs(jittered);

  const auto corrs = find_correspondences(target, source, Pose{}, 0.5);
  REQUIRE(corrs.size() == base.size());
  const ResidualSystem system = linearize_pair(corrs, target, source, Pose{}, Pose{});
  const QuadraticModel fast = quadratic_of(system);

  Matrix6d oracle = Matrix6d::Zero();
  for (const auto& corr : corrs) {
    const auto j = jacobian(corr, target, source, Pose{}, Pose{});
    oracle += j.transpose() * j;
  }
  CHECK((fast.H - oracle).cwiseAbs().maxCoeff() <= 1e-10 * oracle.cwiseAbs().maxCoeff());
}

TEST_CASE("cost is symmetric under frame swap with mirrored correspondences") {
  std::mt19937_64 rng(30);
  const GaussianPointCloud cloud_a = random_gaussian_cloud(60, 31);
  const GaussianPointCloud cloud_b = random_gaussian_cloud(60, 32);
  const Pose t_i = random_pose(rng, 0.4, 1.0);
  const Pose t_j = random_pose(rng, 0.4, 1.0);
  const Pose t_ij = between(t_i, t_j);
  const Pose t_ji = inverse(t_ij);

  double cost_ij = 0.0;
  double cost_ji = 0.0;
  for (Eigen::Index k = 0; k < 60; ++k) {
    Correspondence forward;
    forward.source_index = k;
    forward.target_index = k;
    forward.phi = whitener(cloud_a.covariances[static_cast<std::size_t>(k)],
                           cloud_b.covariances[static_cast<std::size_t>(k)], t_ij.rotation);
    cost_ij += residual(forward, cloud_a, cloud_b, t_i, t_j).squaredNorm();

    Correspondence mirrored;
    mirrored.source_index = k;
    mirrored.target_index = k;
    mirrored.phi = whitener(cloud_b.covariances[static_cast<std::size_t>(k)],
                            cloud_a.covariances[static_cast<std::size_t>(k)], t_ji.rotation);
    cost_ji += residual(mirrored, cloud_b, cloud_a, t_j, t_i).squaredNorm();
  }
  CHECK(cost_ij == doctest::Approx(cost_ji).epsilon(1e-9));
}

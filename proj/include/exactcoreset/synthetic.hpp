#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "exactcoreset/point_cloud.hpp"
#include "exactcoreset/se3.hpp"

namespace exactcoreset {

/// Synthetic desk-scale world: frames on a circular loop scanning a fixed
/// scene of planes and spheres. Ground truth is exact by construction; the
/// initial guess perturbs every pose except frame 0.
struct SyntheticConfig {
  int frames = 20;
  double loop_radius = 8.0;
  int points_per_frame = 2000;
  double sensor_range = 12.0;
  double point_noise = 0.004;           // isotropic, meters
  double init_rotation_noise_deg = 1.2;  // per-frame angle, axis uniform
  double init_translation_noise = 0.05;  // meters, per axis
  int k_neighbors = 10;
  std::uint64_t seed = 0;
};

struct SyntheticWorld {
  std::vector<GaussianPointCloud> clouds;  // frame-local, covariances estimated
  std::vector<Pose> gt_poses;
  std::vector<Pose> init_poses;
};

SyntheticWorld make_synthetic_world(const SyntheticConfig& config);

/// Two overlapping frames with a small baseline, aligned at ground truth.
/// Convenient input for the pairwise evaluation experiments.
struct AlignedPair {
  GaussianPointCloud target;  // frame i
  GaussianPointCloud source;  // frame j
  Pose pose_i;
  Pose pose_j;
};

AlignedPair make_aligned_pair(std::uint64_t seed, int points_per_frame = 3500);

/// Axis drawn uniformly on the sphere.
Eigen::Vector3d random_unit_vector(std::mt19937_64& rng);

}  // namespace exactcoreset

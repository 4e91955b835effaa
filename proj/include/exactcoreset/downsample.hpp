#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "exactcoreset/quadratic.hpp"
#include "exactcoreset/registration.hpp"
#include "exactcoreset/se3.hpp"

namespace exactcoreset {

using Matrix12d = Eigen::Matrix<double, 12, 12>;
using Vector12d = Eigen::Matrix<double, 12, 1>;

/// Quadratic model over the stacked pair tangent [delta_i; delta_j].
struct PairQuadratic {
  Matrix12d H = Matrix12d::Zero();
  Vector12d b = Vector12d::Zero();
  double c = 0.0;
};

/// An immutable registration factor between two frames. Only the
/// correspondences referenced by the selection are stored; selection indices
/// address the stacked rows of that stored subset (3 * slot + axis).
struct SampledFactor {
  int frame_i = 0;
  int frame_j = 0;
  Pose eval_pose_i;
  Pose eval_pose_j;
  std::vector<Correspondence> correspondences;
  ResidualSelection selection;
  /// Row count of the stacked system the selection was extracted from.
  Eigen::Index extraction_rows = 0;
};

struct DownsampleConfig {
  Eigen::Index target_residuals = 29;  // M
  Eigen::Index cluster_count = 64;     // K
  std::uint64_t rng_seed = 0;
  double max_correspondence_dist = 1.0;
  NullspaceMethod nullspace = NullspaceMethod::kLU;
};

/// Shuffles the source points, linearizes the pair at the evaluation poses and
/// extracts a weighted residual subset that reproduces (H, b, c) exactly
/// there.
SampledFactor exact_downsample(const GaussianPointCloud& cloud_i,
                               const GaussianPointCloud& cloud_j, const Pose& eval_pose_i,
                               const Pose& eval_pose_j, const DownsampleConfig& config,
                               CoresetProfile* profile = nullptr);

/// Factor carrying every residual row with unit weight (the no-downsampling
/// reference; same evaluation path as sampled factors).
SampledFactor make_full_factor(const GaussianPointCloud& cloud_i,
                               const GaussianPointCloud& cloud_j, const Pose& eval_pose_i,
                               const Pose& eval_pose_j, double max_correspondence_dist = 1.0);

struct RelinearizeOptions {
  /// Recompute whiteners at the current relative pose instead of using the
  /// stored ones (comparison runs only; breaks the exactness guarantee).
  bool refresh_whitener = false;
};

/// Weighted linearization of the selected rows at the current poses over the
/// 12-dim pair tangent. At the evaluation poses this equals the full-set
/// linearization, cross blocks included. row_counter, when given, is
/// incremented once per evaluated scalar row.
PairQuadratic relinearize(const SampledFactor& factor, const GaussianPointCloud& cloud_i,
                          const GaussianPointCloud& cloud_j, const Pose& t_i, const Pose& t_j,
                          const RelinearizeOptions& options = {},
                          std::size_t* row_counter = nullptr);

/// Weighted cost of the factor at the current poses (same rows as
/// relinearize, without assembling H and b).
double factor_cost(const SampledFactor& factor, const GaussianPointCloud& cloud_i,
                   const GaussianPointCloud& cloud_j, const Pose& t_i, const Pose& t_j,
                   const RelinearizeOptions& options = {}, std::size_t* row_counter = nullptr);

/// Fraction of distinct source points in the selection that carry all three
/// axes (diagnostic for selection granularity).
double fully_selected_fraction(const SampledFactor& factor);

}  // namespace exactcoreset

#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace exactcoreset {

/// Generic weighted points in R^L. Points are stored one per column so the
/// elimination algebra can operate on columns directly.
struct WeightedPointSet {
  Eigen::MatrixXd points;   // L x N
  Eigen::VectorXd weights;  // N, all >= 0

  Eigen::Index dim() const { return points.rows(); }
  Eigen::Index size() const { return points.cols(); }

  /// Componentwise weighted sum (the quantity every coreset call conserves).
  Eigen::VectorXd weighted_sum() const { return points * weights; }

  /// Throws DimensionMismatch / Error on inconsistent shapes or negative
  /// weights.
  void validate() const;
};

enum class NullspaceMethod {
  kLU,   // partial-pivot LU on a square subproblem, rank-revealing fallback
  kSVD,  // full SVD of the whole difference matrix; reference toggle for benchmarks
};

struct CoresetConfig {
  Eigen::Index target_size = 29;  // M
  Eigen::Index cluster_count = 64;  // K, must be >= L + 2
  std::uint64_t rng_seed = 0;
  NullspaceMethod nullspace = NullspaceMethod::kLU;
};

}  // namespace exactcoreset

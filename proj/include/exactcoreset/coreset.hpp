#pragma once

#include <Eigen/Core>
#include <vector>

#include "exactcoreset/weighted_point_set.hpp"

namespace exactcoreset {

/// Selected input columns and their new weights. Indices refer to the input
/// set, are strictly increasing, and every weight is positive (except on the
/// pass-through path, which returns the input weights unchanged).
struct CoresetResult {
  std::vector<Eigen::Index> indices;
  Eigen::VectorXd weights;

  Eigen::Index size() const { return static_cast<Eigen::Index>(indices.size()); }
};

/// Wall-clock breakdown of one extraction, filled when a profile pointer is
/// passed in. All times in seconds.
struct CoresetProfile {
  double flatten_seconds = 0.0;
  double cluster_means_seconds = 0.0;
  double caratheodory_seconds = 0.0;  // elimination passes, includes nullspace
  double nullspace_seconds = 0.0;
  int rounds = 0;           // clustered reduction rounds
  int nullspace_calls = 0;
};

/// A nonzero v with A v = 0 for a wide matrix A (cols > rows). The LU method
/// solves the leading square block with a free trailing variable set to 1 and
/// falls back to rank-revealing LU when the block is singular; the SVD method
/// is the slow reference used by benchmarks. Satisfies
/// |A v| <= 1e-9 * |A|_F * |v|. Throws NoNullspace when no reliable kernel
/// vector exists (full column rank; caller bug).
Eigen::VectorXd nullspace_vector(const Eigen::MatrixXd& A,
                                 NullspaceMethod method = NullspaceMethod::kLU,
                                 CoresetProfile* profile = nullptr);

/// Caratheodory's elimination algorithm: returns at most max(target_size, L+1)
/// points whose weighted sum equals the input weighted sum. If N <= target the
/// input is returned unchanged.
CoresetResult caratheodory(const WeightedPointSet& set, Eigen::Index target_size,
                           NullspaceMethod method = NullspaceMethod::kLU,
                           CoresetProfile* profile = nullptr);

/// Linear-time variant: reduces the set round by round through weighted
/// cluster means, then finishes with plain eliminations down to the target.
/// Output size lands in [max(M - K, L + 1), M].
CoresetResult fast_caratheodory(const WeightedPointSet& set, const CoresetConfig& config,
                                CoresetProfile* profile = nullptr);

}  // namespace exactcoreset

#pragma once

#include <Eigen/Core>
#include <vector>

#include "exactcoreset/coreset.hpp"
#include "exactcoreset/weighted_point_set.hpp"

namespace exactcoreset {

inline constexpr Eigen::Index kTangentDim = 6;
// 21 upper-triangular Hessian entries + 6 gradient entries + 1 constant.
inline constexpr Eigen::Index kFlattenedDim = 28;
// Minimum residual count that can carry an exact quadratic reconstruction.
inline constexpr Eigen::Index kMinResiduals = kFlattenedDim + 1;

using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Vector6d = Eigen::Matrix<double, 6, 1>;

/// Scalar residuals and their Jacobian rows at one linearization point.
struct ResidualSystem {
  Eigen::VectorXd residuals;  // N
  Eigen::MatrixXd jacobian;   // N x 6, row i = d residual_i / d tangent

  Eigen::Index rows() const { return residuals.size(); }
  void validate() const;
};

/// The quadratic error surrogate (H, b, c) with H = J^T J, b = J^T e,
/// c = e^T e.
struct QuadraticModel {
  Matrix6d H = Matrix6d::Zero();
  Vector6d b = Vector6d::Zero();
  double c = 0.0;
};

/// A weighted subset of residual rows. Indices are sorted, unique, and valid
/// for the system of n_source_rows rows; weights are strictly positive.
struct ResidualSelection {
  std::vector<Eigen::Index> row_indices;
  Eigen::VectorXd weights;
  Eigen::Index n_source_rows = 0;

  Eigen::Index size() const { return static_cast<Eigen::Index>(row_indices.size()); }
};

/// Flattens one residual row into the 28-dim vector
/// [upper-tri(a^T a) row-major | a^T e | e^2].
Eigen::Matrix<double, 28, 1> flatten_row(const Eigen::Matrix<double, 1, 6>& a, double e);

/// Weighted row subset that reproduces (H, b, c) of the full system exactly at
/// the linearization point. Weights come out rescaled so that weighted sums
/// (not means) are recovered; they plug directly into reconstruct().
ResidualSelection extract(const ResidualSystem& system, const CoresetConfig& config,
                          CoresetProfile* profile = nullptr);

/// (H, b, c) assembled from the selected rows only.
QuadraticModel reconstruct(const ResidualSystem& system, const ResidualSelection& selection);

/// (H, b, c) of the full system.
QuadraticModel quadratic_of(const ResidualSystem& system);

/// max(|dH|_inf, |db|_inf, |dc|) between two models; the validation metric.
double model_difference(const QuadraticModel& lhs, const QuadraticModel& rhs);

}  // namespace exactcoreset

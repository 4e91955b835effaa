#include "exactcoreset/quadratic.hpp"

#include <algorithm>
#include <chrono>

#include "exactcoreset/errors.hpp"

namespace exactcoreset {

void ResidualSystem::validate() const {
  if (jacobian.rows() != residuals.size()) {
    throw DimensionMismatch("jacobian has " + std::to_string(jacobian.rows()) +
                            " rows but residual vector has " + std::to_string(residuals.size()));
  }
  if (jacobian.cols() != kTangentDim) {
    throw DimensionMismatch("jacobian must have 6 columns, got " +
                            std::to_string(jacobian.cols()));
  }
}

Eigen::Matrix<double, 28, 1> flatten_row(const Eigen::Matrix<double, 1, 6>& a, double e) {
  Eigen::Matrix<double, 28, 1> out;
  Eigen::Index pos = 0;
  for (Eigen::Index r = 0; r < kTangentDim; ++r) {
    for (Eigen::Index c = r; c < kTangentDim; ++c) {
      out(pos++) = a(r) * a(c);
    }
  }
  for (Eigen::Index r = 0; r < kTangentDim; ++r) {
    out(pos++) = a(r) * e;
  }
  out(pos) = e * e;
  return out;
}

ResidualSelection extract(const ResidualSystem& system, const CoresetConfig& config,
                          CoresetProfile* profile) {
  system.validate();
  const Eigen::Index n = system.rows();
  if (n <= kFlattenedDim) {
    throw TooFewRows("need more than 28 residual rows, got " + std::to_string(n));
  }
  if (config.target_size < kMinResiduals) {
    throw InvalidTarget("target size must be at least 29, got " +
                        std::to_string(config.target_size));
  }
  if (config.cluster_count < kFlattenedDim + 2) {
    throw InvalidClusterCount("cluster count must be at least 30, got " +
                              std::to_string(config.cluster_count));
  }

  ResidualSelection selection;
  selection.n_source_rows = n;

  if (n <= config.target_size) {
    selection.row_indices.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      selection.row_indices[static_cast<std::size_t>(i)] = i;
    }
    selection.weights = Eigen::VectorXd::Ones(n);
    return selection;
  }

  const auto flatten_start = std::chrono::steady_clock::now();
  WeightedPointSet flattened;
  flattened.points.resize(kFlattenedDim, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    flattened.points.col(i) = flatten_row(system.jacobian.row(i), system.residuals(i));
  }
  flattened.weights = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  if (profile != nullptr) {
    profile->flatten_seconds +=
        std::chrono::duration<double>(std::chrono::steady_clock::now() - flatten_start).count();
  }

  CoresetResult core = fast_caratheodory(flattened, config, profile);

  selection.row_indices = std::move(core.indices);
  // Initial weights were 1/N; rescale so the weighted sum (not the mean) of
  // the flattened rows is recovered.
  selection.weights = core.weights * static_cast<double>(n);
  return selection;
}

namespace {

void check_selection(const ResidualSystem& system, const ResidualSelection& selection) {
  for (const Eigen::Index idx : selection.row_indices) {
    if (idx < 0 || idx >= system.rows()) {
      throw IndexOutOfRange("selection row " + std::to_string(idx) + " outside [0, " +
                            std::to_string(system.rows()) + ")");
    }
  }
  if (selection.size() != selection.weights.size()) {
    throw DimensionMismatch("selection index/weight count mismatch");
  }
}

}  // namespace

QuadraticModel reconstruct(const ResidualSystem& system, const ResidualSelection& selection) {
  system.validate();
  check_selection(system, selection);
  QuadraticModel model;
  Matrix6d h = Matrix6d::Zero();
  for (Eigen::Index i = 0; i < selection.size(); ++i) {
    const Eigen::Index row = selection.row_indices[static_cast<std::size_t>(i)];
    const double wi = selection.weights(i);
    const Eigen::Matrix<double, 1, 6> a = system.jacobian.row(row);
    const double e = system.residuals(row);
    h.selfadjointView<Eigen::Upper>().rankUpdate(a.transpose(), wi);
    model.b += wi * e * a.transpose();
    model.c += wi * e * e;
  }
  model.H = h.selfadjointView<Eigen::Upper>();
  return model;
}

QuadraticModel quadratic_of(const ResidualSystem& system) {
  system.validate();
  // Same accumulation order as reconstruct() so an identity selection
  // reproduces this model bit for bit.
  QuadraticModel model;
  Matrix6d h = Matrix6d::Zero();
  for (Eigen::Index row = 0; row < system.rows(); ++row) {
    const Eigen::Matrix<double, 1, 6> a = system.jacobian.row(row);
    const double e = system.residuals(row);
    h.selfadjointView<Eigen::Upper>().rankUpdate(a.transpose(), 1.0);
    model.b += e * a.transpose();
    model.c += e * e;
  }
  model.H = h.selfadjointView<Eigen::Upper>();
  return model;
}

double model_difference(const QuadraticModel& lhs, const QuadraticModel& rhs) {
  const double dh = (lhs.H - rhs.H).cwiseAbs().maxCoeff();
  const double db = (lhs.b - rhs.b).cwiseAbs().maxCoeff();
  const double dc = std::abs(lhs.c - rhs.c);
  return std::max({dh, db, dc});
}

}  // namespace exactcoreset

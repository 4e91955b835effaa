#include "exactcoreset/downsample.hpp"

#include <algorithm>
#include <random>
#include <unordered_map>

#include "exactcoreset/errors.hpp"
#include "exactcoreset/rng.hpp"

namespace exactcoreset {

namespace {

// Keeps only the correspondences touched by the selection and re-addresses the
// selection rows into the compacted stack.
void compact_factor(SampledFactor& factor, const std::vector<Correspondence>& all,
                    const ResidualSelection& selection) {
  std::vector<Eigen::Index> slot_of(all.size(), -1);
  factor.correspondences.clear();
  factor.selection.row_indices.clear();
  factor.selection.row_indices.reserve(selection.row_indices.size());

  for (const Eigen::Index row : selection.row_indices) {
    const auto corr = static_cast<std::size_t>(row / 3);
    const Eigen::Index axis = row % 3;
    if (slot_of[corr] < 0) {
      slot_of[corr] = static_cast<Eigen::Index>(factor.correspondences.size());
      factor.correspondences.push_back(all[corr]);
    }
    factor.selection.row_indices.push_back(3 * slot_of[corr] + axis);
  }
  factor.selection.weights = selection.weights;
  factor.selection.n_source_rows = 3 * static_cast<Eigen::Index>(factor.correspondences.size());
  factor.extraction_rows = selection.n_source_rows;
}

}  // namespace

SampledFactor exact_downsample(const GaussianPointCloud& cloud_i,
                               const GaussianPointCloud& cloud_j, const Pose& eval_pose_i,
                               const Pose& eval_pose_j, const DownsampleConfig& config,
                               CoresetProfile* profile) {
  const Pose t_ij = between(eval_pose_i, eval_pose_j);
  std::vector<Correspondence> correspondences =
      find_correspondences(cloud_i, cloud_j, t_ij, config.max_correspondence_dist);

  // The clustered reduction drops contiguous blocks, so shuffle the source
  // points first. All three axes of a point stay adjacent.
  std::mt19937_64 rng(config.rng_seed);
  fisher_yates(correspondences, rng);

  const Eigen::Index rows = 3 * static_cast<Eigen::Index>(correspondences.size());
  if (rows <= kFlattenedDim) {
    throw TooFewRows("pair yields " + std::to_string(rows) +
                     " residual rows; need more than 28");
  }

  const ResidualSystem system =
      linearize_pair(correspondences, cloud_i, cloud_j, eval_pose_i, eval_pose_j);

  CoresetConfig coreset_config;
  coreset_config.target_size = config.target_residuals;
  coreset_config.cluster_count = config.cluster_count;
  coreset_config.rng_seed = config.rng_seed;
  coreset_config.nullspace = config.nullspace;
  const ResidualSelection selection = extract(system, coreset_config, profile);

  SampledFactor factor;
  factor.eval_pose_i = eval_pose_i;
  factor.eval_pose_j = eval_pose_j;
  compact_factor(factor, correspondences, selection);
  return factor;
}

SampledFactor make_full_factor(const GaussianPointCloud& cloud_i,
                               const GaussianPointCloud& cloud_j, const Pose& eval_pose_i,
                               const Pose& eval_pose_j, double max_correspondence_dist) {
  const Pose t_ij = between(eval_pose_i, eval_pose_j);
  SampledFactor factor;
  factor.eval_pose_i = eval_pose_i;
  factor.eval_pose_j = eval_pose_j;
  factor.correspondences =
      find_correspondences(cloud_i, cloud_j, t_ij, max_correspondence_dist);

  const Eigen::Index rows = 3 * static_cast<Eigen::Index>(factor.correspondences.size());
  factor.selection.row_indices.resize(static_cast<std::size_t>(rows));
  for (Eigen::Index r = 0; r < rows; ++r) {
    factor.selection.row_indices[static_cast<std::size_t>(r)] = r;
  }
  factor.selection.weights = Eigen::VectorXd::Ones(rows);
  factor.selection.n_source_rows = rows;
  factor.extraction_rows = rows;
  return factor;
}

namespace {

struct RowView {
  Eigen::Vector3d d;            // current residual direction, target frame i
  Eigen::Vector3d transformed;  // T_ij * mu_source
  Eigen::Matrix3d phi;
};

RowView make_row_view(const GaussianPointCloud& cloud_i, const GaussianPointCloud& cloud_j,
                      const Pose& t_ij, const Correspondence& corr, bool refresh_whitener) {
  RowView view;
  const Eigen::Vector3d& mu = cloud_j.means[static_cast<std::size_t>(corr.source_index)];
  view.transformed = t_ij.apply(mu);
  view.d = cloud_i.means[static_cast<std::size_t>(corr.target_index)] - view.transformed;
  view.phi = refresh_whitener
                 ? whitener(cloud_i.covariances[static_cast<std::size_t>(corr.target_index)],
                            cloud_j.covariances[static_cast<std::size_t>(corr.source_index)],
                            t_ij.rotation)
                 : corr.phi;
  return view;
}

}  // namespace

PairQuadratic relinearize(const SampledFactor& factor, const GaussianPointCloud& cloud_i,
                          const GaussianPointCloud& cloud_j, const Pose& t_i, const Pose& t_j,
                          const RelinearizeOptions& options, std::size_t* row_counter) {
  const Pose t_ij = between(t_i, t_j);
  const Eigen::Index slots = static_cast<Eigen::Index>(factor.correspondences.size());

  PairQuadratic out;
  Matrix12d h = Matrix12d::Zero();

  Eigen::Index cached_slot = -1;
  RowView view;

  for (Eigen::Index k = 0; k < factor.selection.size(); ++k) {
    const Eigen::Index row = factor.selection.row_indices[static_cast<std::size_t>(k)];
    const Eigen::Index slot = row / 3;
    const Eigen::Index axis = row % 3;
    if (slot < 0 || slot >= slots) {
      throw IndexOutOfRange("selection row " + std::to_string(row) +
                            " outside the stored correspondence stack");
    }
    const Correspondence& corr = factor.correspondences[static_cast<std::size_t>(slot)];
    if (slot != cached_slot) {
      view = make_row_view(cloud_i, cloud_j, t_ij, corr, options.refresh_whitener);
      cached_slot = slot;
    }

    // Row `axis` of phi^T applied to the residual and both pose blocks.
    const Eigen::Vector3d phi_col = view.phi.col(axis);
    const double e = phi_col.dot(view.d);
    const Eigen::RowVector3d phi_r = phi_col.transpose() * t_ij.rotation;
    const Eigen::Vector3d& mu = cloud_j.means[static_cast<std::size_t>(corr.source_index)];

    Vector12d row12;
    // d e / d tangent(T_i): rotation then translation.
    row12.segment<3>(0) = -(phi_col.transpose() * skew(view.transformed)).transpose();
    row12.segment<3>(3) = phi_col;
    // d e / d tangent(T_j).
    row12.segment<3>(6) = (phi_r * skew(mu)).transpose();
    row12.segment<3>(9) = -phi_r.transpose();

    const double w = factor.selection.weights(k);
    h.selfadjointView<Eigen::Upper>().rankUpdate(row12, w);
    out.b += (w * e) * row12;
    out.c += w * e * e;
    if (row_counter != nullptr) {
      ++*row_counter;
    }
  }
  out.H = h.selfadjointView<Eigen::Upper>();
  return out;
}

double factor_cost(const SampledFactor& factor, const GaussianPointCloud& cloud_i,
                   const GaussianPointCloud& cloud_j, const Pose& t_i, const Pose& t_j,
                   const RelinearizeOptions& options, std::size_t* row_counter) {
  const Pose t_ij = between(t_i, t_j);
  const Eigen::Index slots = static_cast<Eigen::Index>(factor.correspondences.size());

  double cost = 0.0;
  Eigen::Index cached_slot = -1;
  RowView view;
  for (Eigen::Index k = 0; k < factor.selection.size(); ++k) {
    const Eigen::Index row = factor.selection.row_indices[static_cast<std::size_t>(k)];
    const Eigen::Index slot = row / 3;
    const Eigen::Index axis = row % 3;
    if (slot < 0 || slot >= slots) {
      throw IndexOutOfRange("selection row " + std::to_string(row) +
                            " outside the stored correspondence stack");
    }
    if (slot != cached_slot) {
      view = make_row_view(cloud_i, cloud_j, t_ij,
                           factor.correspondences[static_cast<std::size_t>(slot)],
                           options.refresh_whitener);
      cached_slot = slot;
    }
    const double e = view.phi.col(axis).dot(view.d);
    cost += factor.selection.weights(k) * e * e;
    if (row_counter != nullptr) {
      ++*row_counter;
    }
  }
  return cost;
}

double fully_selected_fraction(const SampledFactor& factor) {
  std::unordered_map<Eigen::Index, int> axes_per_point;
  for (const Eigen::Index row : factor.selection.row_indices) {
    axes_per_point[row / 3] += 1;
  }
  if (axes_per_point.empty()) {
    return 0.0;
  }
  std::size_t full = 0;
  for (const auto& [point, count] : axes_per_point) {
    if (count == 3) {
      ++full;
    }
  }
  return static_cast<double>(full) / static_cast<double>(axes_per_point.size());
}

}  // namespace exactcoreset

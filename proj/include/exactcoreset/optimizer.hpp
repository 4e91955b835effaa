#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "exactcoreset/downsample.hpp"
#include "exactcoreset/point_cloud.hpp"
#include "exactcoreset/se3.hpp"

namespace exactcoreset {

/// Frames, factors between overlapping pairs, and the clouds the factors
/// reference. Frame 0 is the gauge and never moves.
struct FactorGraph {
  std::vector<GaussianPointCloud> clouds;
  std::vector<Pose> poses;
  std::vector<SampledFactor> factors;
  std::vector<std::pair<int, int>> overlap_pairs;
};

struct OverlapConfig {
  double min_ratio = 0.3;
  double max_correspondence_dist = 1.0;
};

struct GraphConfig {
  bool use_full_residuals = false;
  Eigen::Index target_residuals = 29;
  Eigen::Index cluster_count = 64;
  std::uint64_t rng_seed = 0;
  OverlapConfig overlap;
};

struct OptimizerConfig {
  int max_iterations = 100;
  double initial_lambda = 1e-6;
  double lambda_up = 10.0;
  double lambda_down = 10.0;
  int max_rejections_per_step = 40;
  double convergence_delta = 1e-10;  // threshold on |dx|_inf
  bool refresh_whitener = false;
};

struct OptimizeResult {
  std::vector<Pose> poses;
  std::vector<double> cost_trace;  // accepted costs, starting with the initial one
  int iterations = 0;              // accepted steps
  bool converged = false;
  std::size_t rows_evaluated = 0;  // scalar residual rows touched during the run
};

struct AteResult {
  double rmse = 0.0;
  double stddev = 0.0;
};

/// Pairs (i, j), i < j, where at least min_ratio of the source points of j
/// find a target neighbor in i within max_dist at the given poses.
std::vector<std::pair<int, int>> detect_overlaps(const std::vector<GaussianPointCloud>& clouds,
                                                 const std::vector<Pose>& poses,
                                                 const OverlapConfig& config = {});

/// Detects overlaps and builds one factor per pair (sampled or full).
FactorGraph build_factor_graph(std::vector<GaussianPointCloud> clouds, std::vector<Pose> poses,
                               const GraphConfig& config);

/// Total weighted registration cost at the given poses.
double total_cost(const FactorGraph& graph, const std::vector<Pose>& poses,
                  bool refresh_whitener = false, std::size_t* row_counter = nullptr);

/// The undamped Gauss-Newton update for all non-gauge frames, stacked
/// [frame1; frame2; ...], each block [rotation; translation].
Eigen::VectorXd first_gauss_newton_step(const FactorGraph& graph);

/// Levenberg-Marquardt minimization of the summed factor costs. Accepted steps
/// strictly decrease the cost; frame 0 stays bit-identical.
OptimizeResult optimize(const FactorGraph& graph, const OptimizerConfig& config = {});

/// Translation RMSE after an optimal rigid alignment of the estimate onto the
/// ground truth.
AteResult ate(const std::vector<Pose>& estimated, const std::vector<Pose>& ground_truth);

}  // namespace exactcoreset

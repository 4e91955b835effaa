#include "exactcoreset/optimizer.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <iostream>
#include <numeric>

#include "exactcoreset/errors.hpp"
#include "exactcoreset/kdtree.hpp"
#include "exactcoreset/parallel.hpp"
#include "exactcoreset/rng.hpp"

namespace exactcoreset {

std::vector<std::pair<int, int>> detect_overlaps(const std::vector<GaussianPointCloud>& clouds,
                                                 const std::vector<Pose>& poses,
                                                 const OverlapConfig& config) {
  if (clouds.size() != poses.size()) {
    throw LengthMismatch("cloud count does not match pose count");
  }
  if (clouds.size() < 2) {
    throw TooFewPoints("need at least 2 frames");
  }
  const int n = static_cast<int>(clouds.size());

  std::vector<KdTree3> trees;
  trees.reserve(clouds.size());
  for (const auto& cloud : clouds) {
    trees.emplace_back(cloud.means);
  }

  std::vector<std::pair<int, int>> candidates;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      candidates.emplace_back(i, j);
    }
  }

  std::vector<char> keep(candidates.size(), 0);
  parallel_for(static_cast<std::int64_t>(candidates.size()), [&](std::int64_t c) {
    const auto [i, j] = candidates[static_cast<std::size_t>(c)];
    const Pose t_ij = between(poses[static_cast<std::size_t>(i)],
                              poses[static_cast<std::size_t>(j)]);
    const auto& source = clouds[static_cast<std::size_t>(j)].means;
    std::size_t matched = 0;
    for (const auto& p : source) {
      if (trees[static_cast<std::size_t>(i)].nearest(t_ij.apply(p),
                                                     config.max_correspondence_dist) >= 0) {
        ++matched;
      }
    }
    const double ratio = static_cast<double>(matched) / static_cast<double>(source.size());
    keep[static_cast<std::size_t>(c)] = ratio >= config.min_ratio ? 1 : 0;
  });

  std::vector<std::pair<int, int>> out;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    if (keep[c] != 0) {
      out.push_back(candidates[c]);
    }
  }
  return out;
}

namespace {

void warn_if_disconnected(const FactorGraph& graph) {
  const int n = static_cast<int>(graph.poses.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (const auto& f : graph.factors) {
    parent[find(f.frame_i)] = find(f.frame_j);
  }
  for (int i = 1; i < n; ++i) {
    if (find(i) != find(0)) {
      std::cerr << "warning: factor graph is disconnected (frame " << i
                << " unreachable from frame 0)\n";
      return;
    }
  }
}

}  // namespace

FactorGraph build_factor_graph(std::vector<GaussianPointCloud> clouds, std::vector<Pose> poses,
                               const GraphConfig& config) {
  FactorGraph graph;
  graph.overlap_pairs = detect_overlaps(clouds, poses, config.overlap);
  graph.clouds = std::move(clouds);
  graph.poses = std::move(poses);
  graph.factors.resize(graph.overlap_pairs.size());

  parallel_for(static_cast<std::int64_t>(graph.overlap_pairs.size()), [&](std::int64_t k) {
    const auto [i, j] = graph.overlap_pairs[static_cast<std::size_t>(k)];
    const auto& cloud_i = graph.clouds[static_cast<std::size_t>(i)];
    const auto& cloud_j = graph.clouds[static_cast<std::size_t>(j)];
    const Pose& pose_i = graph.poses[static_cast<std::size_t>(i)];
    const Pose& pose_j = graph.poses[static_cast<std::size_t>(j)];

    SampledFactor factor;
    if (config.use_full_residuals) {
      factor = make_full_factor(cloud_i, cloud_j, pose_i, pose_j,
                                config.overlap.max_correspondence_dist);
    } else {
      DownsampleConfig ds;
      ds.target_residuals = config.target_residuals;
      ds.cluster_count = config.cluster_count;
      ds.rng_seed = derive_seed(config.rng_seed, static_cast<std::uint64_t>(k));
      ds.max_correspondence_dist = config.overlap.max_correspondence_dist;
      factor = exact_downsample(cloud_i, cloud_j, pose_i, pose_j, ds);
    }
    factor.frame_i = i;
    factor.frame_j = j;
    graph.factors[static_cast<std::size_t>(k)] = std::move(factor);
  });

  warn_if_disconnected(graph);
  return graph;
}

double total_cost(const FactorGraph& graph, const std::vector<Pose>& poses, bool refresh_whitener,
                  std::size_t* row_counter) {
  RelinearizeOptions options;
  options.refresh_whitener = refresh_whitener;
  std::vector<double> costs(graph.factors.size(), 0.0);
  std::vector<std::size_t> rows(graph.factors.size(), 0);
  parallel_for(static_cast<std::int64_t>(graph.factors.size()), [&](std::int64_t k) {
    const auto& f = graph.factors[static_cast<std::size_t>(k)];
    costs[static_cast<std::size_t>(k)] =
        factor_cost(f, graph.clouds[static_cast<std::size_t>(f.frame_i)],
                    graph.clouds[static_cast<std::size_t>(f.frame_j)],
                    poses[static_cast<std::size_t>(f.frame_i)],
                    poses[static_cast<std::size_t>(f.frame_j)], options,
                    &rows[static_cast<std::size_t>(k)]);
  });
  // Fixed-order reduction keeps the total deterministic under any thread count.
  double total = 0.0;
  for (const double c : costs) {
    total += c;
  }
  if (row_counter != nullptr) {
    for (const std::size_t r : rows) {
      *row_counter += r;
    }
  }
  return total;
}

namespace {

struct Assembled {
  Eigen::MatrixXd h;
  Eigen::VectorXd b;
  double cost = 0.0;
};

Assembled assemble(const FactorGraph& graph, const std::vector<Pose>& poses,
                   bool refresh_whitener, std::size_t* row_counter) {
  const Eigen::Index vars = 6 * (static_cast<Eigen::Index>(poses.size()) - 1);
  RelinearizeOptions options;
  options.refresh_whitener = refresh_whitener;

  std::vector<PairQuadratic> blocks(graph.factors.size());
  std::vector<std::size_t> rows(graph.factors.size(), 0);
  parallel_for(static_cast<std::int64_t>(graph.factors.size()), [&](std::int64_t k) {
    const auto& f = graph.factors[static_cast<std::size_t>(k)];
    blocks[static_cast<std::size_t>(k)] =
        relinearize(f, graph.clouds[static_cast<std::size_t>(f.frame_i)],
                    graph.clouds[static_cast<std::size_t>(f.frame_j)],
                    poses[static_cast<std::size_t>(f.frame_i)],
                    poses[static_cast<std::size_t>(f.frame_j)], options,
                    &rows[static_cast<std::size_t>(k)]);
  });

  Assembled out;
  out.h = Eigen::MatrixXd::Zero(vars, vars);
  out.b = Eigen::VectorXd::Zero(vars);
  for (std::size_t k = 0; k < graph.factors.size(); ++k) {
    const auto& f = graph.factors[k];
    const auto& q = blocks[k];
    out.cost += q.c;
    // Frame 0 is the gauge; its rows and columns are dropped.
    const Eigen::Index vi = 6 * (f.frame_i - 1);
    const Eigen::Index vj = 6 * (f.frame_j - 1);
    if (f.frame_i > 0) {
      out.h.block<6, 6>(vi, vi) += q.H.topLeftCorner<6, 6>();
      out.b.segment<6>(vi) += q.b.head<6>();
    }
    if (f.frame_j > 0) {
      out.h.block<6, 6>(vj, vj) += q.H.bottomRightCorner<6, 6>();
      out.b.segment<6>(vj) += q.b.tail<6>();
    }
    if (f.frame_i > 0 && f.frame_j > 0) {
      out.h.block<6, 6>(vi, vj) += q.H.topRightCorner<6, 6>();
      out.h.block<6, 6>(vj, vi) += q.H.bottomLeftCorner<6, 6>();
    }
  }
  if (row_counter != nullptr) {
    for (const std::size_t r : rows) {
      *row_counter += r;
    }
  }
  return out;
}

std::vector<Pose> apply_step(const std::vector<Pose>& poses, const Eigen::VectorXd& delta) {
  std::vector<Pose> out = poses;
  for (std::size_t k = 1; k < poses.size(); ++k) {
    const Eigen::Index offset = 6 * (static_cast<Eigen::Index>(k) - 1);
    out[k] = retract(poses[k], delta.segment<6>(offset));
  }
  return out;
}

}  // namespace

Eigen::VectorXd first_gauss_newton_step(const FactorGraph& graph) {
  const Assembled sys = assemble(graph, graph.poses, false, nullptr);
  const Eigen::LDLT<Eigen::MatrixXd> solver(sys.h);
  if (solver.info() != Eigen::Success) {
    throw SingularSystem("Gauss-Newton normal equations are not solvable");
  }
  const Eigen::VectorXd step = solver.solve(-sys.b);
  if (!step.allFinite()) {
    throw SingularSystem("Gauss-Newton step is not finite");
  }
  return step;
}

OptimizeResult optimize(const FactorGraph& graph, const OptimizerConfig& config) {
  if (graph.poses.empty()) {
    throw TooFewPoints("graph has no poses");
  }
  OptimizeResult result;
  result.poses = graph.poses;

  double lambda = config.initial_lambda;
  double cost = total_cost(graph, result.poses, config.refresh_whitener, &result.rows_evaluated);
  result.cost_trace.push_back(cost);

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    const Assembled sys =
        assemble(graph, result.poses, config.refresh_whitener, &result.rows_evaluated);

    bool accepted = false;
    for (int attempt = 0; attempt < config.max_rejections_per_step; ++attempt) {
      Eigen::MatrixXd damped = sys.h;
      damped.diagonal().array() += lambda;
      const Eigen::LDLT<Eigen::MatrixXd> solver(damped);
      if (solver.info() != Eigen::Success) {
        throw SingularSystem("damped normal equations are not solvable");
      }
      const Eigen::VectorXd delta = solver.solve(-sys.b);
      if (!delta.allFinite()) {
        throw SingularSystem("update is not finite; check gauge and connectivity");
      }

      if (delta.lpNorm<Eigen::Infinity>() < config.convergence_delta) {
        result.converged = true;
        break;
      }

      const std::vector<Pose> candidate = apply_step(result.poses, delta);
      const double candidate_cost =
          total_cost(graph, candidate, config.refresh_whitener, &result.rows_evaluated);
      if (candidate_cost < cost) {
        result.poses = candidate;
        cost = candidate_cost;
        result.cost_trace.push_back(cost);
        result.iterations += 1;
        lambda = std::max(lambda / config.lambda_down, 1e-18);
        accepted = true;
        if (delta.lpNorm<Eigen::Infinity>() < config.convergence_delta) {
          result.converged = true;
        }
        break;
      }
      lambda *= config.lambda_up;
    }

    if (result.converged || !accepted) {
      if (!accepted && !result.converged) {
        // No improving step found at any damping; treat as converged to a
        // local minimum.
        result.converged = true;
      }
      break;
    }
  }
  return result;
}

AteResult ate(const std::vector<Pose>& estimated, const std::vector<Pose>& ground_truth) {
  if (estimated.size() != ground_truth.size()) {
    throw LengthMismatch("trajectory lengths differ");
  }
  if (estimated.size() < 2) {
    throw LengthMismatch("need at least 2 poses");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(estimated.size());
  Eigen::MatrixXd src(3, n);
  Eigen::MatrixXd dst(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    src.col(i) = estimated[static_cast<std::size_t>(i)].translation;
    dst.col(i) = ground_truth[static_cast<std::size_t>(i)].translation;
  }
  const Eigen::Matrix4d align = Eigen::umeyama(src, dst, false);
  const Eigen::Matrix3d r = align.topLeftCorner<3, 3>();
  const Eigen::Vector3d t = align.topRightCorner<3, 1>();

  Eigen::VectorXd errors(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    errors(i) = (r * src.col(i) + t - dst.col(i)).norm();
  }
  AteResult out;
  out.rmse = std::sqrt(errors.squaredNorm() / static_cast<double>(n));
  const double mean = errors.mean();
  out.stddev = std::sqrt(std::max(0.0, errors.squaredNorm() / static_cast<double>(n) - mean * mean));
  return out;
}

}  // namespace exactcoreset

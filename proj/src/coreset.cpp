#include "exactcoreset/coreset.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "exactcoreset/errors.hpp"

namespace exactcoreset {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(const Clock::time_point& start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool kernel_residual_ok(const Eigen::MatrixXd& A, const Eigen::VectorXd& v, double tol_rel) {
  const double vn = v.norm();
  if (!std::isfinite(vn) || vn <= 0.0) {
    return false;
  }
  const double res = (A * v).norm();
  return res <= tol_rel * A.norm() * vn;
}

}  // namespace

void WeightedPointSet::validate() const {
  if (points.cols() != weights.size()) {
    throw DimensionMismatch("point count " + std::to_string(points.cols()) +
                            " does not match weight count " + std::to_string(weights.size()));
  }
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0)) {
      throw Error("weight " + std::to_string(i) + " is negative or NaN");
    }
  }
}

Eigen::VectorXd nullspace_vector(const Eigen::MatrixXd& A, NullspaceMethod method,
                                 CoresetProfile* profile) {
  const auto start = Clock::now();
  const Eigen::Index rows = A.rows();
  const Eigen::Index cols = A.cols();
  // Contract tolerance; the tighter bound below decides when the fast path is
  // trusted without falling back.
  constexpr double kContractTol = 1e-9;
  constexpr double kTightTol = 1e-12;

  auto finish = [&](Eigen::VectorXd v) {
    if (profile != nullptr) {
      profile->nullspace_seconds += seconds_since(start);
      profile->nullspace_calls += 1;
    }
    return v;
  };

  if (method == NullspaceMethod::kSVD) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    Eigen::VectorXd v = svd.matrixV().col(cols - 1);
    if (!kernel_residual_ok(A, v, kContractTol)) {
      throw NoNullspace("SVD found no kernel vector; matrix has full column rank");
    }
    return finish(std::move(v));
  }

  if (cols > rows) {
    // LU with partial pivoting on the leading square block; the trailing
    // column becomes the free variable, set to 1.
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(A.leftCols(rows));
    Eigen::VectorXd v = Eigen::VectorXd::Zero(cols);
    v.head(rows) = lu.solve(-A.col(rows));
    v(rows) = 1.0;
    if (kernel_residual_ok(A, v, kTightTol)) {
      return finish(std::move(v));
    }
    // Singular or ill-conditioned block; fall through to the rank-revealing
    // path and keep this candidate in case it still meets the contract.
    Eigen::FullPivLU<Eigen::MatrixXd> full(A);
    const Eigen::MatrixXd kernel = full.kernel();
    if (kernel.cols() > 0 && kernel_residual_ok(A, kernel.col(0), kContractTol)) {
      return finish(kernel.col(0));
    }
    if (kernel_residual_ok(A, v, kContractTol)) {
      return finish(std::move(v));
    }
    throw NoNullspace("no reliable kernel vector found for wide matrix");
  }

  // Square or tall input: only a genuinely rank-deficient matrix has a kernel.
  Eigen::FullPivLU<Eigen::MatrixXd> full(A);
  const Eigen::MatrixXd kernel = full.kernel();
  if (kernel.cols() > 0 && kernel_residual_ok(A, kernel.col(0), kContractTol)) {
    return finish(kernel.col(0));
  }
  throw NoNullspace("matrix has full column rank (precondition violated)");
}

namespace {

// One elimination pass of Caratheodory's algorithm over the active points.
// Removes at least one entry from active/w; order of survivors is preserved.
void eliminate_pass(const Eigen::MatrixXd& points, std::vector<Eigen::Index>& active,
                    std::vector<double>& w, NullspaceMethod method, CoresetProfile* profile) {
  const Eigen::Index dim = points.rows();
  const Eigen::Index n = static_cast<Eigen::Index>(active.size());
  // With the LU method a kernel vector supported on the first dim + 2 points
  // suffices; the SVD reference reproduces the naive full-width search.
  const Eigen::Index n_sub =
      method == NullspaceMethod::kLU ? std::min<Eigen::Index>(dim + 1, n - 1) : n - 1;

  Eigen::MatrixXd diffs(dim, n_sub);
  const auto base = points.col(active[0]);
  for (Eigen::Index i = 0; i < n_sub; ++i) {
    diffs.col(i) = points.col(active[i + 1]) - base;
  }

  const Eigen::VectorXd v_sub = nullspace_vector(diffs, method, profile);

  // Full kernel vector over the support: entry 0 balances the rest so the
  // weighted point sum and the total weight are both conserved.
  Eigen::VectorXd v(n_sub + 1);
  v(0) = -v_sub.sum();
  v.tail(n_sub) = v_sub;
  if (v.maxCoeff() <= 0.0) {
    v = -v;
  }

  double alpha = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i <= n_sub; ++i) {
    if (v(i) > 0.0) {
      alpha = std::min(alpha, w[static_cast<std::size_t>(i)] / v(i));
    }
  }

  for (Eigen::Index i = 0; i <= n_sub; ++i) {
    auto& wi = w[static_cast<std::size_t>(i)];
    if (v(i) > 0.0 && wi / v(i) == alpha) {
      wi = 0.0;  // exact removal for every index tied at the minimum
    } else {
      wi -= alpha * v(i);
    }
  }

  std::size_t out = 0;
  for (std::size_t i = 0; i < active.size(); ++i) {
    if (w[i] > 0.0) {
      active[out] = active[i];
      w[out] = w[i];
      ++out;
    }
  }
  active.resize(out);
  w.resize(out);
}

CoresetResult make_identity_result(const WeightedPointSet& set) {
  CoresetResult result;
  result.indices.resize(static_cast<std::size_t>(set.size()));
  for (Eigen::Index i = 0; i < set.size(); ++i) {
    result.indices[static_cast<std::size_t>(i)] = i;
  }
  result.weights = set.weights;
  return result;
}

CoresetResult run_eliminations(const Eigen::MatrixXd& points, std::vector<Eigen::Index> active,
                               std::vector<double> w, Eigen::Index target, NullspaceMethod method,
                               CoresetProfile* profile) {
  const auto start = Clock::now();
  while (static_cast<Eigen::Index>(active.size()) > target) {
    eliminate_pass(points, active, w, method, profile);
  }
  if (profile != nullptr) {
    profile->caratheodory_seconds += seconds_since(start);
  }
  CoresetResult result;
  result.indices = std::move(active);
  result.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  return result;
}

}  // namespace

CoresetResult caratheodory(const WeightedPointSet& set, Eigen::Index target_size,
                           NullspaceMethod method, CoresetProfile* profile) {
  set.validate();
  if (target_size < set.dim() + 1) {
    throw InvalidTarget("target size " + std::to_string(target_size) + " is below dim + 1 = " +
                        std::to_string(set.dim() + 1));
  }
  if (set.size() <= target_size) {
    return make_identity_result(set);
  }

  std::vector<Eigen::Index> active;
  std::vector<double> w;
  active.reserve(static_cast<std::size_t>(set.size()));
  w.reserve(static_cast<std::size_t>(set.size()));
  for (Eigen::Index i = 0; i < set.size(); ++i) {
    if (set.weights[i] > 0.0) {
      active.push_back(i);
      w.push_back(set.weights[i]);
    }
  }
  return run_eliminations(set.points, std::move(active), std::move(w), target_size, method,
                          profile);
}

CoresetResult fast_caratheodory(const WeightedPointSet& set, const CoresetConfig& config,
                                CoresetProfile* profile) {
  set.validate();
  const Eigen::Index dim = set.dim();
  const Eigen::Index target = config.target_size;
  const Eigen::Index clusters = config.cluster_count;
  if (target < dim + 1) {
    throw InvalidTarget("target size " + std::to_string(target) + " is below dim + 1 = " +
                        std::to_string(dim + 1));
  }
  if (clusters < dim + 2) {
    throw InvalidClusterCount("cluster count " + std::to_string(clusters) +
                              " is below dim + 2 = " + std::to_string(dim + 2));
  }
  if (set.size() <= target) {
    return make_identity_result(set);
  }

  std::vector<Eigen::Index> active;
  std::vector<double> w;
  active.reserve(static_cast<std::size_t>(set.size()));
  w.reserve(static_cast<std::size_t>(set.size()));
  for (Eigen::Index i = 0; i < set.size(); ++i) {
    if (set.weights[i] > 0.0) {
      active.push_back(i);
      w.push_back(set.weights[i]);
    }
  }

  // Clustered reduction runs while the active set is safely above the staging
  // size; the exact finish below then trims to the target without
  // cluster-granularity undershoot.
  const Eigen::Index staging = 4 * target;
  while (static_cast<Eigen::Index>(active.size()) > staging) {
    const Eigen::Index n = static_cast<Eigen::Index>(active.size());
    const Eigen::Index k_eff = std::min(clusters, n);
    const Eigen::Index base_size = n / k_eff;
    const Eigen::Index remainder = n % k_eff;
    const Eigen::Index max_cluster = base_size + (remainder > 0 ? 1 : 0);

    // Drop at most as many clusters as can never push the survivor count
    // below the staging size.
    const Eigen::Index droppable = (n - staging) / max_cluster;
    if (droppable < 1) {
      break;
    }
    const Eigen::Index keep_target = std::max(dim + 1, k_eff - droppable);
    if (keep_target >= k_eff) {
      break;
    }

    const auto means_start = Clock::now();
    Eigen::MatrixXd means(dim, k_eff);
    Eigen::VectorXd cluster_weight(k_eff);
    std::vector<Eigen::Index> cluster_begin(static_cast<std::size_t>(k_eff) + 1);
    Eigen::Index cursor = 0;
    for (Eigen::Index c = 0; c < k_eff; ++c) {
      cluster_begin[static_cast<std::size_t>(c)] = cursor;
      const Eigen::Index size = base_size + (c < remainder ? 1 : 0);
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim);
      double total = 0.0;
      for (Eigen::Index p = cursor; p < cursor + size; ++p) {
        const auto idx = static_cast<std::size_t>(p);
        acc += w[idx] * set.points.col(active[idx]);
        total += w[idx];
      }
      means.col(c) = acc / total;
      cluster_weight(c) = total;
      cursor += size;
    }
    cluster_begin[static_cast<std::size_t>(k_eff)] = cursor;
    if (profile != nullptr) {
      profile->cluster_means_seconds += seconds_since(means_start);
      profile->rounds += 1;
    }

    const CoresetResult kept =
        caratheodory({means, cluster_weight}, keep_target, config.nullspace, profile);

    std::vector<Eigen::Index> next_active;
    std::vector<double> next_w;
    next_active.reserve(static_cast<std::size_t>(kept.size() * max_cluster));
    next_w.reserve(next_active.capacity());
    for (Eigen::Index ci = 0; ci < kept.size(); ++ci) {
      const Eigen::Index c = kept.indices[static_cast<std::size_t>(ci)];
      const double scale = kept.weights[ci] / cluster_weight(c);
      for (Eigen::Index p = cluster_begin[static_cast<std::size_t>(c)];
           p < cluster_begin[static_cast<std::size_t>(c) + 1]; ++p) {
        const auto idx = static_cast<std::size_t>(p);
        next_active.push_back(active[idx]);
        next_w.push_back(w[idx] * scale);
      }
    }
    active = std::move(next_active);
    w = std::move(next_w);
  }

  return run_eliminations(set.points, std::move(active), std::move(w), target, config.nullspace,
                          profile);
}

}  // namespace exactcoreset

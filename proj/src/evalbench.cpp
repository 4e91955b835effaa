#include "exactcoreset/evalbench.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "exactcoreset/errors.hpp"
#include "exactcoreset/parallel.hpp"
#include "exactcoreset/rng.hpp"

namespace exactcoreset {

namespace {

using Clock = std::chrono::steady_clock;

ResidualSystem random_system(Eigen::Index n_rows, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ResidualSystem system;
  system.residuals.resize(n_rows);
  system.jacobian.resize(n_rows, kTangentDim);
  for (Eigen::Index r = 0; r < n_rows; ++r) {
    for (Eigen::Index c = 0; c < kTangentDim; ++c) {
      system.jacobian(r, c) = gauss(rng);
    }
    system.residuals(r) = gauss(rng);
  }
  return system;
}

void fill_stats(KldEntry& entry) {
  const auto n = static_cast<double>(entry.scores.size());
  double sum = 0.0;
  for (const double s : entry.scores) {
    sum += s;
  }
  entry.mean = sum / n;
  double sq = 0.0;
  for (const double s : entry.scores) {
    sq += (s - entry.mean) * (s - entry.mean);
  }
  entry.stddev = std::sqrt(sq / n);
}

}  // namespace

double approximation_error(const QuadraticModel& full, const QuadraticModel& approx) {
  const double scale = std::max(full.H.cwiseAbs().maxCoeff(), 1.0);
  return model_difference(full, approx) / scale;
}

ValidateReport validate_random(int trials, Eigen::Index n_rows, Eigen::Index target,
                               std::uint64_t seed, NullspaceMethod method) {
  ValidateReport report;
  report.trials = trials;
  report.n_rows = n_rows;
  report.target = target;
  report.seed = seed;
  report.method = method;
  report.errors.resize(static_cast<std::size_t>(trials));
  report.sizes.resize(static_cast<std::size_t>(trials));

  std::vector<CoresetProfile> profiles(static_cast<std::size_t>(trials));
  const auto start = Clock::now();

  parallel_for(trials, [&](std::int64_t t) {
    const auto idx = static_cast<std::size_t>(t);
    const ResidualSystem system =
        random_system(n_rows, derive_seed(seed, static_cast<std::uint64_t>(t)));

    CoresetConfig config;
    config.target_size = target;
    config.rng_seed = derive_seed(seed, static_cast<std::uint64_t>(t));
    config.nullspace = method;

    const ResidualSelection selection = extract(system, config, &profiles[idx]);
    const QuadraticModel full = quadratic_of(system);
    const QuadraticModel approx = reconstruct(system, selection);

    report.errors[idx] = approximation_error(full, approx);
    report.sizes[idx] = selection.size();
  });

  report.total_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  for (const auto& p : profiles) {
    report.profile.flatten_seconds += p.flatten_seconds;
    report.profile.cluster_means_seconds += p.cluster_means_seconds;
    report.profile.caratheodory_seconds += p.caratheodory_seconds;
    report.profile.nullspace_seconds += p.nullspace_seconds;
    report.profile.rounds += p.rounds;
    report.profile.nullspace_calls += p.nullspace_calls;
  }
  report.max_error = report.errors.empty()
                         ? 0.0
                         : *std::max_element(report.errors.begin(), report.errors.end());
  report.all_pass = report.max_error < report.threshold;
  return report;
}

ResidualSelection random_sampling_baseline(const ResidualSystem& system, int n_points,
                                           std::uint64_t seed) {
  system.validate();
  const Eigen::Index rows = system.rows();
  if (rows % 3 != 0) {
    throw DimensionMismatch("row count " + std::to_string(rows) + " is not a multiple of 3");
  }
  const Eigen::Index total_points = rows / 3;
  if (n_points < 1 || n_points > total_points) {
    throw InvalidTarget("n_points must be in [1, " + std::to_string(total_points) + "]");
  }

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> picked = sample_without_replacement(
      static_cast<std::size_t>(total_points), static_cast<std::size_t>(n_points), rng);
  std::sort(picked.begin(), picked.end());

  ResidualSelection selection;
  selection.n_source_rows = rows;
  selection.row_indices.reserve(picked.size() * 3);
  for (const std::size_t p : picked) {
    for (Eigen::Index axis = 0; axis < 3; ++axis) {
      selection.row_indices.push_back(3 * static_cast<Eigen::Index>(p) + axis);
    }
  }
  const double weight = static_cast<double>(total_points) / static_cast<double>(n_points);
  selection.weights = Eigen::VectorXd::Constant(3 * n_points, weight);
  return selection;
}

KldScore normalized_kld(const Matrix6d& h_full, const Matrix6d& h_approx) {
  KldScore out;

  const Eigen::LLT<Matrix6d> llt_full(h_full);
  const Eigen::LLT<Matrix6d> llt_approx(h_approx);
  if (llt_full.info() != Eigen::Success || llt_approx.info() != Eigen::Success) {
    out.degenerate = true;
    out.score = 1.0;
    out.normed_raw = 1.0;
    out.kld_raw = std::numeric_limits<double>::infinity();
    return out;
  }

  auto log_det = [](const Eigen::LLT<Matrix6d>& llt) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < 6; ++i) {
      sum += std::log(llt.matrixL()(i, i));
    }
    return 2.0 * sum;
  };

  const double trace = llt_full.solve(h_approx).trace();
  out.kld_raw = 0.5 * (log_det(llt_full) - log_det(llt_approx) + trace);
  if (!std::isfinite(out.kld_raw)) {
    out.degenerate = true;
    out.score = 1.0;
    out.normed_raw = 1.0;
    return out;
  }
  out.normed_raw = 1.0 - std::exp(-out.kld_raw);
  // KLD of identical matrices is D/2; shift the zero point there so exact
  // reconstructions score 0. The divergence is minimized at h_approx ==
  // h_full, so the shifted value cannot go negative beyond roundoff.
  out.score = std::max(0.0, 1.0 - std::exp(-(out.kld_raw - 0.5 * 6.0)));
  return out;
}

KldReport kld_compare(const AlignedPair& pair, const std::vector<int>& random_points,
                      const std::vector<Eigen::Index>& exact_residuals, int trials,
                      std::uint64_t seed) {
  KldReport report;
  report.trials = trials;
  report.seed = seed;

  const Pose t_ij = between(pair.pose_i, pair.pose_j);
  const std::vector<Correspondence> correspondences =
      find_correspondences(pair.target, pair.source, t_ij, 1.0);

  for (const int n : random_points) {
    KldEntry entry;
    entry.method = "random";
    entry.budget_points = n;
    entry.budget_residuals = 3 * n;
    entry.scores.resize(static_cast<std::size_t>(trials));
    entry.raw_normed.resize(static_cast<std::size_t>(trials));
    report.entries.push_back(std::move(entry));
  }
  for (const Eigen::Index m : exact_residuals) {
    KldEntry entry;
    entry.method = "exact";
    entry.budget_residuals = m;
    entry.scores.resize(static_cast<std::size_t>(trials));
    entry.raw_normed.resize(static_cast<std::size_t>(trials));
    report.entries.push_back(std::move(entry));
  }

  std::vector<std::vector<char>> degenerate(report.entries.size(),
                                            std::vector<char>(static_cast<std::size_t>(trials), 0));

  parallel_for(trials, [&](std::int64_t t) {
    const auto trial = static_cast<std::size_t>(t);
    const std::uint64_t trial_seed = derive_seed(seed, static_cast<std::uint64_t>(t));

    std::vector<Correspondence> shuffled = correspondences;
    std::mt19937_64 rng(trial_seed);
    fisher_yates(shuffled, rng);

    const ResidualSystem system =
        linearize_pair(shuffled, pair.target, pair.source, pair.pose_i, pair.pose_j);
    const QuadraticModel full = quadratic_of(system);

    std::size_t slot = 0;
    for (std::size_t r = 0; r < random_points.size(); ++r, ++slot) {
      const ResidualSelection sel =
          random_sampling_baseline(system, random_points[r], derive_seed(trial_seed, slot));
      const KldScore score = normalized_kld(full.H, reconstruct(system, sel).H);
      report.entries[slot].scores[trial] = score.score;
      report.entries[slot].raw_normed[trial] = score.normed_raw;
      degenerate[slot][trial] = score.degenerate ? 1 : 0;
    }
    for (std::size_t e = 0; e < exact_residuals.size(); ++e, ++slot) {
      CoresetConfig config;
      config.target_size = exact_residuals[e];
      config.rng_seed = trial_seed;
      const ResidualSelection sel = extract(system, config);
      const KldScore score = normalized_kld(full.H, reconstruct(system, sel).H);
      report.entries[slot].scores[trial] = score.score;
      report.entries[slot].raw_normed[trial] = score.normed_raw;
      degenerate[slot][trial] = score.degenerate ? 1 : 0;
    }
  });

  for (std::size_t e = 0; e < report.entries.size(); ++e) {
    auto& entry = report.entries[e];
    entry.degenerate_count = 0;
    for (const char d : degenerate[e]) {
      entry.degenerate_count += d;
    }
    fill_stats(entry);
  }
  return report;
}

DisplacementReport displacement_error_sweep(const AlignedPair& pair,
                                            const std::vector<Eigen::Index>& exact_residuals,
                                            const std::vector<int>& random_points,
                                            const std::vector<double>& noise_levels_deg,
                                            int trials, std::uint64_t seed) {
  DisplacementReport report;
  report.noise_levels_deg = noise_levels_deg;
  report.trials = trials;
  report.seed = seed;

  const Pose t_ij = between(pair.pose_i, pair.pose_j);
  const std::vector<Correspondence> correspondences =
      find_correspondences(pair.target, pair.source, t_ij, 1.0);
  const std::size_t levels = noise_levels_deg.size();

  for (const Eigen::Index m : exact_residuals) {
    DisplacementEntry entry;
    entry.method = "exact";
    entry.budget_residuals = m;
    entry.errors.assign(levels, std::vector<double>(static_cast<std::size_t>(trials), 0.0));
    report.entries.push_back(std::move(entry));
  }
  for (const int n : random_points) {
    DisplacementEntry entry;
    entry.method = "random";
    entry.budget_points = n;
    entry.budget_residuals = 3 * n;
    entry.errors.assign(levels, std::vector<double>(static_cast<std::size_t>(trials), 0.0));
    report.entries.push_back(std::move(entry));
  }

  std::vector<std::vector<char>> degenerate(report.entries.size(),
                                            std::vector<char>(static_cast<std::size_t>(trials), 0));
  // Displacement of a degenerate sampled system is unbounded; cap it so the
  // means stay finite.
  constexpr double kErrorCap = 1e6;

  parallel_for(trials, [&](std::int64_t t) {
    const auto trial = static_cast<std::size_t>(t);
    const std::uint64_t trial_seed = derive_seed(seed, static_cast<std::uint64_t>(t));

    std::vector<Correspondence> shuffled = correspondences;
    std::mt19937_64 rng(trial_seed);
    fisher_yates(shuffled, rng);

    const ResidualSystem eval_system =
        linearize_pair(shuffled, pair.target, pair.source, pair.pose_i, pair.pose_j);

    // Fixed selections, chosen at the evaluation pose.
    std::vector<ResidualSelection> selections;
    std::size_t slot = 0;
    for (const Eigen::Index m : exact_residuals) {
      CoresetConfig config;
      config.target_size = m;
      config.rng_seed = trial_seed;
      selections.push_back(extract(eval_system, config));
      ++slot;
    }
    for (const int n : random_points) {
      selections.push_back(random_sampling_baseline(eval_system, n, derive_seed(trial_seed, slot)));
      ++slot;
    }

    for (std::size_t level = 0; level < levels; ++level) {
      const double angle = noise_levels_deg[level] * M_PI / 180.0;
      Vector6d noise = Vector6d::Zero();
      if (angle != 0.0) {
        noise.head<3>() = angle * random_unit_vector(rng);
      }
      const Pose pose_j_noisy = retract(pair.pose_j, noise);

      // Whiteners stay fixed inside the stored correspondences; only the
      // geometry is re-evaluated.
      const ResidualSystem noisy =
          linearize_pair(shuffled, pair.target, pair.source, pair.pose_i, pose_j_noisy);
      const QuadraticModel full = quadratic_of(noisy);
      const Eigen::LDLT<Matrix6d> full_solver(full.H);
      const Vector6d dx_full = full_solver.solve(full.b);

      for (std::size_t s = 0; s < selections.size(); ++s) {
        const QuadraticModel approx = reconstruct(noisy, selections[s]);
        const Eigen::LDLT<Matrix6d> solver(approx.H);
        const Vector6d dx = solver.solve(approx.b);
        double err = (dx - dx_full).norm();
        if (!std::isfinite(err) || err > kErrorCap) {
          err = kErrorCap;
          degenerate[s][trial] = 1;
        }
        report.entries[s].errors[level][trial] = err;
      }
    }
  });

  for (std::size_t e = 0; e < report.entries.size(); ++e) {
    auto& entry = report.entries[e];
    entry.mean_per_level.resize(levels);
    for (std::size_t level = 0; level < levels; ++level) {
      double sum = 0.0;
      for (const double err : entry.errors[level]) {
        sum += err;
      }
      entry.mean_per_level[level] = sum / static_cast<double>(trials);
    }
    entry.degenerate_count = 0;
    for (const char d : degenerate[e]) {
      entry.degenerate_count += d;
    }
  }
  return report;
}

double median(std::vector<double> values) {
  if (values.empty()) {
    return 0.0;
  }
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) {
    return values[mid];
  }
  return 0.5 * (values[mid - 1] + values[mid]);
}

BenchReport bench_extraction(Eigen::Index n_rows, const std::vector<Eigen::Index>& targets,
                             int reps, std::uint64_t seed,
                             const std::vector<Eigen::Index>& svd_targets) {
  BenchReport report;
  report.n_rows = n_rows;
  report.reps = reps;
  report.seed = seed;

  // A small pool of shared inputs: every configuration sees the same systems.
  const int pool_size = std::min(reps, 8);
  std::vector<ResidualSystem> pool;
  pool.reserve(static_cast<std::size_t>(pool_size));
  for (int p = 0; p < pool_size; ++p) {
    pool.push_back(random_system(n_rows, derive_seed(seed, static_cast<std::uint64_t>(p))));
  }

  auto run = [&](Eigen::Index target, NullspaceMethod method) {
    BenchEntry entry;
    entry.target = target;
    entry.method = method;
    entry.times_ms.reserve(static_cast<std::size_t>(reps));
    for (int r = 0; r < reps; ++r) {
      const ResidualSystem& system = pool[static_cast<std::size_t>(r % pool_size)];
      CoresetConfig config;
      config.target_size = target;
      config.rng_seed = derive_seed(seed, static_cast<std::uint64_t>(r));
      config.nullspace = method;
      const auto start = Clock::now();
      const ResidualSelection sel = extract(system, config, &entry.profile);
      const double ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
      entry.times_ms.push_back(ms);
      if (sel.size() == 0) {
        throw Error("empty selection during benchmark");
      }
    }
    entry.median_ms = median(entry.times_ms);
    double sum = 0.0;
    for (const double v : entry.times_ms) {
      sum += v;
    }
    entry.mean_ms = sum / static_cast<double>(reps);
    entry.min_ms = *std::min_element(entry.times_ms.begin(), entry.times_ms.end());
    entry.max_ms = *std::max_element(entry.times_ms.begin(), entry.times_ms.end());
    return entry;
  };

  for (const Eigen::Index target : targets) {
    report.entries.push_back(run(target, NullspaceMethod::kLU));
  }
  for (const Eigen::Index target : svd_targets) {
    report.entries.push_back(run(target, NullspaceMethod::kSVD));
  }
  return report;
}

}  // namespace exactcoreset

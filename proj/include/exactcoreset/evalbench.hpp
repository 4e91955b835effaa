#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "exactcoreset/quadratic.hpp"
#include "exactcoreset/registration.hpp"
#include "exactcoreset/synthetic.hpp"

namespace exactcoreset {

/// Relative quadratic approximation error of a selection against the full
/// model: max(|dH|_inf, |db|_inf, |dc|) / max(|H|_inf, 1).
double approximation_error(const QuadraticModel& full, const QuadraticModel& approx);

struct ValidateReport {
  int trials = 0;
  Eigen::Index n_rows = 0;
  Eigen::Index target = 0;
  std::uint64_t seed = 0;
  NullspaceMethod method = NullspaceMethod::kLU;
  double threshold = 1e-10;

  std::vector<double> errors;          // per trial, relative
  std::vector<Eigen::Index> sizes;     // per trial, selection size
  double max_error = 0.0;
  bool all_pass = false;
  double total_seconds = 0.0;
  CoresetProfile profile;  // accumulated over trials
};

/// Random (J, e) trials: extract a subset, reconstruct, compare against the
/// full quadratic model.
ValidateReport validate_random(int trials, Eigen::Index n_rows, Eigen::Index target,
                               std::uint64_t seed, NullspaceMethod method = NullspaceMethod::kLU);

/// Uniformly samples whole points (all three axes); every selected row gets
/// weight (total points / sampled points) so the model is unbiased in
/// expectation.
ResidualSelection random_sampling_baseline(const ResidualSystem& system, int n_points,
                                           std::uint64_t seed);

struct KldScore {
  double score = 0.0;       // zero for identical matrices, ~1 when saturated
  double kld_raw = 0.0;     // as printed: 0.5 (log |H|/|H~| + tr(H^-1 H~))
  double normed_raw = 0.0;  // 1 - exp(-kld_raw)
  bool degenerate = false;
};

/// Gaussian-information divergence between the full Hessian and an
/// approximation. score shifts the zero point so that identical matrices give
/// exactly 0; a singular approximation is flagged degenerate with score 1.
KldScore normalized_kld(const Matrix6d& h_full, const Matrix6d& h_approx);

struct KldEntry {
  std::string method;  // "random" or "exact"
  int budget_points = 0;            // random sampling only
  Eigen::Index budget_residuals = 0;
  std::vector<double> scores;       // per trial
  std::vector<double> raw_normed;   // per trial, verbatim normalization
  int degenerate_count = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

struct KldReport {
  int trials = 0;
  std::uint64_t seed = 0;
  std::vector<KldEntry> entries;
};

/// Hessian approximation comparison on an aligned pair, point order shuffled
/// per trial.
KldReport kld_compare(const AlignedPair& pair, const std::vector<int>& random_points,
                      const std::vector<Eigen::Index>& exact_residuals, int trials,
                      std::uint64_t seed);

struct DisplacementEntry {
  std::string method;
  int budget_points = 0;
  Eigen::Index budget_residuals = 0;
  // errors[level][trial] = |dx_method - dx_full|
  std::vector<std::vector<double>> errors;
  std::vector<double> mean_per_level;
  int degenerate_count = 0;
};

struct DisplacementReport {
  std::vector<double> noise_levels_deg;
  int trials = 0;
  std::uint64_t seed = 0;
  std::vector<DisplacementEntry> entries;
};

/// Displacement-vector error under rotation noise: dx = H^-1 b of each
/// method's re-evaluated system versus the full one.
DisplacementReport displacement_error_sweep(const AlignedPair& pair,
                                            const std::vector<Eigen::Index>& exact_residuals,
                                            const std::vector<int>& random_points,
                                            const std::vector<double>& noise_levels_deg,
                                            int trials, std::uint64_t seed);

struct BenchEntry {
  Eigen::Index target = 0;
  NullspaceMethod method = NullspaceMethod::kLU;
  std::vector<double> times_ms;  // per repetition
  double median_ms = 0.0;
  double mean_ms = 0.0;
  double min_ms = 0.0;
  double max_ms = 0.0;
  CoresetProfile profile;  // accumulated over repetitions
};

struct BenchReport {
  Eigen::Index n_rows = 0;
  int reps = 0;
  std::uint64_t seed = 0;
  std::vector<BenchEntry> entries;
};

/// Extraction timing sweep on shared random systems. svd_targets additionally
/// times the SVD nullspace reference on the same inputs.
BenchReport bench_extraction(Eigen::Index n_rows, const std::vector<Eigen::Index>& targets,
                             int reps, std::uint64_t seed,
                             const std::vector<Eigen::Index>& svd_targets = {});

double median(std::vector<double> values);

}  // namespace exactcoreset

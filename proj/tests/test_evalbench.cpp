#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "exactcoreset/errors.hpp"
#include "exactcoreset/evalbench.hpp"

using namespace exactcoreset;

namespace {

ResidualSystem tiny_pair_system(Eigen::Index points, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ResidualSystem system;
  system.residuals.resize(3 * points);
  system.jacobian.resize(3 * points, 6);
  for (Eigen::Index r = 0; r < 3 * points; ++r) {
    for (Eigen::Index c = 0; c < 6; ++c) {
      system.jacobian(r, c) = gauss(rng);
    }
    system.residuals(r) = gauss(rng);
  }
  return system;
}

}  // namespace

TEST_CASE("validate_random passes on small sweeps and is deterministic") {
  const ValidateReport a = validate_random(5, 3000, 29, 71);
  CHECK(a.all_pass);
  CHECK(a.max_error < 1e-10);
  for (const Eigen::Index size : a.sizes) {
    CHECK(size == 29);
  }
  const ValidateReport b = validate_random(5, 3000, 29, 71);
  REQUIRE(a.errors.size() == b.errors.size());
  for (std::size_t i = 0; i < a.errors.size(); ++i) {
    CHECK(a.errors[i] == b.errors[i]);
  }
}

TEST_CASE("validate_random handles the N == M passthrough with zero error") {
  const ValidateReport report = validate_random(1, 29, 29, 5);
  CHECK(report.all_pass);
  CHECK(report.max_error == 0.0);
}

TEST_CASE("validate_random records a timing breakdown") {
  const ValidateReport report = validate_random(2, 5000, 64, 9);
  CHECK(report.profile.nullspace_calls > 0);
  CHECK(report.profile.flatten_seconds > 0.0);
  CHECK(report.profile.cluster_means_seconds > 0.0);
  CHECK(report.profile.caratheodory_seconds >= report.profile.nullspace_seconds);
  CHECK(report.total_seconds > 0.0);
}

TEST_CASE("random baseline with the full point budget reconstructs exactly") {
  const ResidualSystem system = tiny_pair_system(40, 3);
  const ResidualSelection sel = random_sampling_baseline(system, 40, 7);
  REQUIRE(sel.size() == system.rows());
  for (Eigen::Index i = 0; i < sel.size(); ++i) {
    CHECK(sel.weights(i) == 1.0);
  }
  CHECK(model_difference(quadratic_of(system), reconstruct(system, sel)) == 0.0);
}

TEST_CASE("random baseline keeps whole points with the unbiased weight") {
  const ResidualSystem system = tiny_pair_system(100, 4);
  const ResidualSelection sel = random_sampling_baseline(system, 10, 8);
  REQUIRE(sel.size() == 30);
  for (Eigen::Index i = 0; i < sel.size(); i += 3) {
    const Eigen::Index point = sel.row_indices[static_cast<std::size_t>(i)] / 3;
    CHECK(sel.row_indices[static_cast<std::size_t>(i)] == 3 * point);
    CHECK(sel.row_indices[static_cast<std::size_t>(i + 1)] == 3 * point + 1);
    CHECK(sel.row_indices[static_cast<std::size_t>(i + 2)] == 3 * point + 2);
    CHECK(sel.weights(i) == 10.0);
  }
  CHECK_THROWS_AS(random_sampling_baseline(system, 0, 1), InvalidTarget);
  CHECK_THROWS_AS(random_sampling_baseline(system, 101, 1), InvalidTarget);
}

TEST_CASE("normalized KLD scores identical matrices as zero") {
  const ResidualSystem system = tiny_pair_system(50, 11);
  const Matrix6d h = quadratic_of(system).H;
  const KldScore score = normalized_kld(h, h);
  CHECK(!score.degenerate);
  CHECK(score.score == 0.0);
  // Verbatim normalization evaluates to 1 - exp(-D/2) for identical inputs.
  CHECK(score.kld_raw == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(score.normed_raw == doctest::Approx(1.0 - std::exp(-3.0)).epsilon(1e-12));
}

TEST_CASE("normalized KLD flags singular approximations") {
  const ResidualSystem system = tiny_pair_system(50, 12);
  const Matrix6d h = quadratic_of(system).H;
  Matrix6d singular = Matrix6d::Zero();
  singular(0, 0) = 1.0;
  const KldScore score = normalized_kld(h, singular);
  CHECK(score.degenerate);
  CHECK(score.score == 1.0);
}

TEST_CASE("normalized KLD grows with the perturbation") {
  const ResidualSystem system = tiny_pair_system(80, 13);
  const Matrix6d h = quadratic_of(system).H;
  const KldScore mild = normalized_kld(h, 1.2 * h);
  const KldScore strong = normalized_kld(h, 5.0 * h);
  CHECK(mild.score > 0.0);
  CHECK(strong.score > mild.score);
}

namespace {

const AlignedPair& bench_pair() {
  static const AlignedPair pair = make_aligned_pair(/*seed=*/505, /*points_per_frame=*/1500);
  return pair;
}

}  // namespace

TEST_CASE("kld comparison separates exact from random sampling") {
  const KldReport report = kld_compare(bench_pair(), {10, 256}, {29}, /*trials=*/8, /*seed=*/21);
  REQUIRE(report.entries.size() == 3);

  const KldEntry& random_small = report.entries[0];
  const KldEntry& random_large = report.entries[1];
  const KldEntry& exact = report.entries[2];
  CHECK(random_small.method == "random");
  CHECK(exact.method == "exact");

  CHECK(random_small.mean > random_large.mean);
  CHECK(exact.mean <= 1e-9);
  for (const double s : exact.scores) {
    CHECK(s <= 1e-9);
  }
}

TEST_CASE("displacement sweep: exact sampling is exact at zero noise and degrades with noise") {
  const std::vector<double> levels{0.0, 1.0, 4.0};
  const DisplacementReport report =
      displacement_error_sweep(bench_pair(), {30}, {10}, levels, /*trials=*/6, /*seed=*/31);
  REQUIRE(report.entries.size() == 2);
  const DisplacementEntry& exact = report.entries[0];
  const DisplacementEntry& random = report.entries[1];
  CHECK(exact.method == "exact");
  CHECK(random.method == "random");

  CHECK(exact.mean_per_level[0] <= 1e-9);
  CHECK(exact.mean_per_level[1] > exact.mean_per_level[0]);
  CHECK(exact.mean_per_level[2] > exact.mean_per_level[1]);
  for (std::size_t level = 1; level < levels.size(); ++level) {
    CHECK(exact.mean_per_level[level] < random.mean_per_level[level]);
  }
}

TEST_CASE("bench sweep produces medians and a phase breakdown") {
  const BenchReport report = bench_extraction(2000, {29, 64}, 5, 17, {29});
  REQUIRE(report.entries.size() == 3);
  for (const auto& entry : report.entries) {
    CHECK(entry.times_ms.size() == 5);
    CHECK(entry.median_ms > 0.0);
    CHECK(entry.min_ms <= entry.median_ms);
    CHECK(entry.median_ms <= entry.max_ms);
    CHECK(entry.profile.nullspace_calls > 0);
  }
  CHECK(report.entries[2].method == NullspaceMethod::kSVD);
}

TEST_CASE("median helper") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
}

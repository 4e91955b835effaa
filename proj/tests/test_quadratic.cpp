#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "exactcoreset/errors.hpp"
#include "exactcoreset/quadratic.hpp"

using namespace exactcoreset;

namespace {

ResidualSystem random_system(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  ResidualSystem system;
  system.residuals.resize(n);
  system.jacobian.resize(n, 6);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < 6; ++c) {
      system.jacobian(r, c) = gauss(rng);
    }
    system.residuals(r) = gauss(rng);
  }
  return system;
}

// Independent accumulation oracle: explicit entry-by-entry loops.
QuadraticModel accumulate_oracle(const ResidualSystem& system, const ResidualSelection* selection) {
  QuadraticModel model;
  const Eigen::Index count = selection != nullptr ? selection->size() : system.rows();
  for (Eigen::Index k = 0; k < count; ++k) {
    const Eigen::Index row =
        selection != nullptr ? selection->row_indices[static_cast<std::size_t>(k)] : k;
    const double w = selection != nullptr ? selection->weights(k) : 1.0;
    for (Eigen::Index i = 0; i < 6; ++i) {
      for (Eigen::Index j = 0; j < 6; ++j) {
        model.H(i, j) += w * system.jacobian(row, i) * system.jacobian(row, j);
      }
      model.b(i) += w * system.jacobian(row, i) * system.residuals(row);
    }
    model.c += w * system.residuals(row) * system.residuals(row);
  }
  return model;
}

}  // namespace

TEST_CASE("flatten_row has 28 entries and the pinned layout") {
  CHECK(kFlattenedDim == 28);
  Eigen::Matrix<double, 1, 6> a = Eigen::Matrix<double, 1, 6>::Zero();
  CHECK(flatten_row(a, 0.0).isZero(0.0));

  a(0) = 1.0;  // unit row e_1, residual 1
  const auto flat = flatten_row(a, 1.0);
  CHECK(flat(0) == 1.0);  // h_11
  for (Eigen::Index i = 1; i < 21; ++i) {
    CHECK(flat(i) == 0.0);
  }
  CHECK(flat(21) == 1.0);  // b_1
  for (Eigen::Index i = 22; i < 27; ++i) {
    CHECK(flat(i) == 0.0);
  }
  CHECK(flat(27) == 1.0);  // c
}

TEST_CASE("flatten_row round-trips against the outer-product oracle") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Matrix<double, 1, 6> a;
  for (Eigen::Index i = 0; i < 6; ++i) {
    a(i) = gauss(rng);
  }
  const double e = gauss(rng);
  const auto flat = flatten_row(a, e);

  const Matrix6d outer = a.transpose() * a;
  Eigen::Index pos = 0;
  for (Eigen::Index r = 0; r < 6; ++r) {
    for (Eigen::Index c = r; c < 6; ++c) {
      CHECK(flat(pos++) == outer(r, c));
    }
  }
  const Vector6d be = a.transpose() * e;
  for (Eigen::Index r = 0; r < 6; ++r) {
    CHECK(flat(pos++) == be(r));
  }
  CHECK(flat(27) == e * e);
}

TEST_CASE("quadratic_of matches the naive accumulation oracle") {
  const ResidualSystem system = random_system(100, 5);
  const QuadraticModel fast = quadratic_of(system);
  const QuadraticModel oracle = accumulate_oracle(system, nullptr);
  CHECK((fast.H - oracle.H).cwiseAbs().maxCoeff() <= 1e-12 * oracle.H.cwiseAbs().maxCoeff());
  CHECK((fast.b - oracle.b).cwiseAbs().maxCoeff() <= 1e-12 * oracle.b.cwiseAbs().maxCoeff());
  CHECK(fast.c == doctest::Approx(oracle.c).epsilon(1e-12));
  CHECK((fast.H - fast.H.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("quadratic_of handles zero residuals and single rows") {
  ResidualSystem zero = random_system(40, 6);
  zero.residuals.setZero();
  const QuadraticModel model = quadratic_of(zero);
  CHECK(model.b.isZero(0.0));
  CHECK(model.c == 0.0);

  const ResidualSystem single = random_system(1, 7);
  const QuadraticModel one = quadratic_of(single);
  const Eigen::Matrix<double, 1, 6> a = single.jacobian.row(0);
  CHECK((one.H - a.transpose() * a).cwiseAbs().maxCoeff() == 0.0);
  CHECK(one.c == single.residuals(0) * single.residuals(0));
  // Rank-1 check.
  Eigen::SelfAdjointEigenSolver<Matrix6d> eig(one.H);
  CHECK(eig.eigenvalues().head<5>().cwiseAbs().maxCoeff() <= 1e-12 * eig.eigenvalues()(5));
}

TEST_CASE("identity selection reproduces quadratic_of exactly") {
  const ResidualSystem system = random_system(64, 8);
  ResidualSelection all;
  all.n_source_rows = system.rows();
  for (Eigen::Index i = 0; i < system.rows(); ++i) {
    all.row_indices.push_back(i);
  }
  all.weights = Eigen::VectorXd::Ones(system.rows());
  const QuadraticModel a = reconstruct(system, all);
  const QuadraticModel b = quadratic_of(system);
  CHECK((a.H - b.H).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.b - b.b).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.c == b.c);
}

TEST_CASE("reconstruct is linear in the weights") {
  const ResidualSystem system = random_system(40, 9);
  ResidualSelection sel;
  sel.n_source_rows = system.rows();
  sel.row_indices = {1, 5, 9, 13, 22, 37};
  sel.weights = Eigen::VectorXd::LinSpaced(6, 0.5, 3.0);
  const QuadraticModel once = reconstruct(system, sel);
  sel.weights *= 2.0;
  const QuadraticModel twice = reconstruct(system, sel);
  CHECK((twice.H - 2.0 * once.H).cwiseAbs().maxCoeff() <= 1e-14 * once.H.cwiseAbs().maxCoeff());
  CHECK((twice.b - 2.0 * once.b).cwiseAbs().maxCoeff() <= 1e-14 * once.b.cwiseAbs().maxCoeff());
  CHECK(twice.c == doctest::Approx(2.0 * once.c).epsilon(1e-14));
}

TEST_CASE("reconstruct validates selection indices") {
  const ResidualSystem system = random_system(30, 10);
  ResidualSelection sel;
  sel.n_source_rows = system.rows();
  sel.row_indices = {29, 30};
  sel.weights = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(reconstruct(system, sel), IndexOutOfRange);
}

TEST_CASE("extract needs more than 28 rows and a target of at least 29") {
  CHECK_THROWS_AS(extract(random_system(28, 1), CoresetConfig{}), TooFewRows);
  CoresetConfig bad;
  bad.target_size = 10;
  CHECK_THROWS_AS(extract(random_system(100, 1), bad), InvalidTarget);
}

TEST_CASE("extract passes through when no reduction is needed") {
  const ResidualSystem system = random_system(29, 12);
  const ResidualSelection sel = extract(system, CoresetConfig{});
  REQUIRE(sel.size() == 29);
  for (Eigen::Index i = 0; i < 29; ++i) {
    CHECK(sel.row_indices[static_cast<std::size_t>(i)] == i);
    CHECK(sel.weights(i) == 1.0);
  }
  CHECK(model_difference(quadratic_of(system), reconstruct(system, sel)) == 0.0);
}

TEST_CASE("extract reproduces the quadratic model from 29 of 30000 rows") {
  const ResidualSystem system = random_system(30000, 42);
  CoresetConfig config;
  config.target_size = 29;
  const ResidualSelection sel = extract(system, config);
  CHECK(sel.size() == 29);

  const QuadraticModel full = quadratic_of(system);
  const QuadraticModel approx = accumulate_oracle(system, &sel);
  const double scale = std::max(full.H.cwiseAbs().maxCoeff(), 1.0);
  CHECK(model_difference(full, approx) < 1e-10 * scale);
}

TEST_CASE("extract stays exact across the target sweep") {
  const ResidualSystem system = random_system(12000, 43);
  const QuadraticModel full = quadratic_of(system);
  const double scale = std::max(full.H.cwiseAbs().maxCoeff(), 1.0);
  for (const Eigen::Index m : {64, 128, 256, 512, 1024}) {
    CoresetConfig config;
    config.target_size = m;
    const ResidualSelection sel = extract(system, config);
    CHECK(sel.size() <= m);
    CHECK(sel.size() >= std::max<Eigen::Index>(m - config.cluster_count, 29));
    CHECK(model_difference(full, reconstruct(system, sel)) < 1e-10 * scale);
  }
}

TEST_CASE("selection indices are sorted and unique, weights positive") {
  const ResidualSystem system = random_system(5000, 44);
  CoresetConfig config;
  config.target_size = 64;
  const ResidualSelection sel = extract(system, config);
  for (std::size_t i = 1; i < sel.row_indices.size(); ++i) {
    CHECK(sel.row_indices[i - 1] < sel.row_indices[i]);
  }
  for (Eigen::Index i = 0; i < sel.size(); ++i) {
    CHECK(sel.weights(i) > 0.0);
  }
}

TEST_CASE("reconstructed Hessians stay positive semidefinite") {
  for (const std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const ResidualSystem system = random_system(2000, seed);
    CoresetConfig config;
    config.target_size = 29;
    config.rng_seed = seed;
    const ResidualSelection sel = extract(system, config);
    const QuadraticModel approx = reconstruct(system, sel);
    Matrix6d shifted = approx.H;
    shifted.diagonal().array() += 1e-9 * approx.H.trace();
    const Eigen::LLT<Matrix6d> llt(shifted);
    CHECK(llt.info() == Eigen::Success);
    CHECK(approx.c >= 0.0);
  }
}

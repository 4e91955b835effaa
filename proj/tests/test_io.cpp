#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "exactcoreset/downsample.hpp"
#include "exactcoreset/errors.hpp"
#include "exactcoreset/io.hpp"
#include "exactcoreset/synthetic.hpp"

using namespace exactcoreset;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("exactcoreset_test_" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("xyz round-trip") {
  TempDir dir;
  std::vector<Eigen::Vector3d> points{{0.5, -1.25, 3.0}, {1e-3, 2e4, -7.5}};
  save_xyz(dir.file("cloud.xyz"), points);
  const auto loaded = load_xyz(dir.file("cloud.xyz"));
  REQUIRE(loaded.size() == points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    CHECK((loaded[i] - points[i]).norm() < 1e-7);
  }
  CHECK_THROWS_AS(load_xyz(dir.file("missing.xyz")), IoError);
}

TEST_CASE("binary PLY round-trip and stride handling") {
  TempDir dir;
  std::vector<Eigen::Vector3d> points{{1.0f, 2.0f, 3.0f}, {-0.5f, 0.25f, 8.0f}};
  save_ply(dir.file("cloud.ply"), points);
  const auto loaded = load_ply(dir.file("cloud.ply"));
  REQUIRE(loaded.size() == 2);
  CHECK((loaded[0] - points[0]).norm() == 0.0);
  CHECK((loaded[1] - points[1]).norm() == 0.0);

  // Extra vertex properties are skipped via the stride.
  const std::string path = dir.file("stride.ply");
  {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    REQUIRE(f != nullptr);
    const char* header =
        "ply\nformat binary_little_endian 1.0\nelement vertex 1\n"
        "property float intensity\nproperty float x\nproperty float y\nproperty float z\n"
        "property uchar flag\nend_header\n";
    std::fwrite(header, 1, std::strlen(header), f);
    const float record[4] = {9.0f, 1.5f, 2.5f, 3.5f};
    std::fwrite(record, sizeof(float), 4, f);
    const unsigned char flag = 7;
    std::fwrite(&flag, 1, 1, f);
    std::fclose(f);
  }
  const auto strided = load_ply(path);
  REQUIRE(strided.size() == 1);
  CHECK(strided[0] == Eigen::Vector3d(1.5, 2.5, 3.5));

  CHECK_THROWS_AS(load_ply(dir.file("cloud.xyz")), IoError);
}

TEST_CASE("pose JSON round-trip normalizes the quaternion") {
  TempDir dir;
  Pose pose = exp_se3((Vector6d() << 0.3, -0.2, 0.7, 1.0, 2.0, -0.5).finished());
  save_pose(dir.file("pose.json"), pose);
  const Pose loaded = load_pose(dir.file("pose.json"));
  CHECK((loaded.rotation - pose.rotation).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((loaded.translation - pose.translation).norm() < 1e-12);
  CHECK(orthonormality_drift(loaded) < 1e-12);
}

TEST_CASE("TUM trajectory lines have eight columns") {
  TempDir dir;
  std::vector<Pose> poses(3);
  poses[1] = exp_se3((Vector6d() << 0.0, 0.0, 0.5, 1.0, 0.0, 0.0).finished());
  save_trajectory_tum(dir.file("traj.txt"), poses);

  std::ifstream in(dir.file("traj.txt"));
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    double field = 0.0;
    int fields = 0;
    while (ss >> field) {
      ++fields;
    }
    CHECK(fields == 8);
    ++lines;
  }
  CHECK(lines == 3);
}

TEST_CASE("factor JSON round-trip preserves the evaluation") {
  const AlignedPair pair = make_aligned_pair(/*seed=*/606, /*points_per_frame=*/1200);
  DownsampleConfig config;
  config.target_residuals = 29;
  config.rng_seed = 2;
  const SampledFactor factor =
      exact_downsample(pair.target, pair.source, pair.pose_i, pair.pose_j, config);

  const nlohmann::json j = factor_to_json(factor);
  const SampledFactor loaded = factor_from_json(j);

  CHECK(loaded.frame_i == factor.frame_i);
  CHECK(loaded.selection.row_indices == factor.selection.row_indices);
  REQUIRE(loaded.correspondences.size() == factor.correspondences.size());

  const PairQuadratic a =
      relinearize(factor, pair.target, pair.source, pair.pose_i, pair.pose_j);
  const PairQuadratic b =
      relinearize(loaded, pair.target, pair.source, pair.pose_i, pair.pose_j);
  CHECK((a.H - b.H).cwiseAbs().maxCoeff() <= 1e-12 * a.H.cwiseAbs().maxCoeff());
  CHECK(std::abs(a.c - b.c) <= 1e-12 * std::max(a.c, 1.0));
}

TEST_CASE("selection JSON uses the documented schema") {
  ResidualSelection sel;
  sel.row_indices = {1, 4, 7};
  sel.weights = Eigen::VectorXd::LinSpaced(3, 1.0, 3.0);
  sel.n_source_rows = 12;
  const nlohmann::json j = selection_to_json(sel);
  CHECK(j.contains("indices"));
  CHECK(j.contains("weights"));
  CHECK(j.contains("n_source_rows"));
  const ResidualSelection back = selection_from_json(j);
  CHECK(back.row_indices == sel.row_indices);
  CHECK(back.n_source_rows == 12);
  CHECK((back.weights - sel.weights).cwiseAbs().maxCoeff() == 0.0);
}

#include "exactcoreset/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "exactcoreset/rng.hpp"

namespace exactcoreset {

Eigen::Vector3d random_unit_vector(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::Vector3d v;
  do {
    v = Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
  } while (v.norm() < 1e-12);
  return v.normalized();
}

namespace {

struct WallSegment {
  Eigen::Vector2d a;
  Eigen::Vector2d b;
  double height;
};

struct Sphere {
  Eigen::Vector3d center;
  double radius;
};

// Fixed scene: a ground disc, an octagonal wall ring, and a handful of
// spheres scattered inside. Rich enough to constrain all six pose dofs from
// any viewpoint on the loop.
struct Scene {
  double ground_radius = 16.0;
  std::vector<WallSegment> walls;
  std::vector<Sphere> spheres;

  double ground_area = 0.0;
  std::vector<double> wall_area;
  std::vector<double> sphere_area;
  double total_area = 0.0;

  Scene() {
    const double wall_radius = 13.5;
    const double wall_height = 3.2;
    const int sides = 8;
    for (int s = 0; s < sides; ++s) {
      const double a0 = 2.0 * std::numbers::pi * s / sides;
      const double a1 = 2.0 * std::numbers::pi * (s + 1) / sides;
      walls.push_back({wall_radius * Eigen::Vector2d(std::cos(a0), std::sin(a0)),
                       wall_radius * Eigen::Vector2d(std::cos(a1), std::sin(a1)), wall_height});
    }
    spheres = {
        {{2.5, 1.0, 0.9}, 0.9},   {{-3.0, 4.5, 1.2}, 1.2},  {{-5.0, -4.0, 0.7}, 0.7},
        {{5.5, -3.5, 1.0}, 1.0},  {{0.5, -6.5, 1.3}, 1.3},  {{-0.5, 7.0, 0.8}, 0.8},
        {{7.5, 3.0, 1.1}, 1.1},
    };

    ground_area = std::numbers::pi * ground_radius * ground_radius;
    total_area = ground_area;
    for (const auto& w : walls) {
      wall_area.push_back((w.b - w.a).norm() * w.height);
      total_area += wall_area.back();
    }
    for (const auto& s : spheres) {
      sphere_area.push_back(4.0 * std::numbers::pi * s.radius * s.radius);
      total_area += sphere_area.back();
    }
  }

  Eigen::Vector3d sample(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double pick = unit(rng) * total_area;
    if (pick < ground_area) {
      // Uniform in the disc.
      const double r = ground_radius * std::sqrt(unit(rng));
      const double theta = 2.0 * std::numbers::pi * unit(rng);
      return {r * std::cos(theta), r * std::sin(theta), 0.0};
    }
    pick -= ground_area;
    for (std::size_t w = 0; w < walls.size(); ++w) {
      if (pick < wall_area[w]) {
        const double along = unit(rng);
        const double up = unit(rng) * walls[w].height;
        const Eigen::Vector2d xy = walls[w].a + along * (walls[w].b - walls[w].a);
        return {xy.x(), xy.y(), up};
      }
      pick -= wall_area[w];
    }
    for (std::size_t s = 0; s < spheres.size(); ++s) {
      if (pick < sphere_area[s]) {
        return spheres[s].center + spheres[s].radius * random_unit_vector(rng);
      }
      pick -= sphere_area[s];
    }
    return spheres.back().center + spheres.back().radius * random_unit_vector(rng);
  }
};

Pose loop_pose(double loop_radius, double angle) {
  Pose pose;
  pose.translation =
      Eigen::Vector3d(loop_radius * std::cos(angle), loop_radius * std::sin(angle), 1.1);
  const double yaw = angle + std::numbers::pi / 2.0;  // facing the tangent
  pose.rotation = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  return pose;
}

std::vector<Eigen::Vector3d> sample_frame(const Scene& scene, const Pose& gt_pose, int n_points,
                                          double sensor_range, double point_noise,
                                          std::mt19937_64& rng) {
  std::normal_distribution<double> noise(0.0, point_noise);
  const Pose inv = inverse(gt_pose);
  std::vector<Eigen::Vector3d> local;
  local.reserve(static_cast<std::size_t>(n_points));
  int guard = 200 * n_points;
  while (static_cast<int>(local.size()) < n_points && guard-- > 0) {
    Eigen::Vector3d p = scene.sample(rng);
    if ((p - gt_pose.translation).norm() > sensor_range) {
      continue;
    }
    p += Eigen::Vector3d(noise(rng), noise(rng), noise(rng));
    local.push_back(inv.apply(p));
  }
  return local;
}

}  // namespace

SyntheticWorld make_synthetic_world(const SyntheticConfig& config) {
  const Scene scene;
  SyntheticWorld world;
  world.gt_poses.reserve(static_cast<std::size_t>(config.frames));
  world.init_poses.reserve(static_cast<std::size_t>(config.frames));
  world.clouds.reserve(static_cast<std::size_t>(config.frames));

  CovarianceConfig cov;
  cov.k_neighbors = config.k_neighbors;

  for (int f = 0; f < config.frames; ++f) {
    const double angle = 2.0 * std::numbers::pi * f / config.frames;
    const Pose gt = loop_pose(config.loop_radius, angle);
    world.gt_poses.push_back(gt);

    std::mt19937_64 rng(derive_seed(config.seed, static_cast<std::uint64_t>(f)));
    const auto points = sample_frame(scene, gt, config.points_per_frame, config.sensor_range,
                                     config.point_noise, rng);
    world.clouds.push_back(estimate_covariances(points, cov));

    if (f == 0) {
      world.init_poses.push_back(gt);  // gauge frame starts at ground truth
      continue;
    }
    std::normal_distribution<double> trans_noise(0.0, config.init_translation_noise);
    std::normal_distribution<double> angle_noise(0.0,
                                                 config.init_rotation_noise_deg * std::numbers::pi /
                                                     180.0);
    Vector6d delta;
    delta.head<3>() = angle_noise(rng) * random_unit_vector(rng);
    delta.tail<3>() = Eigen::Vector3d(trans_noise(rng), trans_noise(rng), trans_noise(rng));
    world.init_poses.push_back(retract(gt, delta));
  }
  return world;
}

AlignedPair make_aligned_pair(std::uint64_t seed, int points_per_frame) {
  SyntheticConfig config;
  config.frames = 2;
  config.points_per_frame = points_per_frame;
  config.seed = seed;

  // Two nearby viewpoints instead of opposite loop ends.
  const Scene scene;
  AlignedPair pair;
  pair.pose_i = loop_pose(config.loop_radius, 0.0);
  pair.pose_j = loop_pose(config.loop_radius, 0.05);

  CovarianceConfig cov;
  cov.k_neighbors = config.k_neighbors;

  std::mt19937_64 rng_i(derive_seed(seed, 0));
  std::mt19937_64 rng_j(derive_seed(seed, 1));
  pair.target = estimate_covariances(
      sample_frame(scene, pair.pose_i, points_per_frame, config.sensor_range, config.point_noise,
                   rng_i),
      cov);
  pair.source = estimate_covariances(
      sample_frame(scene, pair.pose_j, points_per_frame, config.sensor_range, config.point_noise,
                   rng_j),
      cov);
  return pair;
}

}  // namespace exactcoreset

// Command-line harness: numerical validation, pairwise downsampling, timing
// benchmarks, Hessian/displacement comparisons, and desk-scale trajectory
// optimization on synthetic scenes.

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "exactcoreset/downsample.hpp"
#include "exactcoreset/errors.hpp"
#include "exactcoreset/evalbench.hpp"
#include "exactcoreset/io.hpp"
#include "exactcoreset/optimizer.hpp"
#include "exactcoreset/parallel.hpp"
#include "exactcoreset/synthetic.hpp"
#include "exactcoreset/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

using exactcoreset::AlignedPair;
using exactcoreset::NullspaceMethod;
using nlohmann::json;

json base_report(const std::string& command) {
  json j;
  j["command"] = command;
  j["version"] = exactcoreset::kVersion;
  // Timestamp lives in its own field so the rest of the report is
  // byte-reproducible for identical arguments and seeds.
  j["timestamp_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::system_clock::now().time_since_epoch())
                          .count();
  return j;
}

json profile_to_json(const exactcoreset::CoresetProfile& profile) {
  return json{{"flatten_seconds", profile.flatten_seconds},
              {"cluster_means_seconds", profile.cluster_means_seconds},
              {"caratheodory_seconds", profile.caratheodory_seconds},
              {"nullspace_seconds", profile.nullspace_seconds},
              {"rounds", profile.rounds},
              {"nullspace_calls", profile.nullspace_calls}};
}

NullspaceMethod parse_method(const std::string& name) {
  return name == "svd" ? NullspaceMethod::kSVD : NullspaceMethod::kLU;
}

void apply_threads(int threads) {
  if (threads <= 0) {
    if (const char* env = std::getenv("EXACTCORESET_THREADS")) {
      threads = std::atoi(env);
    }
  }
  if (threads > 0) {
    exactcoreset::set_max_threads(threads);
  }
}

struct ValidateArgs {
  int trials = 100;
  long n_rows = 30000;
  long target = 29;
  long clusters = 64;
  std::uint64_t seed = 0;
  std::string nullspace = "lu";
  std::string out_json;
  std::string out_csv;
};

int run_validate(const ValidateArgs& args) {
  const auto report = exactcoreset::validate_random(args.trials, args.n_rows, args.target,
                                                    args.seed, parse_method(args.nullspace));
  std::printf("validate: trials=%d n=%ld m=%ld max_error=%.3e threshold=%.0e -> %s (%.2f s)\n",
              report.trials, static_cast<long>(report.n_rows), static_cast<long>(report.target),
              report.max_error, report.threshold, report.all_pass ? "PASS" : "FAIL",
              report.total_seconds);

  if (!args.out_json.empty()) {
    json j = base_report("validate");
    j["config"] = {{"trials", args.trials},   {"n", args.n_rows},
                   {"m", args.target},        {"k", args.clusters},
                   {"seed", args.seed},       {"nullspace", args.nullspace},
                   {"threshold", report.threshold}};
    j["errors"] = report.errors;
    std::vector<long> sizes(report.sizes.begin(), report.sizes.end());
    j["selection_sizes"] = sizes;
    j["max_error"] = report.max_error;
    j["all_pass"] = report.all_pass;
    j["total_seconds"] = report.total_seconds;
    j["profile"] = profile_to_json(report.profile);
    exactcoreset::save_json(args.out_json, j);
  }
  if (!args.out_csv.empty()) {
    std::ostringstream csv;
    csv << "trial,error,selection_size\n";
    for (std::size_t t = 0; t < report.errors.size(); ++t) {
      csv << t << "," << report.errors[t] << "," << report.sizes[t] << "\n";
    }
    exactcoreset::write_text_file(args.out_csv, csv.str());
  }
  return report.all_pass ? kExitOk : kExitFailure;
}

struct DownsampleArgs {
  std::string target_path;
  std::string source_path;
  std::string pose_i_path;
  std::string pose_j_path;
  long target = 29;
  long clusters = 64;
  std::uint64_t seed = 0;
  double max_dist = 1.0;
  int k_neighbors = 10;
  std::string out_path = "factor.json";
};

int run_downsample(const DownsampleArgs& args) {
  exactcoreset::CovarianceConfig cov;
  cov.k_neighbors = args.k_neighbors;
  const auto cloud_i =
      exactcoreset::estimate_covariances(exactcoreset::load_points(args.target_path), cov);
  const auto cloud_j =
      exactcoreset::estimate_covariances(exactcoreset::load_points(args.source_path), cov);
  const exactcoreset::Pose pose_i =
      args.pose_i_path.empty() ? exactcoreset::Pose{} : exactcoreset::load_pose(args.pose_i_path);
  const exactcoreset::Pose pose_j =
      args.pose_j_path.empty() ? exactcoreset::Pose{} : exactcoreset::load_pose(args.pose_j_path);

  exactcoreset::DownsampleConfig config;
  config.target_residuals = args.target;
  config.cluster_count = args.clusters;
  config.rng_seed = args.seed;
  config.max_correspondence_dist = args.max_dist;

  exactcoreset::CoresetProfile profile;
  const auto factor =
      exactcoreset::exact_downsample(cloud_i, cloud_j, pose_i, pose_j, config, &profile);

  // Reconstruction check against the full linearization at the evaluation
  // poses.
  const auto full =
      exactcoreset::make_full_factor(cloud_i, cloud_j, pose_i, pose_j, args.max_dist);
  const auto full_q = exactcoreset::relinearize(full, cloud_i, cloud_j, pose_i, pose_j);
  const auto approx_q = exactcoreset::relinearize(factor, cloud_i, cloud_j, pose_i, pose_j);
  const double scale = std::max(full_q.H.cwiseAbs().maxCoeff(), 1.0);
  const double h_err = (full_q.H - approx_q.H).cwiseAbs().maxCoeff() / scale;

  std::printf(
      "downsample: %ld of %ld residual rows kept (%zu points), reconstruction error %.3e\n",
      static_cast<long>(factor.selection.size()), static_cast<long>(factor.extraction_rows),
      factor.correspondences.size(), h_err);

  json j = base_report("downsample");
  j["config"] = {{"target_cloud", args.target_path},
                 {"source_cloud", args.source_path},
                 {"m", args.target},
                 {"k", args.clusters},
                 {"seed", args.seed},
                 {"max_dist", args.max_dist},
                 {"k_neighbors", args.k_neighbors}};
  j["factor"] = exactcoreset::factor_to_json(factor);
  j["reconstruction_error"] = h_err;
  j["extraction_rows"] = factor.extraction_rows;
  j["profile"] = profile_to_json(profile);
  exactcoreset::save_json(args.out_path, j);
  return kExitOk;
}

struct BenchArgs {
  long n_rows = 30000;
  std::vector<long> targets{29, 64, 128, 256, 512, 1024};
  int reps = 31;
  std::uint64_t seed = 0;
  bool compare_svd = false;
  std::string out_json;
  std::string out_csv;
};

int run_bench(const BenchArgs& args) {
  std::vector<Eigen::Index> targets(args.targets.begin(), args.targets.end());
  std::vector<Eigen::Index> svd_targets;
  if (args.compare_svd) {
    svd_targets.push_back(targets.front());
  }
  const auto report =
      exactcoreset::bench_extraction(args.n_rows, targets, args.reps, args.seed, svd_targets);

  for (const auto& entry : report.entries) {
    std::printf("bench: %s m=%-5ld median %8.3f ms  (min %8.3f, mean %8.3f, max %8.3f)\n",
                entry.method == NullspaceMethod::kLU ? "lu " : "svd",
                static_cast<long>(entry.target), entry.median_ms, entry.min_ms, entry.mean_ms,
                entry.max_ms);
  }
  if (args.compare_svd) {
    const auto& lu = report.entries.front();
    const auto& svd = report.entries.back();
    std::printf("bench: lu speedup over svd at m=%ld: %.1fx\n", static_cast<long>(lu.target),
                svd.median_ms / lu.median_ms);
  }

  if (!args.out_json.empty()) {
    json j = base_report("bench");
    j["config"] = {{"n", args.n_rows},
                   {"m", args.targets},
                   {"reps", args.reps},
                   {"seed", args.seed},
                   {"compare_svd", args.compare_svd}};
    j["entries"] = json::array();
    for (const auto& entry : report.entries) {
      j["entries"].push_back({{"m", entry.target},
                              {"method", entry.method == NullspaceMethod::kLU ? "lu" : "svd"},
                              {"median_ms", entry.median_ms},
                              {"mean_ms", entry.mean_ms},
                              {"min_ms", entry.min_ms},
                              {"max_ms", entry.max_ms},
                              {"times_ms", entry.times_ms},
                              {"profile", profile_to_json(entry.profile)}});
    }
    exactcoreset::save_json(args.out_json, j);
  }
  if (!args.out_csv.empty()) {
    std::ostringstream csv;
    csv << "method,m,rep,ms\n";
    for (const auto& entry : report.entries) {
      for (std::size_t r = 0; r < entry.times_ms.size(); ++r) {
        csv << (entry.method == NullspaceMethod::kLU ? "lu" : "svd") << "," << entry.target << ","
            << r << "," << entry.times_ms[r] << "\n";
      }
    }
    exactcoreset::write_text_file(args.out_csv, csv.str());
  }
  return kExitOk;
}

struct KldArgs {
  std::vector<int> points{10, 64, 256, 1024};
  std::vector<long> exact{29, 192, 768, 3072};
  int trials = 100;
  std::uint64_t seed = 0;
  int pair_points = 3500;
  std::uint64_t pair_seed = 1;
  std::string out_json;
  std::string out_csv;
};

int run_kld(const KldArgs& args) {
  const AlignedPair pair = exactcoreset::make_aligned_pair(args.pair_seed, args.pair_points);
  const std::vector<Eigen::Index> exact(args.exact.begin(), args.exact.end());
  const auto report = exactcoreset::kld_compare(pair, args.points, exact, args.trials, args.seed);

  for (const auto& entry : report.entries) {
    std::printf("kld: %-6s budget=%5ld residuals  mean %.4f +/- %.4f  (degenerate %d/%d)\n",
                entry.method.c_str(), static_cast<long>(entry.budget_residuals), entry.mean,
                entry.stddev, entry.degenerate_count, report.trials);
  }

  if (!args.out_json.empty()) {
    json j = base_report("kld");
    j["config"] = {{"points", args.points},           {"m_exact", args.exact},
                   {"trials", args.trials},           {"seed", args.seed},
                   {"pair_points", args.pair_points}, {"pair_seed", args.pair_seed}};
    j["entries"] = json::array();
    for (const auto& entry : report.entries) {
      j["entries"].push_back({{"method", entry.method},
                              {"budget_points", entry.budget_points},
                              {"budget_residuals", entry.budget_residuals},
                              {"mean", entry.mean},
                              {"stddev", entry.stddev},
                              {"degenerate_count", entry.degenerate_count},
                              {"scores", entry.scores},
                              {"raw_normed", entry.raw_normed}});
    }
    exactcoreset::save_json(args.out_json, j);
  }
  if (!args.out_csv.empty()) {
    std::ostringstream csv;
    csv << "method,budget_points,budget_residuals,trial,score,normed_raw\n";
    for (const auto& entry : report.entries) {
      for (std::size_t t = 0; t < entry.scores.size(); ++t) {
        csv << entry.method << "," << entry.budget_points << "," << entry.budget_residuals << ","
            << t << "," << entry.scores[t] << "," << entry.raw_normed[t] << "\n";
      }
    }
    exactcoreset::write_text_file(args.out_csv, csv.str());
  }
  return kExitOk;
}

struct DisplaceArgs {
  std::vector<long> exact{30, 192, 768};
  std::vector<int> points{10, 64, 256};
  std::vector<double> noise{0.0, 0.5, 1.0, 2.0, 4.0};
  int trials = 50;
  std::uint64_t seed = 0;
  int pair_points = 3500;
  std::uint64_t pair_seed = 1;
  std::string out_json;
  std::string out_csv;
};

int run_displace(const DisplaceArgs& args) {
  const AlignedPair pair = exactcoreset::make_aligned_pair(args.pair_seed, args.pair_points);
  const std::vector<Eigen::Index> exact(args.exact.begin(), args.exact.end());
  const auto report = exactcoreset::displacement_error_sweep(pair, exact, args.points, args.noise,
                                                             args.trials, args.seed);

  for (const auto& entry : report.entries) {
    std::ostringstream line;
    line << "displace: " << entry.method << " budget=" << entry.budget_residuals << " residuals ";
    for (std::size_t level = 0; level < report.noise_levels_deg.size(); ++level) {
      char field[64];
      std::snprintf(field, sizeof(field), " %.2fdeg:%.3e", report.noise_levels_deg[level],
                    entry.mean_per_level[level]);
      line << field;
    }
    std::puts(line.str().c_str());
  }

  if (!args.out_json.empty()) {
    json j = base_report("displace");
    j["config"] = {{"m_exact", args.exact},   {"points", args.points},
                   {"noise_deg", args.noise}, {"trials", args.trials},
                   {"seed", args.seed},       {"pair_points", args.pair_points},
                   {"pair_seed", args.pair_seed}};
    j["entries"] = json::array();
    for (const auto& entry : report.entries) {
      j["entries"].push_back({{"method", entry.method},
                              {"budget_points", entry.budget_points},
                              {"budget_residuals", entry.budget_residuals},
                              {"mean_per_level", entry.mean_per_level},
                              {"degenerate_count", entry.degenerate_count},
                              {"errors", entry.errors}});
    }
    exactcoreset::save_json(args.out_json, j);
  }
  if (!args.out_csv.empty()) {
    std::ostringstream csv;
    csv << "method,budget_residuals,noise_deg,trial,error\n";
    for (const auto& entry : report.entries) {
      for (std::size_t level = 0; level < report.noise_levels_deg.size(); ++level) {
        for (std::size_t t = 0; t < entry.errors[level].size(); ++t) {
          csv << entry.method << "," << entry.budget_residuals << ","
              << report.noise_levels_deg[level] << "," << t << "," << entry.errors[level][t]
              << "\n";
        }
      }
    }
    exactcoreset::write_text_file(args.out_csv, csv.str());
  }
  return kExitOk;
}

struct OptimizeArgs {
  int frames = 20;
  int points_per_frame = 2000;
  long target = 29;
  bool full = false;
  std::uint64_t seed = 0;
  double min_ratio = 0.3;
  double max_dist = 1.0;
  int max_iterations = 100;
  bool refresh_phi = false;
  std::string out_dir = "optimize_out";
};

int run_optimize(const OptimizeArgs& args) {
  exactcoreset::SyntheticConfig scene;
  scene.frames = args.frames;
  scene.points_per_frame = args.points_per_frame;
  scene.seed = args.seed;
  const auto world = exactcoreset::make_synthetic_world(scene);

  exactcoreset::GraphConfig graph_config;
  graph_config.use_full_residuals = args.full;
  graph_config.target_residuals = args.target;
  graph_config.rng_seed = args.seed;
  graph_config.overlap.min_ratio = args.min_ratio;
  graph_config.overlap.max_correspondence_dist = args.max_dist;
  auto graph = exactcoreset::build_factor_graph(world.clouds, world.init_poses, graph_config);

  exactcoreset::OptimizerConfig opt;
  opt.max_iterations = args.max_iterations;
  opt.refresh_whitener = args.refresh_phi;
  const auto result = exactcoreset::optimize(graph, opt);

  const auto ate_init = exactcoreset::ate(world.init_poses, world.gt_poses);
  const auto ate_final = exactcoreset::ate(result.poses, world.gt_poses);

  std::printf(
      "optimize: %s factors, %zu pairs, %d accepted steps, cost %.6e -> %.6e, "
      "ATE %.4f m -> %.4f m, rows evaluated %zu\n",
      args.full ? "full" : "sampled", graph.factors.size(), result.iterations,
      result.cost_trace.front(), result.cost_trace.back(), ate_init.rmse, ate_final.rmse,
      result.rows_evaluated);

  std::filesystem::create_directories(args.out_dir);
  const auto path = [&](const std::string& name) {
    return (std::filesystem::path(args.out_dir) / name).string();
  };
  exactcoreset::save_trajectory_tum(path("estimated.tum"), result.poses);
  exactcoreset::save_trajectory_tum(path("ground_truth.tum"), world.gt_poses);
  exactcoreset::save_trajectory_tum(path("initial.tum"), world.init_poses);

  std::ostringstream csv;
  csv << "iteration,cost\n";
  for (std::size_t i = 0; i < result.cost_trace.size(); ++i) {
    csv << i << "," << result.cost_trace[i] << "\n";
  }
  exactcoreset::write_text_file(path("cost_trace.csv"), csv.str());

  json j = base_report("optimize");
  j["config"] = {{"frames", args.frames},
                 {"points_per_frame", args.points_per_frame},
                 {"m", args.target},
                 {"full", args.full},
                 {"seed", args.seed},
                 {"min_ratio", args.min_ratio},
                 {"max_dist", args.max_dist},
                 {"max_iterations", args.max_iterations},
                 {"refresh_phi", args.refresh_phi}};
  j["overlap_pairs"] = graph.overlap_pairs.size();
  j["iterations"] = result.iterations;
  j["converged"] = result.converged;
  j["cost_trace"] = result.cost_trace;
  j["rows_evaluated"] = result.rows_evaluated;
  j["ate_initial_m"] = ate_init.rmse;
  j["ate_final_m"] = ate_final.rmse;
  j["ate_final_std_m"] = ate_final.stddev;
  exactcoreset::save_json(path("report.json"), j);
  return kExitOk;
}

struct SynthArgs {
  int frames = 2;
  int points_per_frame = 3000;
  std::uint64_t seed = 0;
  std::string format = "xyz";
  std::string out_dir = "synth_out";
};

int run_synth(const SynthArgs& args) {
  exactcoreset::SyntheticConfig scene;
  scene.frames = args.frames;
  scene.points_per_frame = args.points_per_frame;
  scene.seed = args.seed;
  const auto world = exactcoreset::make_synthetic_world(scene);

  std::filesystem::create_directories(args.out_dir);
  for (int f = 0; f < args.frames; ++f) {
    const auto& means = world.clouds[static_cast<std::size_t>(f)].means;
    const std::string stem =
        (std::filesystem::path(args.out_dir) / ("frame_" + std::to_string(f))).string();
    if (args.format == "ply") {
      exactcoreset::save_ply(stem + ".ply", means);
    } else {
      exactcoreset::save_xyz(stem + ".xyz", means);
    }
    exactcoreset::save_pose(stem + "_gt_pose.json", world.gt_poses[static_cast<std::size_t>(f)]);
    exactcoreset::save_pose(stem + "_init_pose.json",
                            world.init_poses[static_cast<std::size_t>(f)]);
  }
  std::printf("synth: wrote %d frames to %s\n", args.frames, args.out_dir.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact weighted-coreset downsampling for point cloud registration"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker thread cap (env EXACTCORESET_THREADS)");

  ValidateArgs validate_args;
  auto* validate = app.add_subcommand("validate", "random-system exactness validation");
  validate->add_option("--trials", validate_args.trials)->check(CLI::PositiveNumber);
  validate->add_option("--n", validate_args.n_rows, "residual rows per system")
      ->check(CLI::Range(29l, 10000000l));
  validate->add_option("--m", validate_args.target, "target residual count (>= 29)")
      ->check(CLI::Range(29l, 10000000l));
  validate->add_option("--k", validate_args.clusters)->check(CLI::Range(30l, 100000l));
  validate->add_option("--seed", validate_args.seed);
  validate->add_option("--nullspace", validate_args.nullspace)
      ->check(CLI::IsMember({"lu", "svd"}));
  validate->add_option("--out", validate_args.out_json, "report JSON path");
  validate->add_option("--out-csv", validate_args.out_csv, "per-trial CSV path");

  DownsampleArgs downsample_args;
  auto* downsample = app.add_subcommand("downsample", "extract an exact factor for a cloud pair");
  downsample->add_option("--target", downsample_args.target_path, "target cloud (.xyz or .ply)")
      ->required();
  downsample->add_option("--source", downsample_args.source_path, "source cloud (.xyz or .ply)")
      ->required();
  downsample->add_option("--pose-i", downsample_args.pose_i_path, "target pose JSON");
  downsample->add_option("--pose-j", downsample_args.pose_j_path, "source pose JSON");
  downsample->add_option("--m", downsample_args.target)->check(CLI::Range(29l, 10000000l));
  downsample->add_option("--k", downsample_args.clusters)->check(CLI::Range(30l, 100000l));
  downsample->add_option("--seed", downsample_args.seed);
  downsample->add_option("--max-dist", downsample_args.max_dist)->check(CLI::PositiveNumber);
  downsample->add_option("--knn", downsample_args.k_neighbors)->check(CLI::Range(4, 1000));
  downsample->add_option("--out", downsample_args.out_path, "factor JSON path");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "extraction timing sweep");
  bench->add_option("--n", bench_args.n_rows)->check(CLI::Range(29l, 10000000l));
  bench->add_option("--m", bench_args.targets, "target sizes")->delimiter(',');
  bench->add_option("--reps", bench_args.reps)->check(CLI::PositiveNumber);
  bench->add_option("--seed", bench_args.seed);
  bench->add_flag("--compare-svd", bench_args.compare_svd,
                  "also time the SVD nullspace reference");
  bench->add_option("--out", bench_args.out_json);
  bench->add_option("--out-csv", bench_args.out_csv);

  KldArgs kld_args;
  auto* kld = app.add_subcommand("kld", "Hessian approximation comparison");
  kld->add_option("--points", kld_args.points, "random-sampling point budgets")->delimiter(',');
  kld->add_option("--m-exact", kld_args.exact, "exact-sampling residual budgets")->delimiter(',');
  kld->add_option("--trials", kld_args.trials)->check(CLI::PositiveNumber);
  kld->add_option("--seed", kld_args.seed);
  kld->add_option("--pair-points", kld_args.pair_points)->check(CLI::Range(100, 1000000));
  kld->add_option("--pair-seed", kld_args.pair_seed);
  kld->add_option("--out", kld_args.out_json);
  kld->add_option("--out-csv", kld_args.out_csv);

  DisplaceArgs displace_args;
  auto* displace = app.add_subcommand("displace", "displacement error under rotation noise");
  displace->add_option("--m", displace_args.exact, "exact-sampling residual budgets")
      ->delimiter(',');
  displace->add_option("--points", displace_args.points, "random-sampling point budgets")
      ->delimiter(',');
  displace->add_option("--noise", displace_args.noise, "rotation noise levels (degrees)")
      ->delimiter(',');
  displace->add_option("--trials", displace_args.trials)->check(CLI::PositiveNumber);
  displace->add_option("--seed", displace_args.seed);
  displace->add_option("--pair-points", displace_args.pair_points)
      ->check(CLI::Range(100, 1000000));
  displace->add_option("--pair-seed", displace_args.pair_seed);
  displace->add_option("--out", displace_args.out_json);
  displace->add_option("--out-csv", displace_args.out_csv);

  OptimizeArgs optimize_args;
  auto* optimize = app.add_subcommand("optimize", "multi-frame registration on a synthetic loop");
  optimize->add_option("--frames", optimize_args.frames)->check(CLI::Range(2, 200));
  optimize->add_option("--points-per-frame", optimize_args.points_per_frame)
      ->check(CLI::Range(100, 1000000));
  optimize->add_option("--m", optimize_args.target)->check(CLI::Range(29l, 10000000l));
  optimize->add_flag("--full", optimize_args.full, "use every residual instead of sampling");
  optimize->add_option("--seed", optimize_args.seed);
  optimize->add_option("--min-ratio", optimize_args.min_ratio)->check(CLI::Range(0.0, 1.0));
  optimize->add_option("--max-dist", optimize_args.max_dist)->check(CLI::PositiveNumber);
  optimize->add_option("--max-iterations", optimize_args.max_iterations)
      ->check(CLI::PositiveNumber);
  optimize->add_flag("--refresh-phi", optimize_args.refresh_phi,
                     "recompute whiteners every iteration (comparison runs)");
  optimize->add_option("--out-dir", optimize_args.out_dir);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "write synthetic frames for the downsample command");
  synth->add_option("--frames", synth_args.frames)->check(CLI::Range(1, 200));
  synth->add_option("--points-per-frame", synth_args.points_per_frame)
      ->check(CLI::Range(100, 1000000));
  synth->add_option("--seed", synth_args.seed);
  synth->add_option("--format", synth_args.format)->check(CLI::IsMember({"xyz", "ply"}));
  synth->add_option("--out-dir", synth_args.out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  apply_threads(threads);

  try {
    if (validate->parsed()) {
      return run_validate(validate_args);
    }
    if (downsample->parsed()) {
      return run_downsample(downsample_args);
    }
    if (bench->parsed()) {
      return run_bench(bench_args);
    }
    if (kld->parsed()) {
      return run_kld(kld_args);
    }
    if (displace->parsed()) {
      return run_displace(displace_args);
    }
    if (optimize->parsed()) {
      return run_optimize(optimize_args);
    }
    if (synth->parsed()) {
      return run_synth(synth_args);
    }
  } catch (const exactcoreset::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

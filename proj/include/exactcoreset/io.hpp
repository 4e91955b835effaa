#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "exactcoreset/downsample.hpp"
#include "exactcoreset/se3.hpp"

#include <json.hpp>

namespace exactcoreset {

/// ASCII "x y z" per line.
std::vector<Eigen::Vector3d> load_xyz(const std::string& path);
void save_xyz(const std::string& path, const std::vector<Eigen::Vector3d>& points);

/// Binary little-endian PLY with float32 vertex x/y/z (other scalar vertex
/// properties are skipped).
std::vector<Eigen::Vector3d> load_ply(const std::string& path);
void save_ply(const std::string& path, const std::vector<Eigen::Vector3d>& points);

/// Dispatch on extension: .ply binary, anything else ASCII XYZ.
std::vector<Eigen::Vector3d> load_points(const std::string& path);

/// Pose as {"t": [x, y, z], "q": [x, y, z, w]}.
nlohmann::json pose_to_json(const Pose& pose);
Pose pose_from_json(const nlohmann::json& j);
Pose load_pose(const std::string& path);
void save_pose(const std::string& path, const Pose& pose);

/// TUM text trajectory: "timestamp tx ty tz qx qy qz qw" per frame, timestamp
/// = frame index.
void save_trajectory_tum(const std::string& path, const std::vector<Pose>& poses);

nlohmann::json selection_to_json(const ResidualSelection& selection);
ResidualSelection selection_from_json(const nlohmann::json& j);

nlohmann::json factor_to_json(const SampledFactor& factor);
SampledFactor factor_from_json(const nlohmann::json& j);

void write_text_file(const std::string& path, const std::string& contents);
nlohmann::json load_json(const std::string& path);
void save_json(const std::string& path, const nlohmann::json& j);

}  // namespace exactcoreset

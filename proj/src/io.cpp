#include "exactcoreset/io.hpp"

#include <Eigen/Geometry>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "exactcoreset/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "binary PLY reader assumes a little-endian host");

namespace exactcoreset {

std::vector<Eigen::Vector3d> load_xyz(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  std::vector<Eigen::Vector3d> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') {
      continue;
    }
    std::istringstream ss(line);
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    if (!(ss >> x >> y >> z)) {
      throw IoError(path + ":" + std::to_string(line_no) + ": expected three numbers");
    }
    points.emplace_back(x, y, z);
  }
  return points;
}

void save_xyz(const std::string& path, const std::vector<Eigen::Vector3d>& points) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path);
  }
  char buffer[128];
  for (const auto& p : points) {
    std::snprintf(buffer, sizeof(buffer), "%.9g %.9g %.9g\n", p.x(), p.y(), p.z());
    out << buffer;
  }
}

namespace {

std::size_t ply_type_size(const std::string& type) {
  if (type == "char" || type == "int8" || type == "uchar" || type == "uint8") {
    return 1;
  }
  if (type == "short" || type == "int16" || type == "ushort" || type == "uint16") {
    return 2;
  }
  if (type == "int" || type == "int32" || type == "uint" || type == "uint32" || type == "float" ||
      type == "float32") {
    return 4;
  }
  if (type == "double" || type == "float64") {
    return 8;
  }
  throw IoError("unsupported PLY property type: " + type);
}

}  // namespace

std::vector<Eigen::Vector3d> load_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  std::string line;
  if (!std::getline(in, line) || line.substr(0, 3) != "ply") {
    throw IoError(path + ": not a PLY file");
  }

  bool binary_le = false;
  std::size_t vertex_count = 0;
  std::size_t stride = 0;
  long offset_x = -1;
  long offset_y = -1;
  long offset_z = -1;
  bool in_vertex_element = false;

  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    std::istringstream ss(line);
    std::string keyword;
    ss >> keyword;
    if (keyword == "comment") {
      continue;
    }
    if (keyword == "format") {
      std::string format;
      ss >> format;
      binary_le = format == "binary_little_endian";
      continue;
    }
    if (keyword == "element") {
      std::string name;
      std::size_t count = 0;
      ss >> name >> count;
      in_vertex_element = name == "vertex";
      if (in_vertex_element) {
        vertex_count = count;
      } else if (vertex_count > 0) {
        break;  // vertex element fully described; later elements are ignored
      }
      continue;
    }
    if (keyword == "property" && in_vertex_element) {
      std::string type;
      std::string name;
      ss >> type >> name;
      if (type == "list") {
        throw IoError(path + ": list properties in the vertex element are unsupported");
      }
      const std::size_t size = ply_type_size(type);
      if (name == "x" || name == "y" || name == "z") {
        if (type != "float" && type != "float32") {
          throw IoError(path + ": vertex " + name + " must be float32");
        }
        if (name == "x") {
          offset_x = static_cast<long>(stride);
        } else if (name == "y") {
          offset_y = static_cast<long>(stride);
        } else {
          offset_z = static_cast<long>(stride);
        }
      }
      stride += size;
      continue;
    }
    if (keyword == "end_header") {
      break;
    }
  }

  if (!binary_le) {
    throw IoError(path + ": only binary_little_endian PLY is supported");
  }
  if (offset_x < 0 || offset_y < 0 || offset_z < 0) {
    throw IoError(path + ": vertex element lacks float x/y/z properties");
  }

  std::vector<char> record(stride);
  std::vector<Eigen::Vector3d> points;
  points.reserve(vertex_count);
  for (std::size_t i = 0; i < vertex_count; ++i) {
    if (!in.read(record.data(), static_cast<std::streamsize>(stride))) {
      throw IoError(path + ": unexpected end of file at vertex " + std::to_string(i));
    }
    float x = 0.0f;
    float y = 0.0f;
    float z = 0.0f;
    std::memcpy(&x, record.data() + offset_x, sizeof(float));
    std::memcpy(&y, record.data() + offset_y, sizeof(float));
    std::memcpy(&z, record.data() + offset_z, sizeof(float));
    points.emplace_back(x, y, z);
  }
  return points;
}

void save_ply(const std::string& path, const std::vector<Eigen::Vector3d>& points) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path);
  }
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << points.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\nend_header\n";
  for (const auto& p : points) {
    const float xyz[3] = {static_cast<float>(p.x()), static_cast<float>(p.y()),
                          static_cast<float>(p.z())};
    out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
  }
}

std::vector<Eigen::Vector3d> load_points(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".ply") {
    return load_ply(path);
  }
  return load_xyz(path);
}

nlohmann::json pose_to_json(const Pose& pose) {
  const Eigen::Quaterniond q(pose.rotation);
  return nlohmann::json{
      {"t", {pose.translation.x(), pose.translation.y(), pose.translation.z()}},
      {"q", {q.x(), q.y(), q.z(), q.w()}},
  };
}

Pose pose_from_json(const nlohmann::json& j) {
  const auto& t = j.at("t");
  const auto& q = j.at("q");
  if (t.size() != 3 || q.size() != 4) {
    throw IoError("pose JSON must have t[3] and q[4] (x, y, z, w)");
  }
  Eigen::Quaterniond quat(q[3].get<double>(), q[0].get<double>(), q[1].get<double>(),
                          q[2].get<double>());
  quat.normalize();
  Pose pose;
  pose.rotation = quat.toRotationMatrix();
  pose.translation = Eigen::Vector3d(t[0].get<double>(), t[1].get<double>(), t[2].get<double>());
  return pose;
}

Pose load_pose(const std::string& path) { return pose_from_json(load_json(path)); }

void save_pose(const std::string& path, const Pose& pose) { save_json(path, pose_to_json(pose)); }

void save_trajectory_tum(const std::string& path, const std::vector<Pose>& poses) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path);
  }
  char buffer[256];
  for (std::size_t i = 0; i < poses.size(); ++i) {
    const Eigen::Quaterniond q(poses[i].rotation);
    const Eigen::Vector3d& t = poses[i].translation;
    std::snprintf(buffer, sizeof(buffer), "%.1f %.9f %.9f %.9f %.9f %.9f %.9f %.9f\n",
                  static_cast<double>(i), t.x(), t.y(), t.z(), q.x(), q.y(), q.z(), q.w());
    out << buffer;
  }
}

nlohmann::json selection_to_json(const ResidualSelection& selection) {
  nlohmann::json j;
  j["indices"] = selection.row_indices;
  std::vector<double> weights(selection.weights.data(),
                              selection.weights.data() + selection.weights.size());
  j["weights"] = weights;
  j["n_source_rows"] = selection.n_source_rows;
  return j;
}

ResidualSelection selection_from_json(const nlohmann::json& j) {
  ResidualSelection selection;
  selection.row_indices = j.at("indices").get<std::vector<Eigen::Index>>();
  const auto weights = j.at("weights").get<std::vector<double>>();
  selection.weights =
      Eigen::Map<const Eigen::VectorXd>(weights.data(), static_cast<Eigen::Index>(weights.size()));
  selection.n_source_rows = j.at("n_source_rows").get<Eigen::Index>();
  return selection;
}

nlohmann::json factor_to_json(const SampledFactor& factor) {
  nlohmann::json corrs = nlohmann::json::array();
  for (const auto& c : factor.correspondences) {
    std::vector<double> phi(9);
    Eigen::Map<Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(phi.data()) = c.phi;
    corrs.push_back({{"source", c.source_index}, {"target", c.target_index}, {"phi", phi}});
  }
  return nlohmann::json{
      {"frame_i", factor.frame_i},
      {"frame_j", factor.frame_j},
      {"eval_pose_i", pose_to_json(factor.eval_pose_i)},
      {"eval_pose_j", pose_to_json(factor.eval_pose_j)},
      {"correspondences", corrs},
      {"selection", selection_to_json(factor.selection)},
      {"extraction_rows", factor.extraction_rows},
  };
}

SampledFactor factor_from_json(const nlohmann::json& j) {
  SampledFactor factor;
  factor.frame_i = j.at("frame_i").get<int>();
  factor.frame_j = j.at("frame_j").get<int>();
  factor.eval_pose_i = pose_from_json(j.at("eval_pose_i"));
  factor.eval_pose_j = pose_from_json(j.at("eval_pose_j"));
  for (const auto& c : j.at("correspondences")) {
    Correspondence corr;
    corr.source_index = c.at("source").get<Eigen::Index>();
    corr.target_index = c.at("target").get<Eigen::Index>();
    const auto phi = c.at("phi").get<std::vector<double>>();
    if (phi.size() != 9) {
      throw IoError("phi must have 9 entries");
    }
    corr.phi = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(phi.data());
    factor.correspondences.push_back(corr);
  }
  factor.selection = selection_from_json(j.at("selection"));
  factor.extraction_rows = j.at("extraction_rows").get<Eigen::Index>();
  return factor;
}

void write_text_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path);
  }
  out << contents;
}

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  nlohmann::json j;
  in >> j;
  return j;
}

void save_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path);
  }
  out << j.dump(2) << "\n";
}

}  // namespace exactcoreset

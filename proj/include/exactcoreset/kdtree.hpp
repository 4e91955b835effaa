#pragma once

#include <Eigen/Core>
#include <vector>

namespace exactcoreset {

/// Static 3-d kd-tree over a point array. Ties in distance resolve to the
/// lowest point index so queries match a brute-force scan exactly.
class KdTree3 {
 public:
  explicit KdTree3(const std::vector<Eigen::Vector3d>& points);

  /// Index of the nearest point within max_dist, or -1. Squared distance is
  /// written to sq_dist_out when a hit is found.
  int nearest(const Eigen::Vector3d& query, double max_dist,
              double* sq_dist_out = nullptr) const;

  /// Indices of the k nearest points (k capped at the tree size), sorted by
  /// (distance, index).
  std::vector<int> knn(const Eigen::Vector3d& query, int k) const;

  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    int axis = -1;        // -1 marks a leaf
    double split = 0.0;
    int left = -1;
    int right = -1;
    int begin = 0;  // leaf payload range in order_
    int end = 0;
  };

  int build(int begin, int end, int depth);

  std::vector<Eigen::Vector3d> points_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
  int root_ = -1;

  static constexpr int kLeafSize = 16;
};

}  // namespace exactcoreset

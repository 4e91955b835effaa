#include "exactcoreset/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace exactcoreset {

KdTree3::KdTree3(const std::vector<Eigen::Vector3d>& points) : points_(points) {
  order_.resize(points_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) {
    order_[i] = static_cast<int>(i);
  }
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 8);
    root_ = build(0, static_cast<int>(points_.size()), 0);
  }
}

int KdTree3::build(int begin, int end, int depth) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  if (end - begin <= kLeafSize) {
    // Sorted leaf payload keeps tie-breaking on lowest index deterministic.
    std::sort(order_.begin() + begin, order_.begin() + end);
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }

  // Split along the axis of largest extent.
  Eigen::Vector3d lo = points_[static_cast<std::size_t>(order_[begin])];
  Eigen::Vector3d hi = lo;
  for (int i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[static_cast<std::size_t>(order_[i])]);
    hi = hi.cwiseMax(points_[static_cast<std::size_t>(order_[i])]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](int a, int b) {
                     const double pa = points_[static_cast<std::size_t>(a)](axis);
                     const double pb = points_[static_cast<std::size_t>(b)](axis);
                     return pa < pb || (pa == pb && a < b);
                   });

  nodes_[id].axis = axis;
  nodes_[id].split = points_[static_cast<std::size_t>(order_[mid])](axis);
  const int left = build(begin, mid, depth + 1);
  const int right = build(mid, end, depth + 1);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

namespace {
struct Best {
  double sq_dist = std::numeric_limits<double>::infinity();
  int index = -1;
};
}  // namespace

int KdTree3::nearest(const Eigen::Vector3d& query, double max_dist, double* sq_dist_out) const {
  if (points_.empty()) {
    return -1;
  }
  Best best;
  best.sq_dist = max_dist * max_dist;
  bool found = false;

  // Iterative depth-first search with pruning.
  std::vector<int> stack;
  stack.push_back(root_);
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.axis < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int idx = order_[static_cast<std::size_t>(i)];
        const double d = (points_[static_cast<std::size_t>(idx)] - query).squaredNorm();
        if (d < best.sq_dist || (d == best.sq_dist && (!found || idx < best.index))) {
          best.sq_dist = d;
          best.index = idx;
          found = true;
        }
      }
      continue;
    }
    const double delta = query(node.axis) - node.split;
    const int near = delta <= 0.0 ? node.left : node.right;
    const int far = delta <= 0.0 ? node.right : node.left;
    if (delta * delta <= best.sq_dist) {
      stack.push_back(far);
    }
    stack.push_back(near);
  }

  if (found && sq_dist_out != nullptr) {
    *sq_dist_out = best.sq_dist;
  }
  return found ? best.index : -1;
}

std::vector<int> KdTree3::knn(const Eigen::Vector3d& query, int k) const {
  k = std::min<int>(k, static_cast<int>(points_.size()));
  std::vector<int> result;
  if (k <= 0) {
    return result;
  }

  using Entry = std::pair<double, int>;  // (squared distance, index)
  std::priority_queue<Entry> heap;       // max-heap on distance then index

  std::vector<int> stack;
  stack.push_back(root_);
  while (!stack.empty()) {
    const int id = stack.back();
    stack.pop_back();
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.axis < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int idx = order_[static_cast<std::size_t>(i)];
        const double d = (points_[static_cast<std::size_t>(idx)] - query).squaredNorm();
        if (static_cast<int>(heap.size()) < k) {
          heap.emplace(d, idx);
        } else if (Entry(d, idx) < heap.top()) {
          heap.pop();
          heap.emplace(d, idx);
        }
      }
      continue;
    }
    const double delta = query(node.axis) - node.split;
    const int near = delta <= 0.0 ? node.left : node.right;
    const int far = delta <= 0.0 ? node.right : node.left;
    if (static_cast<int>(heap.size()) < k || delta * delta <= heap.top().first) {
      stack.push_back(far);
    }
    stack.push_back(near);
  }

  result.resize(heap.size());
  for (auto it = result.rbegin(); it != result.rend(); ++it) {
    *it = heap.top().second;
    heap.pop();
  }
  return result;
}

}  // namespace exactcoreset

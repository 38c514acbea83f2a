#include "hairstrand/kdtree.hpp"

#include "hairstrand/error.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace hairstrand {

KdTree::KdTree(std::span<const Point3> points, std::size_t leaf_size)
    : points_(points.begin(), points.end()), leaf_size_(std::max<std::size_t>(leaf_size, 1)) {
  if (points_.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidArgument("too many points for KdTree");
  }
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / leaf_size_ + 1);
    build(0, static_cast<std::uint32_t>(points_.size()));
  }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= leaf_size_) return id;

  Eigen::Vector3d lo = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector3d hi = -lo;
  for (auto i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all points coincide

  const auto mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double pa = points_[a][axis], pb = points_[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  const double split = points_[order_[mid]][axis];
  // Left holds coordinates <= split, right holds >= split.
  const auto left = build(begin, mid);
  const auto right = build(mid, end);
  Node& n = nodes_[id];
  n.axis = axis;
  n.split = split;
  n.left = left;
  n.right = right;
  return id;
}

void KdTree::radius_search(const Point3& query, double radius,
                           std::vector<std::size_t>& out) const {
  if (points_.empty() || radius < 0.0) return;
  radius_recursive(0, query, radius * radius, out);
}

void KdTree::radius_recursive(std::int32_t id, const Point3& q, double r2,
                              std::vector<std::size_t>& out) const {
  const Node& n = nodes_[id];
  if (n.axis < 0) {
    for (auto i = n.begin; i < n.end; ++i) {
      const auto idx = order_[i];
      if ((points_[idx] - q).squaredNorm() <= r2) out.push_back(idx);
    }
    return;
  }
  const double diff = q[n.axis] - n.split;
  // Prune only when the splitting plane alone puts the far side out of reach.
  if (diff <= 0.0 || diff * diff <= r2) radius_recursive(n.left, q, r2, out);
  if (diff >= 0.0 || diff * diff <= r2) radius_recursive(n.right, q, r2, out);
}

KdTree::Nearest KdTree::nearest(const Point3& query) const {
  if (points_.empty()) throw EmptyInput("nearest() on an empty KdTree");
  Nearest best{std::numeric_limits<std::size_t>::max(), std::numeric_limits<double>::infinity()};
  nearest_recursive(0, query, best);
  return best;
}

void KdTree::nearest_recursive(std::int32_t id, const Point3& q, Nearest& best) const {
  const Node& n = nodes_[id];
  if (n.axis < 0) {
    for (auto i = n.begin; i < n.end; ++i) {
      const auto idx = order_[i];
      const double d2 = (points_[idx] - q).squaredNorm();
      if (d2 < best.squared_distance || (d2 == best.squared_distance && idx < best.index)) {
        best = {idx, d2};
      }
    }
    return;
  }
  const double diff = q[n.axis] - n.split;
  const auto near = diff <= 0.0 ? n.left : n.right;
  const auto far = diff <= 0.0 ? n.right : n.left;
  nearest_recursive(near, q, best);
  if (diff * diff <= best.squared_distance) nearest_recursive(far, q, best);
}

}  // namespace hairstrand

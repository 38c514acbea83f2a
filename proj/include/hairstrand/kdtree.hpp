#pragma once

#include "hairstrand/strand.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace hairstrand {

/// Static 3D k-d tree over a point array. Queries are const and may run
/// concurrently from several threads.
class KdTree {
 public:
  struct Nearest {
    std::size_t index = 0;
    double squared_distance = 0.0;
  };

  KdTree() = default;
  explicit KdTree(std::span<const Point3> points, std::size_t leaf_size = 8);

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  const Point3& point(std::size_t i) const { return points_[i]; }

  /// Appends to `out` the index of every point p with ‖p − q‖² ≤ radius².
  /// Order is unspecified but deterministic.
  void radius_search(const Point3& query, double radius, std::vector<std::size_t>& out) const;

  /// Closest point; ties go to the lower index. Tree must be non-empty.
  Nearest nearest(const Point3& query) const;

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = -1;  // -1 marks a leaf
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void radius_recursive(std::int32_t node, const Point3& q, double r2,
                        std::vector<std::size_t>& out) const;
  void nearest_recursive(std::int32_t node, const Point3& q, Nearest& best) const;

  std::vector<Point3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::size_t leaf_size_ = 8;
};

}  // namespace hairstrand

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "havs/core.hpp"

namespace havs {

/// Squared Euclidean distance. Every distance comparison in the library goes
/// through this so that equal pairs compare equal bit-for-bit.
inline double squared_distance(const Vec3& a, const Vec3& b) noexcept {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

/// Exact k-nearest-neighbour search over a static point set.
class KdTree {
 public:
  explicit KdTree(std::span<const Vec3> points, std::size_t leaf_size = 12);

  /// Squared distances to the k nearest points other than `self`, ascending.
  /// Pass self = size() to include every point.
  std::vector<double> knn_squared(const Vec3& query, std::size_t k, std::size_t self) const;

  /// Squared distance to the nearest point other than `self`.
  double nearest_squared(const Vec3& query, std::size_t self) const;

  std::size_t size() const noexcept { return points_.size(); }

 private:
  struct Node {
    std::size_t begin, end;  // range in order_
    int axis = -1;           // -1 for leaves
    double split = 0.0;
    std::size_t left = 0, right = 0;
  };

  std::size_t build(std::size_t begin, std::size_t end);

  template <typename Visit>
  void search(std::size_t node, const Vec3& q, double& bound, Visit&& visit) const;

  std::span<const Vec3> points_;
  std::vector<Index> order_;
  std::vector<Node> nodes_;
  std::size_t leaf_size_;
};

}  // namespace havs

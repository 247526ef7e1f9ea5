#include "havs/knn.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>

namespace havs {

KdTree::KdTree(std::span<const Vec3> points, std::size_t leaf_size)
    : points_(points), order_(points.size()), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
  std::iota(order_.begin(), order_.end(), Index{0});
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / leaf_size_ + 1);
    build(0, points_.size());
  }
}

std::size_t KdTree::build(std::size_t begin, std::size_t end) {
  const std::size_t id = nodes_.size();
  nodes_.push_back(Node{begin, end});
  if (end - begin <= leaf_size_) return id;

  Vec3 lo = points_[order_[begin]];
  Vec3 hi = lo;
  for (std::size_t k = begin; k < end; ++k) {
    const Vec3& p = points_[order_[k]];
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  int axis = 0;
  for (int a = 1; a < 3; ++a) {
    if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
  }
  if (hi[axis] == lo[axis]) return id;  // all points coincide

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                   order_.begin() + static_cast<std::ptrdiff_t>(mid),
                   order_.begin() + static_cast<std::ptrdiff_t>(end),
                   [&](Index a, Index b) { return points_[a][axis] < points_[b][axis]; });
  const double split = points_[order_[mid]][axis];

  const std::size_t left = build(begin, mid);
  const std::size_t right = build(mid, end);
  Node& node = nodes_[id];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

template <typename Visit>
void KdTree::search(std::size_t node_id, const Vec3& q, double& bound, Visit&& visit) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (std::size_t k = node.begin; k < node.end; ++k) visit(order_[k]);
    return;
  }
  // Points left of mid have coordinate <= split, right of mid >= split.
  const double diff = q[node.axis] - node.split;
  const std::size_t near = diff < 0 ? node.left : node.right;
  const std::size_t far = diff < 0 ? node.right : node.left;
  search(near, q, bound, visit);
  if (diff * diff <= bound) search(far, q, bound, visit);
}

std::vector<double> KdTree::knn_squared(const Vec3& query, std::size_t k,
                                        std::size_t self) const {
  std::vector<double> out;
  if (k == 0 || nodes_.empty()) return out;
  std::priority_queue<double> heap;  // max-heap of the best k so far
  double bound = std::numeric_limits<double>::infinity();
  search(0, query, bound, [&](Index i) {
    if (i == self) return;
    const double d = squared_distance(query, points_[i]);
    if (heap.size() < k) {
      heap.push(d);
      if (heap.size() == k) bound = heap.top();
    } else if (d < heap.top()) {
      heap.pop();
      heap.push(d);
      bound = heap.top();
    }
  });
  out.resize(heap.size());
  for (std::size_t j = out.size(); j-- > 0;) {
    out[j] = heap.top();
    heap.pop();
  }
  return out;
}

double KdTree::nearest_squared(const Vec3& query, std::size_t self) const {
  double best = std::numeric_limits<double>::infinity();
  if (nodes_.empty()) return best;
  search(0, query, best, [&](Index i) {
    if (i == self) return;
    best = std::min(best, squared_distance(query, points_[i]));
  });
  return best;
}

}  // namespace havs

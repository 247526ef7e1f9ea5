#include <algorithm>
#include <cmath>

#include "havs/samplers.hpp"

namespace havs {
namespace {

Box subset_box(std::span<const Vec3> points, std::span<const Index> subset) {
  if (subset.empty()) return bounding_box(points);
  Box b{points[subset[0]], points[subset[0]]};
  for (Index i : subset) {
    for (int a = 0; a < 3; ++a) {
      b.min[a] = std::min(b.min[a], points[i][a]);
      b.max[a] = std::max(b.max[a], points[i][a]);
    }
  }
  return b;
}

Vec3 scaled(const Vec3& aspect, double s) { return {aspect[0] * s, aspect[1] * s, aspect[2] * s}; }

}  // namespace

std::size_t avs_upper_bound(std::size_t m, double sigma) {
  const double slack = sigma * static_cast<double>(m);
  const double nearest = std::round(slack);
  const double extra = std::abs(slack - nearest) <= 1e-9 * std::max(1.0, slack)
                           ? nearest
                           : std::ceil(slack);
  return m + static_cast<std::size_t>(extra);
}

AvsResult avs(std::span<const Vec3> points, std::span<const Index> subset, std::size_t m,
              const AvsParams& params) {
  const std::size_t n = subset.empty() ? points.size() : subset.size();
  if (m == 0 || m > n) {
    throw Error(ErrorCode::kOutOfRange, "avs target " + std::to_string(m) + " outside [1, " +
                                            std::to_string(n) + "]");
  }
  if (!(params.sigma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sigma must be positive");
  if (params.t_max < 1) throw Error(ErrorCode::kInvalidArgument, "t_max must be >= 1");
  for (double a : params.aspect) {
    if (!(a > 0.0)) throw Error(ErrorCode::kInvalidArgument, "aspect components must be positive");
  }

  const Box box = subset_box(points, subset);
  double extent = 0.0;
  double magnitude = 0.0;
  for (int a = 0; a < 3; ++a) {
    extent = std::max(extent, (box.max[a] - box.min[a]) / params.aspect[a]);
    magnitude = std::max({magnitude, std::abs(box.min[a]) / params.aspect[a],
                          std::abs(box.max[a]) / params.aspect[a]});
  }
  const std::size_t upper = avs_upper_bound(m, params.sigma);

  VoxelCounter counter(n);
  AvsResult result;
  // Counts above `upper` only ever steer the search, so they stop early.
  auto evaluate = [&](double s) {
    ++result.evaluations;
    return counter.count(points, subset, scaled(params.aspect, s), box, params.threads, upper);
  };
  auto exact = [&](double s) {
    return counter.count(points, subset, scaled(params.aspect, s), box, params.threads);
  };
  auto finish = [&](double s, std::size_t count, bool converged) {
    result.scale = s;
    result.voxel = scaled(params.aspect, s);
    result.count = count;
    result.converged = converged;
    return result;
  };
  auto in_range = [&](std::size_t c) { return c >= m && c <= upper; };

  if (extent == 0.0) {
    // Every point coincides: one voxel at any scale.
    if (m != 1) {
      throw Error(ErrorCode::kOutOfRange,
                  "cannot reach " + std::to_string(m) + " non-empty voxels: all points coincide");
    }
    const double s = std::max(magnitude, 1.0);
    return finish(s, evaluate(s), true);
  }
  // Keeps every voxel coordinate within +-2^60.
  const double s_floor = std::max(magnitude, extent) * 0x1.0p-60;

  double s_hi = extent;
  std::size_t c_hi = evaluate(s_hi);
  for (int d = 0; d < 8 && c_hi > upper; ++d) {
    s_hi *= 2.0;
    c_hi = evaluate(s_hi);
  }
  if (in_range(c_hi)) return finish(s_hi, c_hi, true);
  if (c_hi > upper) {
    // The box straddles a grid plane at every scale; nothing coarser exists.
    return finish(s_hi, exact(s_hi), false);
  }

  double s_lo = s_hi / 1024.0;
  std::size_t c_lo = evaluate(s_lo);
  while (c_lo < m) {
    if (s_lo <= s_floor) {
      throw Error(ErrorCode::kOutOfRange, "cannot reach " + std::to_string(m) +
                                              " non-empty voxels (only " + std::to_string(c_lo) +
                                              " distinct positions)");
    }
    s_hi = s_lo;
    c_hi = c_lo;
    s_lo *= 0.5;
    c_lo = evaluate(s_lo);
  }
  if (c_lo <= upper) return finish(s_lo, c_lo, true);

  for (int it = 1; it <= params.t_max; ++it) {
    result.iterations = it;
    const double mid = std::sqrt(s_lo * s_hi);
    const std::size_t c = evaluate(mid);
    if (in_range(c)) return finish(mid, c, true);
    if (c > upper) {
      s_lo = mid;
      c_lo = c;
    } else {
      s_hi = mid;
      c_hi = c;
    }
  }
  return finish(s_lo, exact(s_lo), false);
}

AvsResult avs(const PointCloud& cloud, std::size_t m, const AvsParams& params) {
  return avs(cloud.points(), {}, m, params);
}

}  // namespace havs

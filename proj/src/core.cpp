#include "havs/core.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace havs {

PointCloud::PointCloud(std::vector<Vec3> points,
                       std::optional<std::vector<float>> intensity,
                       std::optional<std::vector<std::int32_t>> labels)
    : points_(std::move(points)),
      intensity_(std::move(intensity)),
      labels_(std::move(labels)) {
  if (points_.size() >= std::numeric_limits<Index>::max()) {
    throw Error(ErrorCode::kOutOfRange, "point cloud too large");
  }
  if (intensity_ && intensity_->size() != points_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "intensity length does not match point count");
  }
  if (labels_ && labels_->size() != points_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "label length does not match point count");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const Vec3& p = points_[i];
    if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "non-finite coordinate at point " + std::to_string(i));
    }
  }
}

std::span<const float> PointCloud::intensity() const {
  if (!intensity_) throw Error(ErrorCode::kInvalidArgument, "cloud has no intensity");
  return *intensity_;
}

std::span<const std::int32_t> PointCloud::labels() const {
  if (!labels_) throw Error(ErrorCode::kInvalidArgument, "cloud has no instance labels");
  return *labels_;
}

PointCloud PointCloud::gather(std::span<const Index> order) const {
  std::vector<Vec3> pts;
  pts.reserve(order.size());
  std::optional<std::vector<float>> inten;
  std::optional<std::vector<std::int32_t>> labs;
  if (intensity_) inten.emplace().reserve(order.size());
  if (labels_) labs.emplace().reserve(order.size());
  for (Index i : order) {
    if (i >= points_.size()) throw Error(ErrorCode::kOutOfRange, "gather index out of range");
    pts.push_back(points_[i]);
    if (inten) inten->push_back((*intensity_)[i]);
    if (labs) labs->push_back((*labels_)[i]);
  }
  return PointCloud(std::move(pts), std::move(inten), std::move(labs));
}

std::string to_string(Method m) {
  switch (m) {
    case Method::kFps: return "fps";
    case Method::kRps: return "rps";
    case Method::kRvs: return "rvs";
    case Method::kIds: return "ids";
    case Method::kHavs: return "havs";
  }
  return "unknown";
}

std::string to_string(Representative r) {
  switch (r) {
    case Representative::kAverage: return "average";
    case Representative::kCenter: return "center";
    case Representative::kRandom: return "random";
    case Representative::kCenterClosest: return "center-closest";
  }
  return "unknown";
}

std::string to_string(Adjustment a) {
  switch (a) {
    case Adjustment::kNone: return "none";
    case Adjustment::kTruncated: return "truncated";
    case Adjustment::kPadded: return "padded";
  }
  return "unknown";
}

Method parse_method(const std::string& s) {
  for (Method m : {Method::kFps, Method::kRps, Method::kRvs, Method::kIds, Method::kHavs}) {
    if (to_string(m) == s) return m;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown method '" + s + "'");
}

Representative parse_representative(const std::string& s) {
  for (Representative r : {Representative::kAverage, Representative::kCenter,
                           Representative::kRandom, Representative::kCenterClosest}) {
    if (to_string(r) == s) return r;
  }
  if (s == "centerclosest" || s == "center_closest" || s == "closest") {
    return Representative::kCenterClosest;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown representative strategy '" + s + "'");
}

void SampleSpec::validate(std::size_t n) const {
  if (m == 0 || m > n) {
    throw Error(ErrorCode::kOutOfRange, "sample count " + std::to_string(m) +
                                            " outside [1, " + std::to_string(n) + "]");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::kInvalidArgument, "sigma must be positive");
  }
  if (t_max < 1) throw Error(ErrorCode::kInvalidArgument, "t_max must be >= 1");
  if (layers < 1) throw Error(ErrorCode::kInvalidArgument, "layer count must be >= 1");
  for (double a : aspect) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw Error(ErrorCode::kInvalidArgument, "aspect components must be positive");
    }
  }
  if (fixed_voxel) {
    for (double v : *fixed_voxel) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::kInvalidArgument, "voxel components must be positive");
      }
    }
  }
  if (method == Method::kRvs && !fixed_voxel) {
    throw Error(ErrorCode::kInvalidArgument, "rvs requires a fixed voxel size");
  }
  if (method == Method::kIds &&
      (ids_knn < 1 || static_cast<std::size_t>(ids_knn) >= n)) {
    throw Error(ErrorCode::kOutOfRange, "ids neighbourhood size must lie in [1, n)");
  }
  if (threads < 0) throw Error(ErrorCode::kInvalidArgument, "thread count must be >= 0");
}

LayerPlan plan_layers(std::size_t m, int k) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "layer count must be >= 1");
  if (k > 31) throw Error(ErrorCode::kOutOfRange, "at most 31 layers are supported");
  if (m < static_cast<std::size_t>(k)) {
    throw Error(ErrorCode::kOutOfRange, "sample count " + std::to_string(m) +
                                            " smaller than layer count " + std::to_string(k));
  }
  using u128 = unsigned __int128;
  const u128 total = ((u128{1} << (2 * k)) - 1) / 3;  // sum of 4^(l-1)
  LayerPlan plan;
  plan.counts.resize(static_cast<std::size_t>(k));
  std::size_t assigned = 0;
  for (int l = 0; l + 1 < k; ++l) {
    const u128 share = (u128{m} << (2 * l)) / total;
    const std::size_t c = std::max<std::size_t>(1, static_cast<std::size_t>(share));
    plan.counts[static_cast<std::size_t>(l)] = c;
    assigned += c;
  }
  plan.counts.back() = m - assigned;
  return plan;
}

Box bounding_box(std::span<const Vec3> points) {
  if (points.empty()) throw Error(ErrorCode::kInvalidArgument, "bounding box of empty cloud");
  Box b{points[0], points[0]};
  for (const Vec3& p : points) {
    for (int a = 0; a < 3; ++a) {
      b.min[a] = std::min(b.min[a], p[a]);
      b.max[a] = std::max(b.max[a], p[a]);
    }
  }
  return b;
}

Box bounding_box(const PointCloud& cloud) { return bounding_box(cloud.points()); }

int default_threads() {
  if (const char* env = std::getenv("HAVS_NUM_THREADS")) {
    const int t = std::atoi(env);
    if (t > 0) return t;
  }
  return std::max(1, omp_get_max_threads());
}

int resolve_threads(int requested) { return requested > 0 ? requested : default_threads(); }

}  // namespace havs

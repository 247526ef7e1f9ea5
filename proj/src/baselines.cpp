#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "havs/knn.hpp"
#include "havs/random.hpp"
#include "havs/samplers.hpp"
#include "selection.hpp"

namespace havs {
namespace {

void check_count(std::size_t m, std::size_t n, const char* method) {
  if (m == 0 || m > n) {
    throw Error(ErrorCode::kOutOfRange, std::string(method) + " sample count " +
                                            std::to_string(m) + " outside [1, " +
                                            std::to_string(n) + "]");
  }
}

SampleOutput from_indices(const PointCloud& cloud, std::vector<Index> idx, const char* method) {
  SampleOutput out;
  out.method = method;
  out.points.reserve(idx.size());
  for (Index i : idx) out.points.push_back(cloud[i]);
  out.layer_of.assign(idx.size(), 1);
  out.indices = std::move(idx);
  return out;
}

}  // namespace

SampleOutput rps(const PointCloud& cloud, std::size_t m, std::uint64_t seed) {
  const std::size_t n = cloud.size();
  check_count(m, n, "rps");
  std::vector<Index> pool = detail::all_indices(n);
  Rng rng(seed, 0x525053);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t r = j + static_cast<std::size_t>(rng.below(n - j));
    std::swap(pool[j], pool[r]);
  }
  pool.resize(m);
  return from_indices(cloud, std::move(pool), "rps");
}

SampleOutput rvs(const PointCloud& cloud, std::size_t m, const Vec3& voxel,
                 Representative representative, std::uint64_t seed, int threads) {
  const std::size_t n = cloud.size();
  check_count(m, n, "rvs");
  for (double v : voxel) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, "voxel components must be positive");
    }
  }
  const auto points = cloud.points();
  const detail::VoxelSelection sel =
      detail::select_representatives(points, {}, voxel, representative, seed, threads);
  const std::size_t k = sel.winners.size();

  LayerLog log;
  log.target = m;
  log.voxel = voxel;
  log.nonempty = k;
  log.adaptive = false;
  log.converged = k >= m && k <= avs_upper_bound(m, 0.05);

  Rng rng(seed, 0x525653);
  std::vector<std::size_t> keep(k);
  std::iota(keep.begin(), keep.end(), std::size_t{0});
  if (k > m) {
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t r = j + static_cast<std::size_t>(rng.below(k - j));
      std::swap(keep[j], keep[r]);
    }
    keep.resize(m);
    std::sort(keep.begin(), keep.end());
    log.adjustment = Adjustment::kTruncated;
  }

  SampleOutput out;
  out.method = "rvs";
  std::vector<std::uint8_t> used(n, 0);
  for (std::size_t pos : keep) {
    out.points.push_back(sel.reps[pos]);
    if (!sel.synthesized) out.indices.push_back(sel.rep_index[pos]);
    used[sel.synthesized ? sel.winners[pos].index : sel.rep_index[pos]] = 1;
  }
  if (k < m) {
    const std::vector<Index> everyone = detail::all_indices(n);
    for (Index i : detail::pad_uniform(everyone, used, m - k, rng)) {
      out.points.push_back(points[i]);
      if (!sel.synthesized) out.indices.push_back(i);
    }
    log.adjustment = Adjustment::kPadded;
  }
  out.layer_of.assign(m, 1);
  out.avs_log.push_back(log);
  return out;
}

std::vector<double> knn_density(std::span<const Vec3> points, std::size_t k_nn) {
  const std::size_t n = points.size();
  if (k_nn == 0 || k_nn >= n) {
    throw Error(ErrorCode::kOutOfRange, "neighbourhood size must lie in [1, n)");
  }
  const KdTree tree(points);
  std::vector<double> density(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<double> sq = tree.knn_squared(points[i], k_nn, i);
    double sum = 0.0;
    for (double d : sq) sum += std::sqrt(d);
    const double mean = sum / static_cast<double>(k_nn);
    density[i] = mean > 0.0 ? 1.0 / mean : std::numeric_limits<double>::infinity();
  }
  return density;
}

SampleOutput ids(const PointCloud& cloud, std::size_t m, std::size_t k_nn, IdsMode mode,
                 std::uint64_t seed) {
  const std::size_t n = cloud.size();
  check_count(m, n, "ids");
  const auto points = cloud.points();
  const std::vector<double> density = knn_density(points, k_nn);
  std::vector<Index> order = detail::all_indices(n);

  if (mode == IdsMode::kDeterministic) {
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m), order.end(),
                      [&](Index a, Index b) {
                        if (density[a] != density[b]) return density[a] < density[b];
                        return detail::point_less(points, a, b);
                      });
  } else {
    // Weighted sampling without replacement (Efraimidis-Spirakis): keep the m
    // largest log(u) / w with weight w = 1 / density.
    Rng rng(seed, 0x494453);
    std::vector<double> key(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = 1.0 - rng.uniform();  // (0, 1]
      const double w = 1.0 / density[i];
      key[i] = w > 0.0 ? std::log(u) / w : -std::numeric_limits<double>::infinity();
    }
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m), order.end(),
                      [&](Index a, Index b) {
                        if (key[a] != key[b]) return key[a] > key[b];
                        return a < b;
                      });
  }
  order.resize(m);
  return from_indices(cloud, std::move(order), "ids");
}

}  // namespace havs

#include "havs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "havs/knn.hpp"

namespace havs {

Histogram make_histogram(std::span<const double> values, std::size_t bins, double lo, double hi) {
  if (bins == 0) throw Error(ErrorCode::kInvalidArgument, "histogram needs at least one bin");
  Histogram h;
  h.edges.resize(bins + 1);
  h.counts.assign(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = lo + width * static_cast<double>(b);
  h.edges.back() = hi;
  for (double v : values) {
    std::size_t b = 0;
    if (width > 0.0) {
      const double t = std::floor((v - lo) / width);
      b = t <= 0.0 ? 0 : std::min(bins - 1, static_cast<std::size_t>(t));
    }
    ++h.counts[b];
  }
  return h;
}

SpacingStats spacing_stats(std::span<const Vec3> subset, std::size_t bins) {
  const std::size_t n = subset.size();
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "spacing needs at least two points");
  SpacingStats st;
  st.nn_dists.resize(n);
  if (n < 64) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) best = std::min(best, squared_distance(subset[i], subset[j]));
      }
      st.nn_dists[i] = std::sqrt(best);
    }
  } else {
    const KdTree tree(subset);
    for (std::size_t i = 0; i < n; ++i) {
      st.nn_dists[i] = std::sqrt(tree.nearest_squared(subset[i], i));
    }
  }
  // Summing in sorted order keeps the mean independent of subset order.
  std::vector<double> sorted = st.nn_dists;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double d : sorted) sum += d;
  st.min = sorted.front();
  st.max = sorted.back();
  st.mean = std::clamp(sum / static_cast<double>(n), st.min, st.max);
  st.histogram = make_histogram(st.nn_dists, bins, 0.0, st.max);
  return st;
}

RecallReport recall(const PointCloud& source, std::span<const Index> selected,
                    std::size_t threshold) {
  const auto labels = source.labels();
  RecallReport rep;
  rep.threshold = threshold;
  std::size_t foreground = 0;
  for (std::int32_t l : labels) {
    if (l >= 0) {
      ++foreground;
      rep.per_instance_counts.emplace(l, 0);
    }
  }
  std::vector<std::uint8_t> seen(source.size(), 0);
  std::size_t kept = 0;
  for (Index i : selected) {
    if (i >= source.size()) throw Error(ErrorCode::kOutOfRange, "selected index out of range");
    if (seen[i]) continue;
    seen[i] = 1;
    if (labels[i] >= 0) {
      ++kept;
      ++rep.per_instance_counts[labels[i]];
    }
  }
  if (foreground == 0) {
    rep.point_recall = 1.0;
    rep.instance_recall = 1.0;
    return rep;
  }
  std::size_t surviving = 0;
  for (const auto& [id, c] : rep.per_instance_counts) surviving += c >= threshold ? 1 : 0;
  rep.point_recall = static_cast<double>(kept) / static_cast<double>(foreground);
  rep.instance_recall = static_cast<double>(surviving) /
                        static_cast<double>(rep.per_instance_counts.size());
  return rep;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "quantile of empty set");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(values.size() - 1, lo + 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

double interquartile_range(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  return quantile(v, 0.75) - quantile(v, 0.25);
}

SamplingRateSummary avs_sampling_rate(std::span<const PointCloud> scenes, std::size_t m,
                                      std::optional<Vec3> fixed_voxel, const AvsParams& params,
                                      std::size_t bins) {
  if (scenes.empty()) throw Error(ErrorCode::kInvalidArgument, "no scenes given");
  SamplingRateSummary sum;
  const double md = static_cast<double>(m);
  Vec3 mean_voxel{0.0, 0.0, 0.0};
  for (std::size_t s = 0; s < scenes.size(); ++s) {
    const AvsResult r = avs(scenes[s], m, params);
    SamplingRateRow row;
    row.scene = s;
    row.avs_count = r.count;
    row.avs_deviation = (static_cast<double>(r.count) - md) / md;
    row.avs_converged = r.converged;
    row.avs_iterations = r.iterations;
    row.avs_voxel = r.voxel;
    for (int a = 0; a < 3; ++a) mean_voxel[a] += r.voxel[a] / static_cast<double>(scenes.size());
    sum.rows.push_back(row);
  }
  sum.fixed_voxel = fixed_voxel.value_or(mean_voxel);
  std::vector<double> fixed_dev, avs_dev;
  for (SamplingRateRow& row : sum.rows) {
    row.fixed_count = count_nonempty(scenes[row.scene], sum.fixed_voxel, params.threads);
    row.fixed_deviation = (static_cast<double>(row.fixed_count) - md) / md;
    fixed_dev.push_back(row.fixed_deviation);
    avs_dev.push_back(row.avs_deviation);
  }
  sum.fixed_iqr = interquartile_range(fixed_dev);
  sum.avs_iqr = interquartile_range(avs_dev);
  const auto [fmin, fmax] = std::minmax_element(fixed_dev.begin(), fixed_dev.end());
  sum.fixed_histogram = make_histogram(fixed_dev, bins, std::min(*fmin, -1.0), std::max(*fmax, 1.0));
  sum.avs_histogram = make_histogram(avs_dev, bins, std::min(*fmin, -1.0), std::max(*fmax, 1.0));
  return sum;
}

}  // namespace havs

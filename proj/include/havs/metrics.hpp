#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "havs/core.hpp"
#include "havs/samplers.hpp"

namespace havs {

struct Histogram {
  std::vector<double> edges;  // bins + 1 edges
  std::vector<std::size_t> counts;
};

/// Fixed-width histogram on [lo, hi]; values at hi land in the last bin.
Histogram make_histogram(std::span<const double> values, std::size_t bins, double lo, double hi);

/// Nearest-neighbour spacing inside a subset.
struct SpacingStats {
  std::vector<double> nn_dists;  // per input point, input order
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
  Histogram histogram;  // `bins` bins over [0, max]
};

SpacingStats spacing_stats(std::span<const Vec3> subset, std::size_t bins = 64);

struct RecallReport {
  double point_recall = 0.0;
  double instance_recall = 0.0;
  /// Surviving point count of every instance in the source (0 if lost).
  std::map<std::int32_t, std::size_t> per_instance_counts;
  std::size_t threshold = 1;
};

/// Foreground point recall and instance recall (instances keeping at least
/// `threshold` points). Duplicate indices are counted once. Both recalls are 1
/// when the source has no foreground.
RecallReport recall(const PointCloud& source, std::span<const Index> selected,
                    std::size_t threshold = 1);

struct SamplingRateRow {
  std::size_t scene = 0;
  std::size_t fixed_count = 0;
  double fixed_deviation = 0.0;  // (count - m) / m
  std::size_t avs_count = 0;
  double avs_deviation = 0.0;
  bool avs_converged = false;
  int avs_iterations = 0;
  Vec3 avs_voxel{0.0, 0.0, 0.0};
};

struct SamplingRateSummary {
  std::vector<SamplingRateRow> rows;
  Vec3 fixed_voxel{0.0, 0.0, 0.0};
  double fixed_iqr = 0.0;
  double avs_iqr = 0.0;
  Histogram fixed_histogram;
  Histogram avs_histogram;
};

/// Over/undersampling of one shared fixed voxel versus per-scene AVS. Without
/// `fixed_voxel` the mean of the per-scene AVS voxels is used.
SamplingRateSummary avs_sampling_rate(std::span<const PointCloud> scenes, std::size_t m,
                                      std::optional<Vec3> fixed_voxel = std::nullopt,
                                      const AvsParams& params = {}, std::size_t bins = 20);

/// Linear-interpolated quantile (q in [0, 1]) of unsorted values.
double quantile(std::vector<double> values, double q);
double interquartile_range(std::span<const double> values);

}  // namespace havs

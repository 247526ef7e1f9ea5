#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "havs/core.hpp"
#include "havs/voxelhash.hpp"

namespace havs {

// ---------------------------------------------------------------------------
// Farthest point sampling

/// Full FPS trajectory. `selection_dist[j]` is the point-to-set distance of
/// `selected[j]` at the moment it was chosen (+inf for the seed point).
struct FpsTrace {
  std::vector<Index> selected;
  std::vector<double> selection_dist;
};

/// Step-by-step FPS over a fixed point set.
class FpsState {
 public:
  FpsState(std::span<const Vec3> points, Index start);

  /// Selects the farthest remaining point and returns its index. Requires
  /// selected().size() < size().
  Index step();

  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<Index>& selected() const noexcept { return selected_; }
  /// Point-to-set distance of the most recent pick (+inf for the start).
  double last_distance() const noexcept { return last_; }
  /// Current point-to-set distance of point j; 0 once j is selected.
  double dist_to_set(std::size_t j) const noexcept;

 private:
  std::span<const Vec3> points_;
  std::vector<double> xs_, ys_, zs_;
  std::vector<double> mind_;  // squared; -1 marks selected points
  std::vector<Index> selected_;
  double last_;
};

/// Incremental FPS: O(n) distance update per iteration. Argmax ties go to the
/// lexicographically smaller point, then the smaller index.
FpsTrace fps_trace(std::span<const Vec3> points, std::size_t m,
                   FpsStart start = FpsStart::kFirstIndex, std::uint64_t seed = 0,
                   int threads = 1);

SampleOutput fps(const PointCloud& cloud, std::size_t m,
                 FpsStart start = FpsStart::kFirstIndex, std::uint64_t seed = 0,
                 int threads = 1);

// ---------------------------------------------------------------------------
// Random point sampling

/// m distinct indices drawn uniformly without replacement (partial Fisher-Yates).
SampleOutput rps(const PointCloud& cloud, std::size_t m, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Random voxel sampling

/// Fixed-grid voxel sampling. One representative per non-empty voxel; a
/// seeded random subset of voxels is kept when there are more than m, and
/// seeded random unselected points pad the result when there are fewer.
/// Average and Center synthesize points and leave `indices` empty.
SampleOutput rvs(const PointCloud& cloud, std::size_t m, const Vec3& voxel,
                 Representative representative, std::uint64_t seed, int threads = 1);

// ---------------------------------------------------------------------------
// Inverse density sampling

/// Per-point density 1 / (mean distance to the k_nn nearest neighbours).
std::vector<double> knn_density(std::span<const Vec3> points, std::size_t k_nn);

SampleOutput ids(const PointCloud& cloud, std::size_t m, std::size_t k_nn = 16,
                 IdsMode mode = IdsMode::kDeterministic, std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Adaptive voxel search

struct AvsParams {
  double sigma = 0.05;
  int t_max = 20;
  Vec3 aspect{1.0, 1.0, 1.0};
  int threads = 1;
};

struct AvsResult {
  Vec3 voxel{0.0, 0.0, 0.0};
  double scale = 0.0;  // voxel = scale * aspect
  std::size_t count = 0;
  int iterations = 0;  // bisection steps, <= t_max
  int evaluations = 0; // voxel counts performed, including bracket setup
  bool converged = false;
};

/// Upper end of the acceptance interval, ceil((1 + sigma) * m), computed so
/// that exact products such as 1.05 * 100 are not pushed up by rounding.
std::size_t avs_upper_bound(std::size_t m, double sigma);

/// Searches a voxel scale whose non-empty voxel count lands in
/// [m, ceil((1 + sigma) m)] over the points in `subset` (all points if empty).
///
/// Bracket: s_hi starts at the largest bounding-box extent (over aspect) and
/// doubles while it still yields too many voxels; s_lo starts at s_hi / 1024
/// and halves until it yields at least m. The bracket is then bisected at its
/// geometric midpoint. On timeout the s_lo end (count >= m) is returned.
/// Throws kOutOfRange when no scale yields m voxels (fewer distinct points).
AvsResult avs(std::span<const Vec3> points, std::span<const Index> subset, std::size_t m,
              const AvsParams& params);
AvsResult avs(const PointCloud& cloud, std::size_t m, const AvsParams& params = {});

// ---------------------------------------------------------------------------
// Hierarchical adaptive voxel-guided sampling

/// One HAVS layer over the points with active[i] != 0. Returns exactly m_l
/// elements tagged with `layer`. `spec.fixed_voxel` (scaled by `voxel_scale`)
/// bypasses the search.
SampleOutput havs_layer(const PointCloud& cloud, std::span<const std::uint8_t> active,
                        std::size_t m_l, const SampleSpec& spec, int layer = 1,
                        double voxel_scale = 1.0);

/// Coarse-to-fine HAVS over spec.layers layers with counts from plan_layers.
SampleOutput havs(const PointCloud& cloud, const SampleSpec& spec);

// ---------------------------------------------------------------------------

/// Validates the settings, dispatches to the method and records wall time.
SampleOutput sample(const PointCloud& cloud, const SampleSpec& spec);

}  // namespace havs

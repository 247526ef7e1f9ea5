#pragma once

// Shared voxel representative machinery for the RVS and HAVS samplers.

#include <cstdint>
#include <span>
#include <vector>

#include "havs/core.hpp"
#include "havs/random.hpp"
#include "havs/voxelhash.hpp"

namespace havs::detail {

struct VoxelSelection {
  /// Centre-closest winner of every non-empty voxel, canonical order.
  std::vector<VoxelEntry> winners;
  /// Representative point per voxel (same order as winners).
  std::vector<Vec3> reps;
  /// Source index of the representative; only for Random / CenterClosest.
  std::vector<Index> rep_index;
  bool synthesized = false;
};

VoxelSelection select_representatives(std::span<const Vec3> points,
                                      std::span<const Index> subset, const Vec3& voxel,
                                      Representative representative, std::uint64_t seed,
                                      int threads, std::size_t expected_keys = 0);

/// Lexicographic (x, y, z) order, then index.
inline bool point_less(std::span<const Vec3> points, Index a, Index b) noexcept {
  if (points[a] != points[b]) return points[a] < points[b];
  return a < b;
}

/// Draws `count` distinct points uniformly from `candidates` whose
/// used[i] == 0, in draw order, and marks them used.
std::vector<Index> pad_uniform(std::span<const Index> candidates, std::vector<std::uint8_t>& used,
                               std::size_t count, Rng& rng);

std::vector<Index> all_indices(std::size_t n);

}  // namespace havs::detail

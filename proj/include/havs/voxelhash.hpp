#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "havs/core.hpp"

namespace havs {

/// Integer voxel indices along x, y, z.
struct VoxelCoord {
  std::int64_t u = 0;
  std::int64_t v = 0;
  std::int64_t w = 0;

  friend bool operator==(const VoxelCoord&, const VoxelCoord&) = default;
};

/// Canonical order used by extraction: w, then v, then u.
constexpr bool canonical_less(const VoxelCoord& a, const VoxelCoord& b) noexcept {
  if (a.w != b.w) return a.w < b.w;
  if (a.v != b.v) return a.v < b.v;
  return a.u < b.u;
}

/// floor(x) as an integer, exact for |x| < 2^63.
inline std::int64_t floor_to_int(double x) noexcept {
  const auto t = static_cast<std::int64_t>(x);
  return t - static_cast<std::int64_t>(static_cast<double>(t) > x);
}

/// Componentwise floor(p / voxel); negative coordinates round toward -inf.
inline VoxelCoord voxel_coord(const Vec3& p, const Vec3& voxel) noexcept {
  return {floor_to_int(p[0] / voxel[0]), floor_to_int(p[1] / voxel[1]),
          floor_to_int(p[2] / voxel[2])};
}

/// Euclidean distance from p to the geometric centre voxel * (g + 0.5).
double center_distance(const Vec3& p, const VoxelCoord& g, const Vec3& voxel) noexcept;

/// Stateless 64-bit spatial hash. Mask with capacity - 1 to get a slot.
std::uint64_t voxel_hash(const VoxelCoord& g) noexcept;

/// Smallest power of two >= 2 * max_keys (and >= 2).
std::size_t table_capacity_for(std::size_t max_keys) noexcept;

struct VoxelEntry {
  VoxelCoord key;
  Index index = 0;
  double dist = 0.0;
};

/// Open-addressed table from voxel coordinates to the (point index, centre
/// distance) pair with the smallest distance seen so far.
///
/// Linear probing, full key per slot, fixed capacity. Inserts are safe to call
/// concurrently; the final contents do not depend on insertion order because
/// the merge is a strict total order: smaller distance, then lexicographically
/// smaller point (x, y, z), then smaller index. Without a bound point array the
/// coordinate step is skipped. Reads must not overlap with inserts.
class VoxelTable {
 public:
  /// `points` backs the coordinate tie-break and must outlive the table.
  explicit VoxelTable(std::size_t max_keys, std::span<const Vec3> points = {});

  VoxelTable(const VoxelTable&) = delete;
  VoxelTable& operator=(const VoxelTable&) = delete;
  VoxelTable(VoxelTable&&) noexcept = default;
  VoxelTable& operator=(VoxelTable&&) noexcept = default;

  std::size_t capacity() const noexcept { return slots_.size(); }
  std::size_t occupied() const noexcept { return occupied_; }

  /// Throws kCapacity if a new key would push the load factor above 0.5.
  void insert_min(const VoxelCoord& g, Index i, double d);

  /// Non-throwing variant for bulk builds; returns false when the table is full.
  /// `concurrent` selects atomic slot updates.
  bool try_insert_min(const VoxelCoord& g, Index i, double d, bool concurrent);

  /// Hints the cache about the home slot of `g` ahead of an insert.
  void prefetch(const VoxelCoord& g) const noexcept {
    __builtin_prefetch(&slots_[voxel_hash(g) & (slots_.size() - 1)], 1);
  }

  /// Slot holding `g`, or capacity() if absent.
  std::size_t find_slot(const VoxelCoord& g) const noexcept;
  VoxelEntry entry_at(std::size_t slot) const noexcept;

  /// Occupied entries in canonical VoxelCoord order.
  std::vector<VoxelEntry> extract() const;
  /// Occupied slot numbers, ordered like extract().
  std::vector<std::size_t> occupied_slots() const;

  void clear() noexcept;

 private:
  struct Slot {
    std::uint32_t state;  // 0 empty, 1 claimed, 2 key published
    std::uint32_t lock;
    VoxelCoord key;
    Index index;
    double dist;
  };

  bool better(Index i, double di, Index j, double dj) const noexcept;

  std::vector<Slot> slots_;
  std::span<const Vec3> points_;
  std::size_t occupied_ = 0;
};

/// Voxelizes `points` (restricted to `subset` when non-empty) at `voxel` and
/// keeps the centre-closest point of every non-empty voxel. A non-zero
/// `expected_keys` sizes the table for that many voxels (e.g. a count taken at
/// the same voxel size); if it proves too small the build restarts at full size.
VoxelTable build_center_closest(std::span<const Vec3> points, std::span<const Index> subset,
                                const Vec3& voxel, int threads, std::size_t expected_keys = 0);

/// Reusable non-empty voxel counter. Holds scratch storage sized for up to
/// `max_points` points so repeated counts in a search do not allocate.
class VoxelCounter {
 public:
  explicit VoxelCounter(std::size_t max_points);

  static constexpr std::size_t kNoLimit = static_cast<std::size_t>(-1);

  /// Number of distinct voxel_coord values over the selected points.
  /// `box` must bound those points. With a `limit`, counting stops as soon as
  /// the total exceeds it and the result is then some value > limit.
  std::size_t count(std::span<const Vec3> points, std::span<const Index> subset,
                    const Vec3& voxel, const Box& box, int threads,
                    std::size_t limit = kNoLimit);

 private:
  std::size_t count_table(std::span<const Vec3> points, std::span<const Index> subset,
                          const Vec3& voxel, std::size_t limit);

  std::vector<std::uint64_t> keys_;
  std::size_t max_points_;
};

std::size_t count_nonempty(std::span<const Vec3> points, const Vec3& voxel, int threads = 1);
std::size_t count_nonempty(const PointCloud& cloud, const Vec3& voxel, int threads = 1);

}  // namespace havs

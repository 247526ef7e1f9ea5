#include "havs/voxelhash.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>

namespace havs {
namespace {

constexpr std::uint64_t fmix64(std::uint64_t k) noexcept {
  k ^= k >> 33;
  k *= 0xFF51AFD7ED558CCDull;
  k ^= k >> 33;
  k *= 0xC4CEB9FE1A85EC53ull;
  k ^= k >> 33;
  return k;
}

inline void cpu_relax() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_ia32_pause();
#endif
}

constexpr int kPackBits = 21;
constexpr std::int64_t kPackRange = (std::int64_t{1} << kPackBits) - 1;

}  // namespace

double center_distance(const Vec3& p, const VoxelCoord& g, const Vec3& voxel) noexcept {
  const double dx = p[0] - voxel[0] * (static_cast<double>(g.u) + 0.5);
  const double dy = p[1] - voxel[1] * (static_cast<double>(g.v) + 0.5);
  const double dz = p[2] - voxel[2] * (static_cast<double>(g.w) + 0.5);
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

std::uint64_t voxel_hash(const VoxelCoord& g) noexcept {
  const std::uint64_t h = static_cast<std::uint64_t>(g.u) * 0x9E3779B97F4A7C15ull ^
                          static_cast<std::uint64_t>(g.v) * 0xC2B2AE3D27D4EB4Full ^
                          static_cast<std::uint64_t>(g.w) * 0x165667B19E3779F9ull ^
                          0x27D4EB2F165667C5ull;
  return fmix64(h);
}

std::size_t table_capacity_for(std::size_t max_keys) noexcept {
  return std::bit_ceil(std::max<std::size_t>(2 * max_keys, 2));
}

// ---------------------------------------------------------------------------
// VoxelTable

VoxelTable::VoxelTable(std::size_t max_keys, std::span<const Vec3> points)
    : slots_(table_capacity_for(max_keys)), points_(points) {}

void VoxelTable::clear() noexcept {
  std::fill(slots_.begin(), slots_.end(), Slot{0, 0, {}, 0, 0.0});
  occupied_ = 0;
}

bool VoxelTable::better(Index i, double di, Index j, double dj) const noexcept {
  if (di != dj) return di < dj;
  if (!points_.empty() && points_[i] != points_[j]) return points_[i] < points_[j];
  return i < j;
}

void VoxelTable::insert_min(const VoxelCoord& g, Index i, double d) {
  if (!points_.empty() && i >= points_.size()) {
    throw Error(ErrorCode::kOutOfRange, "point index outside the bound cloud");
  }
  if (!try_insert_min(g, i, d, false)) {
    throw Error(ErrorCode::kCapacity, "voxel table full (capacity " +
                                          std::to_string(capacity()) + ")");
  }
}

bool VoxelTable::try_insert_min(const VoxelCoord& g, Index i, double d, bool concurrent) {
  const std::size_t cap = slots_.size();
  const std::size_t mask = cap - 1;
  const std::size_t max_occupied = cap / 2;
  std::size_t s = voxel_hash(g) & mask;

  if (!concurrent) {
    for (std::size_t probe = 0; probe < cap; ++probe, s = (s + 1) & mask) {
      Slot& slot = slots_[s];
      if (slot.state == 0) {
        if (occupied_ + 1 > max_occupied) return false;
        slot = Slot{2, 0, g, i, d};
        ++occupied_;
        return true;
      }
      if (slot.key == g) {
        if (better(i, d, slot.index, slot.dist)) {
          slot.index = i;
          slot.dist = d;
        }
        return true;
      }
    }
    return false;
  }

  for (std::size_t probe = 0; probe < cap;) {
    Slot& slot = slots_[s];
    std::atomic_ref<std::uint32_t> state(slot.state);
    std::uint32_t cur = state.load(std::memory_order_acquire);
    if (cur == 0) {
      if (state.compare_exchange_strong(cur, 1, std::memory_order_acq_rel)) {
        std::atomic_ref<std::size_t> occ(occupied_);
        if (occ.fetch_add(1, std::memory_order_relaxed) + 1 > max_occupied) {
          occ.fetch_sub(1, std::memory_order_relaxed);
          state.store(0, std::memory_order_release);
          return false;
        }
        slot.key = g;
        slot.index = i;
        slot.dist = d;
        state.store(2, std::memory_order_release);
        return true;
      }
    }
    while (cur == 1) {
      cpu_relax();
      cur = state.load(std::memory_order_acquire);
    }
    if (cur == 0) continue;  // claim was rolled back; retry this slot
    if (slot.key == g) {
      std::atomic_ref<std::uint32_t> lock(slot.lock);
      while (lock.exchange(1, std::memory_order_acquire) != 0) cpu_relax();
      if (better(i, d, slot.index, slot.dist)) {
        slot.index = i;
        slot.dist = d;
      }
      lock.store(0, std::memory_order_release);
      return true;
    }
    ++probe;
    s = (s + 1) & mask;
  }
  return false;
}

std::size_t VoxelTable::find_slot(const VoxelCoord& g) const noexcept {
  const std::size_t cap = slots_.size();
  const std::size_t mask = cap - 1;
  std::size_t s = voxel_hash(g) & mask;
  for (std::size_t probe = 0; probe < cap; ++probe, s = (s + 1) & mask) {
    const Slot& slot = slots_[s];
    if (slot.state == 0) return cap;
    if (slot.key == g) return s;
  }
  return cap;
}

VoxelEntry VoxelTable::entry_at(std::size_t slot) const noexcept {
  const Slot& s = slots_[slot];
  return {s.key, s.index, s.dist};
}

std::vector<std::size_t> VoxelTable::occupied_slots() const {
  std::vector<std::size_t> out;
  out.reserve(occupied_);
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    if (slots_[s].state != 0) out.push_back(s);
  }
  std::sort(out.begin(), out.end(), [this](std::size_t a, std::size_t b) {
    return canonical_less(slots_[a].key, slots_[b].key);
  });
  return out;
}

std::vector<VoxelEntry> VoxelTable::extract() const {
  std::vector<VoxelEntry> out;
  out.reserve(occupied_);
  for (std::size_t s = 0; s < slots_.size(); ++s) {
    if (slots_[s].state != 0) out.push_back(entry_at(s));
  }
  std::sort(out.begin(), out.end(), [](const VoxelEntry& a, const VoxelEntry& b) {
    return canonical_less(a.key, b.key);
  });
  return out;
}

VoxelTable build_center_closest(std::span<const Vec3> points, std::span<const Index> subset,
                                const Vec3& voxel, int threads, std::size_t expected_keys) {
  const bool all = subset.empty();
  const std::size_t n = all ? points.size() : subset.size();
  const bool sized = expected_keys > 0 && expected_keys < n;
  VoxelTable table(sized ? expected_keys : n, points);
  bool full = false;
  auto insert = [&](std::size_t k, bool concurrent) {
    const Index i = all ? static_cast<Index>(k) : subset[k];
    const Vec3& p = points[i];
    const VoxelCoord g = voxel_coord(p, voxel);
    return table.try_insert_min(g, i, center_distance(p, g, voxel), concurrent);
  };
  if (threads <= 1) {
    constexpr std::size_t kBatch = 16;
    VoxelCoord g[kBatch];
    for (std::size_t k0 = 0; k0 < n && !full; k0 += kBatch) {
      const std::size_t len = std::min(kBatch, n - k0);
      for (std::size_t b = 0; b < len; ++b) {
        g[b] = voxel_coord(points[all ? static_cast<Index>(k0 + b) : subset[k0 + b]], voxel);
        table.prefetch(g[b]);
      }
      for (std::size_t b = 0; b < len && !full; ++b) {
        const Index i = all ? static_cast<Index>(k0 + b) : subset[k0 + b];
        full = !table.try_insert_min(g[b], i, center_distance(points[i], g[b], voxel), false);
      }
    }
  } else {
    const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for num_threads(threads) schedule(static) reduction(|| : full)
    for (std::int64_t k = 0; k < count; ++k) {
      full = full || !insert(static_cast<std::size_t>(k), true);
    }
  }
  if (full && sized) return build_center_closest(points, subset, voxel, threads, 0);
  if (full) throw Error(ErrorCode::kCapacity, "voxel table full during build");
  return table;
}

// ---------------------------------------------------------------------------
// VoxelCounter

VoxelCounter::VoxelCounter(std::size_t max_points) : max_points_(max_points) {}

std::size_t VoxelCounter::count_table(std::span<const Vec3> points, std::span<const Index> subset,
                                      const Vec3& voxel, std::size_t limit) {
  const bool all = subset.empty();
  const std::size_t n = all ? points.size() : subset.size();
  VoxelTable table(std::min(n, limit == kNoLimit ? n : limit + 1));
  for (std::size_t k = 0; k < n; ++k) {
    const Index i = all ? static_cast<Index>(k) : subset[k];
    if (!table.try_insert_min(voxel_coord(points[i], voxel), i, 0.0, false)) {
      throw Error(ErrorCode::kCapacity, "voxel table full during count");
    }
    if (table.occupied() > limit) break;
  }
  return table.occupied();
}

std::size_t VoxelCounter::count(std::span<const Vec3> points, std::span<const Index> subset,
                                const Vec3& voxel, const Box& box, int threads,
                                std::size_t limit) {
  const bool all = subset.empty();
  const std::size_t n = all ? points.size() : subset.size();
  if (n == 0) return 0;
  if (n > max_points_) throw Error(ErrorCode::kCapacity, "voxel counter sized too small");

  const VoxelCoord lo = voxel_coord(box.min, voxel);
  const VoxelCoord hi = voxel_coord(box.max, voxel);
  const bool packable = hi.u - lo.u < kPackRange && hi.v - lo.v < kPackRange &&
                        hi.w - lo.w < kPackRange;
  // Wide coordinate range: fall back to the full-key table.
  if (!packable) return count_table(points, subset, voxel, limit);

  threads = std::max(1, threads);
  const std::size_t max_keys = limit < n ? limit + 1 : n;
  // Concurrent workers may each land one key past the limit before stopping.
  const std::size_t cap =
      table_capacity_for(max_keys + (threads > 1 ? static_cast<std::size_t>(threads) : 0));
  const std::size_t mask = cap - 1;
  if (keys_.size() < cap) keys_.resize(cap);
  std::fill_n(keys_.begin(), cap, std::uint64_t{0});
  std::uint64_t* keys = keys_.data();

  auto pack = [&](std::size_t k) {
    const Index i = all ? static_cast<Index>(k) : subset[k];
    const VoxelCoord g = voxel_coord(points[i], voxel);
    return (static_cast<std::uint64_t>(g.u - lo.u) |
            static_cast<std::uint64_t>(g.v - lo.v) << kPackBits |
            static_cast<std::uint64_t>(g.w - lo.w) << (2 * kPackBits)) +
           1;
  };

  if (threads == 1) {
    // Hash a batch ahead and prefetch its slots before probing.
    constexpr std::size_t kBatch = 32;
    std::uint64_t batch_key[kBatch];
    std::size_t batch_slot[kBatch];
    std::size_t found = 0;
    for (std::size_t k0 = 0; k0 < n && found <= limit; k0 += kBatch) {
      const std::size_t len = std::min(kBatch, n - k0);
      for (std::size_t b = 0; b < len; ++b) {
        batch_key[b] = pack(k0 + b);
        batch_slot[b] = fmix64(batch_key[b]) & mask;
        __builtin_prefetch(keys + batch_slot[b], 1);
      }
      for (std::size_t b = 0; b < len; ++b) {
        const std::uint64_t key = batch_key[b];
        std::size_t s = batch_slot[b];
        while (true) {
          const std::uint64_t cur = keys[s];
          if (cur == key) break;
          if (cur == 0) {
            keys[s] = key;
            ++found;
            break;
          }
          s = (s + 1) & mask;
        }
        if (found > limit) return found;
      }
    }
    return found;
  }

  std::size_t found = 0;
  bool stop = false;
  const auto count = static_cast<std::int64_t>(n);
#pragma omp parallel for num_threads(threads) schedule(static)
  for (std::int64_t k = 0; k < count; ++k) {
    if (std::atomic_ref<bool>(stop).load(std::memory_order_relaxed)) continue;
    const std::uint64_t key = pack(static_cast<std::size_t>(k));
    std::size_t s = fmix64(key) & mask;
    while (true) {
      std::atomic_ref<std::uint64_t> slot(keys[s]);
      std::uint64_t cur = slot.load(std::memory_order_relaxed);
      if (cur == 0 && slot.compare_exchange_strong(cur, key, std::memory_order_relaxed)) {
        if (std::atomic_ref<std::size_t>(found).fetch_add(1, std::memory_order_relaxed) + 1 > limit) {
          std::atomic_ref<bool>(stop).store(true, std::memory_order_relaxed);
        }
        break;
      }
      if (cur == key) break;
      s = (s + 1) & mask;
    }
  }
  return found;
}

std::size_t count_nonempty(std::span<const Vec3> points, const Vec3& voxel, int threads) {
  if (points.empty()) return 0;
  VoxelCounter counter(points.size());
  return counter.count(points, {}, voxel, bounding_box(points), threads);
}

std::size_t count_nonempty(const PointCloud& cloud, const Vec3& voxel, int threads) {
  return count_nonempty(cloud.points(), voxel, threads);
}

}  // namespace havs

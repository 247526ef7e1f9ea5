#include "selection.hpp"

#include <limits>
#include <numeric>

namespace havs::detail {

VoxelSelection select_representatives(std::span<const Vec3> points,
                                      std::span<const Index> subset, const Vec3& voxel,
                                      Representative representative, std::uint64_t seed,
                                      int threads, std::size_t expected_keys) {
  const VoxelTable table = build_center_closest(points, subset, voxel, threads, expected_keys);
  const std::vector<std::size_t> slots = table.occupied_slots();
  const std::size_t k = slots.size();

  VoxelSelection sel;
  sel.winners.reserve(k);
  for (std::size_t s : slots) sel.winners.push_back(table.entry_at(s));
  sel.synthesized = representative == Representative::kAverage ||
                    representative == Representative::kCenter;

  switch (representative) {
    case Representative::kCenterClosest:
      sel.rep_index.reserve(k);
      sel.reps.reserve(k);
      for (const VoxelEntry& e : sel.winners) {
        sel.rep_index.push_back(e.index);
        sel.reps.push_back(points[e.index]);
      }
      return sel;
    case Representative::kCenter:
      sel.reps.reserve(k);
      for (const VoxelEntry& e : sel.winners) {
        sel.reps.push_back({voxel[0] * (static_cast<double>(e.key.u) + 0.5),
                            voxel[1] * (static_cast<double>(e.key.v) + 0.5),
                            voxel[2] * (static_cast<double>(e.key.w) + 0.5)});
      }
      return sel;
    case Representative::kAverage:
    case Representative::kRandom:
      break;
  }

  // Average and Random need every member: map each point back to its voxel.
  std::vector<std::uint32_t> pos_of_slot(table.capacity(), 0);
  for (std::size_t j = 0; j < k; ++j) pos_of_slot[slots[j]] = static_cast<std::uint32_t>(j);
  const bool all = subset.empty();
  const std::size_t n = all ? points.size() : subset.size();

  if (representative == Representative::kAverage) {
    std::vector<Vec3> sum(k, Vec3{0.0, 0.0, 0.0});
    std::vector<std::size_t> members(k, 0);
    for (std::size_t t = 0; t < n; ++t) {
      const Index i = all ? static_cast<Index>(t) : subset[t];
      const std::uint32_t pos = pos_of_slot[table.find_slot(voxel_coord(points[i], voxel))];
      for (int a = 0; a < 3; ++a) sum[pos][a] += points[i][a];
      ++members[pos];
    }
    sel.reps.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      const auto c = static_cast<double>(members[j]);
      sel.reps[j] = {sum[j][0] / c, sum[j][1] / c, sum[j][2] / c};
    }
    return sel;
  }

  // Random: the member with the smallest seeded per-point key.
  std::vector<std::uint64_t> best_key(k, std::numeric_limits<std::uint64_t>::max());
  sel.rep_index.assign(k, 0);
  const std::uint64_t salt = mix64(seed ^ 0x52414E444F4D5245ull);
  for (std::size_t t = 0; t < n; ++t) {
    const Index i = all ? static_cast<Index>(t) : subset[t];
    const std::uint32_t pos = pos_of_slot[table.find_slot(voxel_coord(points[i], voxel))];
    const std::uint64_t key = mix64(salt ^ (static_cast<std::uint64_t>(i) + 1));
    if (key < best_key[pos] || (key == best_key[pos] && i < sel.rep_index[pos])) {
      best_key[pos] = key;
      sel.rep_index[pos] = i;
    }
  }
  sel.reps.reserve(k);
  for (Index i : sel.rep_index) sel.reps.push_back(points[i]);
  return sel;
}

std::vector<Index> pad_uniform(std::span<const Index> candidates, std::vector<std::uint8_t>& used,
                               std::size_t count, Rng& rng) {
  std::vector<Index> pool;
  pool.reserve(candidates.size());
  for (Index i : candidates) {
    if (!used[i]) pool.push_back(i);
  }
  if (pool.size() < count) {
    throw Error(ErrorCode::kOutOfRange, "not enough unselected points to pad the sample");
  }
  std::vector<Index> out;
  out.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    const std::size_t r = j + static_cast<std::size_t>(rng.below(pool.size() - j));
    std::swap(pool[j], pool[r]);
    out.push_back(pool[j]);
    used[pool[j]] = 1;
  }
  return out;
}

std::vector<Index> all_indices(std::size_t n) {
  std::vector<Index> idx(n);
  std::iota(idx.begin(), idx.end(), Index{0});
  return idx;
}

}  // namespace havs::detail

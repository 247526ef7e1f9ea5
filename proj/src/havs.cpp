#include <algorithm>
#include <chrono>
#include <cmath>

#include "havs/random.hpp"
#include "havs/samplers.hpp"
#include "selection.hpp"

namespace havs {
namespace {

struct LayerResult {
  SampleOutput output;
  std::vector<Index> consumed;  // points masked out of later layers
};

LayerResult run_layer(const PointCloud& cloud, std::span<const Index> active, std::size_t m_l,
                      const SampleSpec& spec, int layer, double voxel_scale, int threads) {
  const auto points = cloud.points();
  if (active.size() < m_l || m_l == 0) {
    throw Error(ErrorCode::kOutOfRange, "layer " + std::to_string(layer) + " needs " +
                                            std::to_string(m_l) + " of " +
                                            std::to_string(active.size()) + " active points");
  }

  LayerLog log;
  log.layer = layer;
  log.target = m_l;
  Vec3 voxel;
  std::size_t expected = 0;
  if (spec.fixed_voxel) {
    voxel = {(*spec.fixed_voxel)[0] * voxel_scale, (*spec.fixed_voxel)[1] * voxel_scale,
             (*spec.fixed_voxel)[2] * voxel_scale};
    log.adaptive = false;
  } else {
    const AvsResult r = avs(points, active, m_l, {spec.sigma, spec.t_max, spec.aspect, threads});
    voxel = r.voxel;
    log.iterations = r.iterations;
    log.converged = r.converged;
    expected = r.count;
  }
  log.voxel = voxel;

  const std::uint64_t layer_seed = mix64(spec.seed ^ (0x4C41594552ull + static_cast<std::uint64_t>(layer)));
  const detail::VoxelSelection sel =
      detail::select_representatives(points, active, voxel, spec.representative, layer_seed, threads,
                                     expected);
  const std::size_t k = sel.winners.size();
  log.nonempty = k;
  if (spec.fixed_voxel) log.converged = k >= m_l && k <= avs_upper_bound(m_l, spec.sigma);

  std::vector<std::size_t> keep(k);
  for (std::size_t j = 0; j < k; ++j) keep[j] = j;
  if (k > m_l) {
    // Drop the winners farthest from their voxel centre.
    std::nth_element(keep.begin(), keep.begin() + static_cast<std::ptrdiff_t>(m_l), keep.end(),
                     [&](std::size_t a, std::size_t b) {
                       const VoxelEntry& ea = sel.winners[a];
                       const VoxelEntry& eb = sel.winners[b];
                       if (ea.dist != eb.dist) return ea.dist < eb.dist;
                       return detail::point_less(points, ea.index, eb.index);
                     });
    keep.resize(m_l);
    std::sort(keep.begin(), keep.end());
    log.adjustment = Adjustment::kTruncated;
  }

  LayerResult res;
  SampleOutput& out = res.output;
  out.method = "havs";
  out.points.reserve(m_l);
  res.consumed.reserve(m_l);
  for (std::size_t pos : keep) {
    out.points.push_back(sel.reps[pos]);
    if (!sel.synthesized) out.indices.push_back(sel.rep_index[pos]);
    res.consumed.push_back(sel.synthesized ? sel.winners[pos].index : sel.rep_index[pos]);
  }
  if (k < m_l) {
    std::vector<std::uint8_t> used(cloud.size(), 0);
    for (Index i : res.consumed) used[i] = 1;
    Rng rng(layer_seed, 0x504144);
    for (Index i : detail::pad_uniform(active, used, m_l - k, rng)) {
      out.points.push_back(points[i]);
      if (!sel.synthesized) out.indices.push_back(i);
      res.consumed.push_back(i);
    }
    log.adjustment = Adjustment::kPadded;
  }
  out.layer_of.assign(m_l, layer);
  out.avs_log.push_back(log);
  return res;
}

std::vector<Index> active_list(std::span<const std::uint8_t> mask) {
  std::vector<Index> idx;
  idx.reserve(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) idx.push_back(static_cast<Index>(i));
  }
  return idx;
}

}  // namespace

SampleOutput havs_layer(const PointCloud& cloud, std::span<const std::uint8_t> active,
                        std::size_t m_l, const SampleSpec& spec, int layer, double voxel_scale) {
  if (active.size() != cloud.size()) {
    throw Error(ErrorCode::kInvalidArgument, "active mask length does not match point count");
  }
  const std::vector<Index> list = active_list(active);
  return run_layer(cloud, list, m_l, spec, layer, voxel_scale, resolve_threads(spec.threads))
      .output;
}

SampleOutput havs(const PointCloud& cloud, const SampleSpec& spec) {
  const std::size_t n = cloud.size();
  if (spec.m == 0 || spec.m > n) {
    throw Error(ErrorCode::kOutOfRange, "havs sample count " + std::to_string(spec.m) +
                                            " outside [1, " + std::to_string(n) + "]");
  }
  const LayerPlan plan = plan_layers(spec.m, spec.layers);
  const int threads = resolve_threads(spec.threads);
  const bool synthesized = spec.representative == Representative::kAverage ||
                           spec.representative == Representative::kCenter;

  std::vector<std::uint8_t> mask(n, 1);
  SampleOutput out;
  out.method = "havs";
  out.points.reserve(spec.m);
  out.layer_of.reserve(spec.m);
  if (!synthesized) out.indices.reserve(spec.m);
  for (int l = 1; l <= spec.layers; ++l) {
    const std::vector<Index> active = l == 1 ? detail::all_indices(n) : active_list(mask);
    // Fixed voxels coarsen by 2 per layer above the finest one.
    const double scale = std::ldexp(1.0, spec.layers - l);
    LayerResult layer =
        run_layer(cloud, active, plan.counts[static_cast<std::size_t>(l - 1)], spec, l, scale, threads);
    for (Index i : layer.consumed) mask[i] = 0;
    out.points.insert(out.points.end(), layer.output.points.begin(), layer.output.points.end());
    out.indices.insert(out.indices.end(), layer.output.indices.begin(), layer.output.indices.end());
    out.layer_of.insert(out.layer_of.end(), layer.output.layer_of.begin(),
                        layer.output.layer_of.end());
    out.avs_log.push_back(layer.output.avs_log.front());
  }
  return out;
}

SampleOutput sample(const PointCloud& cloud, const SampleSpec& spec) {
  spec.validate(cloud.size());
  const int threads = resolve_threads(spec.threads);
  const auto t0 = std::chrono::steady_clock::now();
  SampleOutput out;
  switch (spec.method) {
    case Method::kFps:
      out = fps(cloud, spec.m, spec.fps_start, spec.seed, threads);
      break;
    case Method::kRps:
      out = rps(cloud, spec.m, spec.seed);
      break;
    case Method::kRvs:
      out = rvs(cloud, spec.m, *spec.fixed_voxel, spec.representative, spec.seed, threads);
      break;
    case Method::kIds:
      out = ids(cloud, spec.m, static_cast<std::size_t>(spec.ids_knn), spec.ids_mode, spec.seed);
      break;
    case Method::kHavs:
      out = havs(cloud, spec);
      break;
  }
  const auto t1 = std::chrono::steady_clock::now();
  out.timing_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return out;
}

}  // namespace havs

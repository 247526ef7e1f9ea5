#include <algorithm>
#include <chrono>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "cli.hpp"
#include "havs/samplers.hpp"

namespace havs::cli {

PointCloud bench_scene(std::size_t n, std::uint64_t seed, double radius) {
  SceneConfig c;
  c.seed = seed;
  c.extent = {radius, radius, 3.0};
  c.min_range = std::min(2.0, radius / 5.0);
  c.n_instances = std::min<std::size_t>(24, n / 64);
  c.instance_points = 400.0 * static_cast<double>(n) / 16384.0;
  // Small radii crowd instances close to the sensor; cap them at half of n.
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::size_t inst = 0;
    for (std::size_t k : instance_point_counts(c)) inst += k;
    if (2 * inst <= n) break;
    c.instance_points *= 0.9 * static_cast<double>(n) / static_cast<double>(2 * inst);
  }
  return generate_scene_with_total(c, n);
}

SampleSpec spec_for_scene(Method method, std::size_t m, const PointCloud& scene,
                          std::uint64_t seed, int threads) {
  SampleSpec spec;
  spec.method = method;
  spec.m = m;
  spec.seed = seed;
  spec.threads = threads;
  if (method == Method::kRvs) {
    AvsParams p;
    p.threads = resolve_threads(threads);
    spec.fixed_voxel = avs(scene, m, p).voxel;
  }
  return spec;
}

std::vector<BenchRecord> run_bench(const BenchConfig& config) {
  if (config.trials < 1) throw Error(ErrorCode::kInvalidArgument, "trials must be >= 1");
  if (!(config.ratio > 0.0) || config.ratio > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "ratio must lie in (0, 1]");
  }
  const int threads = resolve_threads(config.threads);
  std::vector<BenchRecord> records;
  for (std::size_t n : config.sizes) {
    const PointCloud scene = bench_scene(n, config.seed + n);
    const auto m = std::max<std::size_t>(
        1, static_cast<std::size_t>(static_cast<double>(n) * config.ratio));
    for (Method method : config.methods) {
      BenchRecord rec;
      rec.method = to_string(method);
      rec.n = n;
      rec.m = m;
      rec.threads = threads;
      if (method == Method::kFps && n > config.fps_max_n) {
        rec.skipped = true;
        records.push_back(rec);
        continue;
      }
      const SampleSpec spec = spec_for_scene(method, m, scene, config.seed, threads);
      (void)sample(scene, spec);  // warmup
      std::vector<double> ms;
      for (int t = 0; t < config.trials; ++t) {
        const auto t0 = std::chrono::steady_clock::now();
        const SampleOutput out = sample(scene, spec);
        const auto t1 = std::chrono::steady_clock::now();
        ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
        if (out.points.size() != m) throw Error(ErrorCode::kInvalidArgument, "sampler size mismatch");
      }
      std::sort(ms.begin(), ms.end());
      rec.trials = config.trials;
      rec.min_ms = ms.front();
      rec.median_ms = ms.size() % 2 ? ms[ms.size() / 2]
                                    : 0.5 * (ms[ms.size() / 2 - 1] + ms[ms.size() / 2]);
      rec.mean_ms = std::accumulate(ms.begin(), ms.end(), 0.0) / static_cast<double>(ms.size());
      records.push_back(rec);
    }
  }
  std::stable_sort(records.begin(), records.end(), [](const BenchRecord& a, const BenchRecord& b) {
    if (a.method != b.method) return a.method < b.method;
    return a.n < b.n;
  });
  return records;
}

void write_bench_csv(std::ostream& os, const std::vector<BenchRecord>& records) {
  os << kBenchHeader << '\n';
  char buf[64];
  for (const BenchRecord& r : records) {
    os << r.method << ',' << r.n << ',' << r.m << ',' << r.trials << ',' << r.threads << ',';
    if (r.skipped) {
      os << "skipped,skipped,skipped\n";
      continue;
    }
    std::snprintf(buf, sizeof buf, "%.4f,%.4f,%.4f", r.min_ms, r.median_ms, r.mean_ms);
    os << buf << '\n';
  }
}

}  // namespace havs::cli

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "havs/core.hpp"
#include "havs/io.hpp"

namespace havs::cli {

enum ExitCode : int { kOk = 0, kIoError = 1, kUsageError = 2 };

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// "2^14", "16384" or "16k"-style sizes.
std::size_t parse_size(const std::string& token);
std::vector<std::size_t> parse_size_list(const std::string& list);
std::vector<Method> parse_method_list(const std::string& list);
Vec3 parse_vec3(const std::string& text);

/// Seeded LiDAR-like benchmark scene with exactly n points.
PointCloud bench_scene(std::size_t n, std::uint64_t seed, double radius = 50.0);

/// Fills in the per-scene details a method needs beyond the library defaults
/// (RVS gets the adaptive voxel for `m`, found outside any timed region).
SampleSpec spec_for_scene(Method method, std::size_t m, const PointCloud& scene,
                          std::uint64_t seed, int threads);

// ---------------------------------------------------------------------------
// bench

struct BenchConfig {
  std::vector<std::size_t> sizes{std::size_t{1} << 14, std::size_t{1} << 16, std::size_t{1} << 18};
  std::vector<Method> methods{Method::kFps, Method::kRps, Method::kRvs, Method::kHavs};
  double ratio = 0.25;
  int trials = 5;
  int threads = 0;
  std::size_t fps_max_n = std::size_t{1} << 17;
  std::uint64_t seed = 0;
};

struct BenchRecord {
  std::string method;
  std::size_t n = 0;
  std::size_t m = 0;
  int trials = 0;
  int threads = 0;
  double min_ms = 0.0;
  double median_ms = 0.0;
  double mean_ms = 0.0;
  bool skipped = false;
};

/// Times every method on one seeded scene per size, excluding one warmup
/// call. Records are sorted by method, then size.
std::vector<BenchRecord> run_bench(const BenchConfig& config);
void write_bench_csv(std::ostream& os, const std::vector<BenchRecord>& records);

inline constexpr const char* kBenchHeader = "method,n,m,trials,threads,min_ms,median_ms,mean_ms";

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeConfig {
  std::vector<Method> methods{Method::kFps, Method::kRps, Method::kRvs, Method::kHavs};
  std::size_t scenes = 20;
  std::size_t n = std::size_t{1} << 14;
  double ratio = 0.25;
  std::uint64_t seed = 0;
  std::size_t bins = 64;
  std::size_t threshold = 1;
  double extent_min = 5.0;
  double extent_max = 50.0;
  int threads = 0;
  std::optional<Vec3> fixed_voxel;
};

/// Each report writes a plot-ready CSV to `csv` and returns the JSON summary.
std::string analyze_spacing(const AnalyzeConfig& config, std::ostream& csv);
std::string analyze_recall(const AnalyzeConfig& config, std::ostream& csv);
std::string analyze_avsrate(const AnalyzeConfig& config, std::ostream& csv);

inline constexpr const char* kRecallHeader = "method,seed,point_recall,instance_recall";

/// Scene used by the avsrate report: extents spread geometrically over
/// [extent_min, extent_max].
PointCloud avsrate_scene(const AnalyzeConfig& config, std::size_t index, double* extent = nullptr);

}  // namespace havs::cli

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace havs {

using Vec3 = std::array<double, 3>;
/// Source point index. Clouds are limited to 2^32 - 1 points.
using Index = std::uint32_t;

enum class ErrorCode {
  kInvalidArgument,
  kOutOfRange,
  kIo,
  kParse,
  kCapacity,
};

/// Single exception type raised by every operation in the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Malformed input file. `line` and `column` are 1-based; for binary inputs
/// `line` is the record number and `column` the byte offset.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(ErrorCode::kParse, what), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// A flat array of 3D points with optional per-point intensity and instance
/// label (-1 background, >= 0 foreground instance id).
///
/// Coordinates are validated on construction; every sampler assumes finite
/// input afterwards.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(std::vector<Vec3> points,
                      std::optional<std::vector<float>> intensity = std::nullopt,
                      std::optional<std::vector<std::int32_t>> labels = std::nullopt);

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }

  std::span<const Vec3> points() const noexcept { return points_; }
  const Vec3& operator[](std::size_t i) const noexcept { return points_[i]; }

  bool has_intensity() const noexcept { return intensity_.has_value(); }
  bool has_labels() const noexcept { return labels_.has_value(); }
  std::span<const float> intensity() const;
  std::span<const std::int32_t> labels() const;

  /// New cloud holding the points at `order` (with their attributes).
  PointCloud gather(std::span<const Index> order) const;

 private:
  std::vector<Vec3> points_;
  std::optional<std::vector<float>> intensity_;
  std::optional<std::vector<std::int32_t>> labels_;
};

enum class Method { kFps, kRps, kRvs, kIds, kHavs };
enum class Representative { kAverage, kCenter, kRandom, kCenterClosest };
enum class FpsStart { kFirstIndex, kRandom };
enum class IdsMode { kDeterministic, kProbabilistic };

std::string to_string(Method m);
std::string to_string(Representative r);
Method parse_method(const std::string& s);
Representative parse_representative(const std::string& s);

/// Everything a sampler call needs. Defaults follow the reference HAVS
/// configuration: two layers, sigma 0.05, 20 search iterations.
struct SampleSpec {
  std::size_t m = 0;
  Method method = Method::kHavs;
  Representative representative = Representative::kCenterClosest;
  int layers = 2;
  double sigma = 0.05;
  int t_max = 20;
  Vec3 aspect{1.0, 1.0, 1.0};
  std::uint64_t seed = 0;
  std::optional<Vec3> fixed_voxel;
  FpsStart fps_start = FpsStart::kFirstIndex;
  int ids_knn = 16;
  IdsMode ids_mode = IdsMode::kDeterministic;
  /// Worker threads; 0 picks the process default (see default_threads()).
  int threads = 0;

  /// Throws kInvalidArgument / kOutOfRange if these settings cannot run on `n` points.
  void validate(std::size_t n) const;
};

struct LayerPlan {
  std::vector<std::size_t> counts;
};

/// Splits `m` over `k` layers in ratio 4 (coarse to fine). Each layer gets
/// floor(m * 4^(l-1) / sum_j 4^(j-1)), at least one point, and the finest layer
/// absorbs the remainder so the counts sum to m exactly.
LayerPlan plan_layers(std::size_t m, int k);

struct Box {
  Vec3 min;
  Vec3 max;
};

Box bounding_box(std::span<const Vec3> points);
Box bounding_box(const PointCloud& cloud);

enum class Adjustment { kNone, kTruncated, kPadded };
std::string to_string(Adjustment a);

/// Per-layer record of the voxel size actually used.
struct LayerLog {
  int layer = 1;
  std::size_t target = 0;
  Vec3 voxel{0.0, 0.0, 0.0};
  int iterations = 0;
  std::size_t nonempty = 0;
  bool converged = false;
  bool adaptive = true;
  Adjustment adjustment = Adjustment::kNone;
};

struct SampleOutput {
  std::string method;
  /// Selected source indices; empty when points are synthesized.
  std::vector<Index> indices;
  std::vector<Vec3> points;
  /// 1-based layer of each output element.
  std::vector<int> layer_of;
  std::vector<LayerLog> avs_log;
  double timing_ms = 0.0;
};

/// Process-wide default worker count: $HAVS_NUM_THREADS if set, otherwise the
/// OpenMP default.
int default_threads();
int resolve_threads(int requested);

}  // namespace havs

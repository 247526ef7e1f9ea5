#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "havs/core.hpp"

namespace havs {

namespace fs = std::filesystem;

/// Whitespace-separated ASCII, one point per line: `x y z [intensity]`.
/// Blank lines and lines starting with '#' are skipped. Every data line must
/// have the same arity.
PointCloud read_xyz(const fs::path& path);
PointCloud parse_xyz(const std::string& text, const std::string& origin = "<memory>");

/// KITTI-style little-endian float32 quadruples (x, y, z, intensity).
PointCloud read_bin(const fs::path& path);

/// Picks read_bin for `.bin`, read_xyz otherwise.
PointCloud read_cloud(const fs::path& path);

/// Six significant digits; adds the intensity column when present.
void write_xyz(const fs::path& path, const PointCloud& cloud);
/// Coordinates are narrowed to float32; missing intensity is written as 0.
void write_bin(const fs::path& path, const PointCloud& cloud);

enum class OutputFormat { kXyz, kBin, kJson };
OutputFormat parse_format(const std::string& s);
/// Format implied by the file extension (.bin, .json, anything else xyz).
OutputFormat format_for_path(const fs::path& path);

/// JSON schema: {method, m, indices, points, layer_of, avs_log, timing_ms}.
std::string output_json(const SampleOutput& output);

/// Writes the sampled points. `source` (optional) supplies intensity for
/// index-preserving outputs.
void write_output(const SampleOutput& output, OutputFormat format, const fs::path& path,
                  const PointCloud* source = nullptr);

// ---------------------------------------------------------------------------
// Synthetic scenes

/// Seeded LiDAR-like scene: sensor at the origin, background points whose
/// horizontal range r follows a density proportional to r^-falloff, and
/// Gaussian instance clusters whose point count decays the same way with
/// distance, so far instances are sparse.
struct SceneConfig {
  std::uint64_t seed = 0;
  /// Half-width in x and y (max range is min of the two) and height in z.
  Vec3 extent{50.0, 50.0, 3.0};
  std::size_t n_background = 12000;
  std::size_t n_instances = 24;
  double instance_size_min = 0.8;
  double instance_size_max = 4.0;
  double density_falloff = 2.0;
  bool ground_plane = true;
  /// Points of an instance at the reference range.
  double instance_points = 400.0;
  double reference_range = 5.0;
  std::size_t min_instance_points = 2;
  /// Innermost range of the sensor.
  double min_range = 2.0;

  void validate() const;
};

/// Instance sizes in point counts, in label order. Independent of n_background.
std::vector<std::size_t> instance_point_counts(const SceneConfig& config);

/// Points (-1 background, then instances 0..n_instances-1), intensity in [0, 1].
PointCloud generate_scene(const SceneConfig& config);

/// Same as generate_scene but sizes the background so the scene holds exactly
/// `total` points.
PointCloud generate_scene_with_total(SceneConfig config, std::size_t total);

}  // namespace havs

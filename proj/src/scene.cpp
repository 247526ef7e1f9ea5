#include <cmath>
#include <numbers>

#include "havs/io.hpp"
#include "havs/random.hpp"

namespace havs {
namespace {

struct InstanceDraw {
  Vec3 center;
  double size;
  std::size_t count;
};

double max_range(const SceneConfig& c) { return std::min(c.extent[0], c.extent[1]); }

std::vector<InstanceDraw> draw_instances(const SceneConfig& c) {
  Rng rng(c.seed, 1);
  std::vector<InstanceDraw> out;
  out.reserve(c.n_instances);
  const double r_max = max_range(c);
  for (std::size_t l = 0; l < c.n_instances; ++l) {
    InstanceDraw d;
    d.size = rng.uniform(c.instance_size_min, c.instance_size_max);
    const double lo = c.min_range + d.size;
    const double hi = std::max(lo, r_max - d.size);
    const double r = rng.uniform(lo, hi);
    const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
    d.center = {r * std::cos(theta), r * std::sin(theta), 0.5 * d.size};
    const double expected = c.instance_points * std::pow(c.reference_range / r, c.density_falloff);
    d.count = std::max(c.min_instance_points, static_cast<std::size_t>(std::llround(expected)));
    out.push_back(d);
  }
  return out;
}

// Inverse CDF of a density proportional to r^-alpha on [lo, hi].
double sample_range(double u, double lo, double hi, double alpha) {
  if (std::abs(alpha - 1.0) < 1e-12) return lo * std::pow(hi / lo, u);
  const double e = 1.0 - alpha;
  const double a = std::pow(lo, e);
  const double b = std::pow(hi, e);
  return std::pow(a + u * (b - a), 1.0 / e);
}

}  // namespace

void SceneConfig::validate() const {
  for (double e : extent) {
    if (!(e > 0.0)) throw Error(ErrorCode::kInvalidArgument, "scene extent must be positive");
  }
  if (!(density_falloff >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "density falloff must be >= 0");
  }
  if (!(instance_size_min > 0.0) || instance_size_max < instance_size_min) {
    throw Error(ErrorCode::kInvalidArgument, "invalid instance size range");
  }
  if (!(min_range > 0.0) || min_range >= max_range(*this)) {
    throw Error(ErrorCode::kInvalidArgument, "min range must lie inside the scene extent");
  }
  if (instance_points < 0.0 || !(reference_range > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "invalid instance density parameters");
  }
}

std::vector<std::size_t> instance_point_counts(const SceneConfig& config) {
  config.validate();
  std::vector<std::size_t> counts;
  for (const InstanceDraw& d : draw_instances(config)) counts.push_back(d.count);
  return counts;
}

PointCloud generate_scene(const SceneConfig& config) {
  config.validate();
  const std::vector<InstanceDraw> instances = draw_instances(config);
  std::size_t total = config.n_background;
  for (const InstanceDraw& d : instances) total += d.count;

  std::vector<Vec3> points;
  std::vector<float> intensity;
  std::vector<std::int32_t> labels;
  points.reserve(total);
  intensity.reserve(total);
  labels.reserve(total);

  Rng bg(config.seed, 2);
  const double r_max = max_range(config);
  for (std::size_t i = 0; i < config.n_background; ++i) {
    const double r = sample_range(bg.uniform(), config.min_range, r_max, config.density_falloff);
    const double theta = bg.uniform(0.0, 2.0 * std::numbers::pi);
    double z;
    if (config.ground_plane && bg.uniform() < 0.7) {
      z = 0.02 * bg.normal();
    } else {
      z = bg.uniform(0.0, config.extent[2]);
    }
    points.push_back({r * std::cos(theta), r * std::sin(theta), z});
    intensity.push_back(static_cast<float>(bg.uniform()));
    labels.push_back(-1);
  }

  Rng ip(config.seed, 3);
  for (std::size_t l = 0; l < instances.size(); ++l) {
    const InstanceDraw& d = instances[l];
    const double spread = 0.25 * d.size;
    for (std::size_t k = 0; k < d.count; ++k) {
      points.push_back({d.center[0] + spread * ip.normal(), d.center[1] + spread * ip.normal(),
                        d.center[2] + spread * ip.normal()});
      intensity.push_back(static_cast<float>(ip.uniform()));
      labels.push_back(static_cast<std::int32_t>(l));
    }
  }
  return PointCloud(std::move(points), std::move(intensity), std::move(labels));
}

PointCloud generate_scene_with_total(SceneConfig config, std::size_t total) {
  std::size_t inst = 0;
  for (std::size_t c : instance_point_counts(config)) inst += c;
  if (inst > total) {
    throw Error(ErrorCode::kOutOfRange, "instances alone need " + std::to_string(inst) +
                                            " points, more than " + std::to_string(total));
  }
  config.n_background = total - inst;
  return generate_scene(config);
}

}  // namespace havs

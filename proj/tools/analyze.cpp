#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include <json.hpp>

#include "cli.hpp"
#include "havs/metrics.hpp"
#include "havs/samplers.hpp"

namespace havs::cli {
namespace {

using nlohmann::json;

std::vector<Method> sorted_methods(std::vector<Method> methods) {
  std::sort(methods.begin(), methods.end(),
            [](Method a, Method b) { return to_string(a) < to_string(b); });
  methods.erase(std::unique(methods.begin(), methods.end()), methods.end());
  return methods;
}

std::size_t target_count(const AnalyzeConfig& c) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(static_cast<double>(c.n) * c.ratio));
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

std::string analyze_spacing(const AnalyzeConfig& config, std::ostream& csv) {
  const std::size_t m = target_count(config);
  const std::vector<Method> methods = sorted_methods(config.methods);
  std::map<std::string, std::vector<double>> all_dists;
  json summary = {{"report", "spacing"}, {"n", config.n}, {"m", m}, {"scenes", config.scenes}};
  json per_method = json::object();
  double global_max = 0.0;

  for (Method method : methods) {
    const std::string name = to_string(method);
    std::vector<double> mins, means, maxs;
    for (std::size_t s = 0; s < config.scenes; ++s) {
      const PointCloud scene = bench_scene(config.n, config.seed + s);
      const SampleOutput out =
          sample(scene, spec_for_scene(method, m, scene, config.seed + s, config.threads));
      const SpacingStats st = spacing_stats(out.points, config.bins);
      mins.push_back(st.min);
      means.push_back(st.mean);
      maxs.push_back(st.max);
      global_max = std::max(global_max, st.max);
      auto& d = all_dists[name];
      d.insert(d.end(), st.nn_dists.begin(), st.nn_dists.end());
    }
    per_method[name] = {{"mean_min", mean_of(mins)},
                        {"mean_mean", mean_of(means)},
                        {"mean_max", mean_of(maxs)},
                        {"min_of_min", *std::min_element(mins.begin(), mins.end())}};
  }

  csv << "method,bin,bin_lo,bin_hi,count\n";
  for (Method method : methods) {
    const std::string name = to_string(method);
    const Histogram h = make_histogram(all_dists[name], config.bins, 0.0, global_max);
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      csv << name << ',' << b << ',' << fmt(h.edges[b]) << ',' << fmt(h.edges[b + 1]) << ','
          << h.counts[b] << '\n';
    }
  }
  summary["methods"] = std::move(per_method);
  return summary.dump(2);
}

std::string analyze_recall(const AnalyzeConfig& config, std::ostream& csv) {
  const std::size_t m = target_count(config);
  const std::vector<Method> methods = sorted_methods(config.methods);
  json summary = {{"report", "recall"}, {"n", config.n}, {"m", m}, {"scenes", config.scenes},
                  {"threshold", config.threshold}};
  json per_method = json::object();
  csv << kRecallHeader << '\n';
  for (Method method : methods) {
    const std::string name = to_string(method);
    std::vector<double> pr, ir;
    for (std::size_t s = 0; s < config.scenes; ++s) {
      const std::uint64_t seed = config.seed + s;
      const PointCloud scene = bench_scene(config.n, seed);
      const SampleOutput out = sample(scene, spec_for_scene(method, m, scene, seed, config.threads));
      const RecallReport r = recall(scene, out.indices, config.threshold);
      pr.push_back(r.point_recall);
      ir.push_back(r.instance_recall);
      csv << name << ',' << seed << ',' << fmt(r.point_recall) << ',' << fmt(r.instance_recall)
          << '\n';
    }
    per_method[name] = {{"mean_point_recall", mean_of(pr)}, {"mean_instance_recall", mean_of(ir)}};
  }
  summary["methods"] = std::move(per_method);
  return summary.dump(2);
}

PointCloud avsrate_scene(const AnalyzeConfig& config, std::size_t index, double* extent) {
  const double t = config.scenes > 1
                       ? static_cast<double>(index) / static_cast<double>(config.scenes - 1)
                       : 0.0;
  const double e = config.extent_min * std::pow(config.extent_max / config.extent_min, t);
  if (extent) *extent = e;
  return bench_scene(config.n, config.seed + index, e);
}

std::string analyze_avsrate(const AnalyzeConfig& config, std::ostream& csv) {
  const std::size_t m = target_count(config);
  std::vector<PointCloud> scenes;
  std::vector<double> extents;
  for (std::size_t s = 0; s < config.scenes; ++s) {
    double e = 0.0;
    scenes.push_back(avsrate_scene(config, s, &e));
    extents.push_back(e);
  }
  AvsParams params;
  params.threads = resolve_threads(config.threads);
  const SamplingRateSummary sum = avs_sampling_rate(scenes, m, config.fixed_voxel, params);

  csv << "seed,extent,fixed_count,fixed_deviation,avs_count,avs_deviation,converged,iterations\n";
  std::size_t converged = 0;
  std::map<int, std::size_t> iteration_hist;
  for (const SamplingRateRow& row : sum.rows) {
    csv << config.seed + row.scene << ',' << fmt(extents[row.scene]) << ',' << row.fixed_count
        << ',' << fmt(row.fixed_deviation) << ',' << row.avs_count << ','
        << fmt(row.avs_deviation) << ',' << (row.avs_converged ? 1 : 0) << ','
        << row.avs_iterations << '\n';
    converged += row.avs_converged ? 1 : 0;
    ++iteration_hist[row.avs_iterations];
  }
  json hist = json::object();
  for (const auto& [it, c] : iteration_hist) hist[std::to_string(it)] = c;
  json summary = {
      {"report", "avsrate"},
      {"n", config.n},
      {"m", m},
      {"scenes", config.scenes},
      {"fixed_voxel", {sum.fixed_voxel[0], sum.fixed_voxel[1], sum.fixed_voxel[2]}},
      {"fixed_iqr", sum.fixed_iqr},
      {"avs_iqr", sum.avs_iqr},
      {"converged_fraction",
       static_cast<double>(converged) / static_cast<double>(std::max<std::size_t>(1, sum.rows.size()))},
      {"iteration_histogram", hist},
      {"log2_inverse_sigma_bound", static_cast<int>(std::ceil(std::log2(1.0 / params.sigma)))}};
  return summary.dump(2);
}

}  // namespace havs::cli

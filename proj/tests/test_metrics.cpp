#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "havs/io.hpp"
#include "havs/metrics.hpp"
#include "oracles.hpp"

using namespace havs;

TEST_CASE("spacing on a unit line") {
  const SpacingStats s = spacing_stats(std::vector<Vec3>{{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}});
  for (double d : s.nn_dists) CHECK(d == 1.0);
  CHECK(s.min == 1.0);
  CHECK(s.mean == 1.0);
  CHECK(s.max == 1.0);
}

TEST_CASE("spacing of two points") {
  const SpacingStats s = spacing_stats(std::vector<Vec3>{{0, 0, 0}, {3, 4, 0}});
  CHECK(s.nn_dists == std::vector<double>{5.0, 5.0});
  CHECK_THROWS_AS(spacing_stats(std::vector<Vec3>{{0, 0, 0}}), Error);
}

TEST_CASE("spacing matches brute force") {
  for (std::size_t n : {std::size_t{300}, std::size_t{40}, std::size_t{2000}}) {
    const auto pts = oracle::uniform_cloud(n, n, -2.0, 2.0);
    const SpacingStats s = spacing_stats(pts);
    const auto expect = oracle::nearest_dists(pts);
    REQUIRE(s.nn_dists.size() == n);
    for (std::size_t i = 0; i < n; ++i) CHECK(s.nn_dists[i] == expect[i]);
    CHECK(s.min == *std::min_element(expect.begin(), expect.end()));
    CHECK(s.max == *std::max_element(expect.begin(), expect.end()));
    CHECK(s.min <= s.mean);
    CHECK(s.mean <= s.max);
    CHECK(std::accumulate(s.histogram.counts.begin(), s.histogram.counts.end(), std::size_t{0}) == n);
    CHECK(s.histogram.counts.size() == 64);
    CHECK(s.histogram.edges.front() == 0.0);
    CHECK(s.histogram.edges.back() == s.max);
  }
}

TEST_CASE("spacing is permutation invariant") {
  auto pts = oracle::uniform_cloud(500, 3);
  const SpacingStats a = spacing_stats(pts);
  Rng rng(4);
  rng.shuffle(std::span<Vec3>(pts));
  const SpacingStats b = spacing_stats(pts);
  CHECK(a.min == b.min);
  CHECK(a.mean == b.mean);
  CHECK(a.max == b.max);
  CHECK(a.histogram.counts == b.histogram.counts);
}

TEST_CASE("spacing min equals the last fps selection distance") {
  const auto pts = oracle::uniform_cloud(400, 6);
  const FpsTrace t = fps_trace(pts, 40);
  std::vector<Vec3> chosen;
  for (Index i : t.selected) chosen.push_back(pts[i]);
  CHECK(spacing_stats(chosen).min == t.selection_dist.back());
}

TEST_CASE("histogram edges") {
  const std::vector<double> v{0.0, 0.5, 1.0, 1.0, 0.25};
  const Histogram h = make_histogram(v, 4, 0.0, 1.0);
  CHECK(h.counts == std::vector<std::size_t>{1, 1, 1, 2});
  CHECK(h.edges.size() == 5);
}

TEST_CASE("recall basics") {
  const PointCloud src({{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}, {4, 0, 0}}, std::nullopt,
                       std::vector<std::int32_t>{-1, 0, 0, 1, -1});
  const std::vector<Index> all{0, 1, 2, 3, 4};
  const RecallReport r = recall(src, all);
  CHECK(r.point_recall == 1.0);
  CHECK(r.instance_recall == 1.0);

  const std::vector<Index> background{0, 4};
  const RecallReport none = recall(src, background);
  CHECK(none.point_recall == 0.0);
  CHECK(none.instance_recall == 0.0);

  const std::vector<Index> some{1, 1, 4};
  const RecallReport half = recall(src, some);
  CHECK(half.point_recall == doctest::Approx(1.0 / 3.0));
  CHECK(half.instance_recall == 0.5);
  CHECK(half.per_instance_counts.at(0) == 1);
  CHECK(half.per_instance_counts.at(1) == 0);

  const std::vector<Index> two{1, 2, 3};
  CHECK(recall(src, two, 2).instance_recall == 0.5);

  CHECK_THROWS_AS(recall(PointCloud({{0, 0, 0}}), all), Error);
  const std::vector<Index> bad{9};
  CHECK_THROWS_AS(recall(src, bad), Error);
}

TEST_CASE("recall is monotone in the selection") {
  SceneConfig c;
  c.seed = 3;
  c.n_background = 2000;
  const PointCloud src = generate_scene(c);
  std::vector<Index> order(src.size());
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(5);
  rng.shuffle(std::span<Index>(order));
  double pr = 0.0, ir = 0.0;
  for (std::size_t k = 0; k <= order.size(); k += 97) {
    const RecallReport r = recall(src, std::span<const Index>(order.data(), k));
    CHECK(r.point_recall >= pr);
    CHECK(r.instance_recall >= ir);
    CHECK(r.point_recall <= 1.0);
    CHECK(r.instance_recall <= 1.0);
    pr = r.point_recall;
    ir = r.instance_recall;
  }
}

TEST_CASE("quantiles") {
  CHECK(quantile({1, 2, 3, 4, 5}, 0.5) == 3.0);
  CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
  CHECK(quantile({4, 1, 3, 2}, 0.0) == 1.0);
  CHECK(quantile({4, 1, 3, 2}, 1.0) == 4.0);
  const std::vector<double> v{1, 2, 3, 4, 5};
  CHECK(interquartile_range(v) == 2.0);
}

TEST_CASE("avs sampling rate") {
  std::vector<PointCloud> scenes;
  for (std::uint64_t s = 0; s < 8; ++s) {
    SceneConfig c;
    c.seed = s;
    const double r = 5.0 + 6.0 * static_cast<double>(s);
    c.extent = {r, r, 3.0};
    c.min_range = std::min(2.0, r / 5.0);
    c.n_background = 3000;
    c.n_instances = 6;
    scenes.push_back(generate_scene(c));
  }
  const SamplingRateSummary sum = avs_sampling_rate(scenes, 500);
  REQUIRE(sum.rows.size() == scenes.size());
  for (const SamplingRateRow& row : sum.rows) {
    if (row.avs_converged) {
      CHECK(row.avs_deviation >= 0.0);
      CHECK(row.avs_deviation <= 0.05);
    }
  }
  CHECK(sum.fixed_iqr > sum.avs_iqr);

  // A fixed voxel equal to a scene's own AVS voxel reproduces its count.
  const AvsResult own = avs(scenes[3], 500);
  const SamplingRateSummary self = avs_sampling_rate(std::span(&scenes[3], 1), 500, own.voxel);
  CHECK(self.rows[0].fixed_count == own.count);
  CHECK(self.rows[0].fixed_deviation == doctest::Approx(self.rows[0].avs_deviation));
}

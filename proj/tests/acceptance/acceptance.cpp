// Runs every acceptance criterion and prints one PASS/FAIL line per item.
// Exit status is the number of failed criteria (0 when all pass).

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "havs/io.hpp"
#include "havs/metrics.hpp"
#include "havs/samplers.hpp"
#include "havs/voxelhash.hpp"
#include "oracles.hpp"

using namespace havs;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

std::vector<Vec3> sorted(std::vector<Vec3> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// 1 -------------------------------------------------------------------------

Outcome fps_oracle() {
  const auto t0 = Clock::now();
  std::size_t mismatches = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed, 1);
    const std::size_t n = 2 + rng.below(63);
    const std::size_t m = 1 + rng.below(std::min<std::size_t>(16, n));
    const auto pts = oracle::uniform_cloud(n, seed, -5.0, 5.0);
    const auto ref = oracle::fps(pts, m);
    const FpsTrace t = fps_trace(pts, m);
    if (t.selected != ref.selected || t.selection_dist != ref.selection_dist) ++mismatches;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 5.0,
          format("200 clouds, %zu mismatches, %.3f s", mismatches, secs)};
}

// 2 -------------------------------------------------------------------------

Outcome fps_spacing() {
  std::size_t bad_min = 0, bad_order = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed, 2);
    const std::size_t n = 50 + rng.below(450);
    const std::size_t m = 2 + rng.below(n / 4);
    const auto pts = oracle::uniform_cloud(n, 1000 + seed, 0.0, 10.0);
    const FpsTrace t = fps_trace(pts, m);
    std::vector<Vec3> chosen;
    for (Index i : t.selected) chosen.push_back(pts[i]);
    if (oracle::min_pairwise(chosen) != t.selection_dist.back()) ++bad_min;
    for (std::size_t k = 2; k < t.selection_dist.size(); ++k) {
      if (t.selection_dist[k] > t.selection_dist[k - 1]) {
        ++bad_order;
        break;
      }
    }
  }
  return {bad_min == 0 && bad_order == 0,
          format("100 clouds, %zu min-distance mismatches, %zu increasing traces", bad_min,
                 bad_order)};
}

// 3 -------------------------------------------------------------------------

Outcome center_closest_oracle() {
  std::size_t mismatches = 0, tie_voxels = 0;
  const Vec3 v{0.25, 0.25, 0.25};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed, 3);
    const std::size_t base = 20 + rng.below(200);
    std::vector<Vec3> pts;
    // Dyadic coordinates keep mirrored copies at exactly equal centre distance.
    auto dyadic = [&] { return static_cast<double>(rng.below(256)) / 64.0 - 2.0; };
    for (std::size_t i = 0; i < base; ++i) pts.push_back({dyadic(), dyadic(), dyadic()});
    const std::size_t mirrored = pts.size() / 2;
    for (std::size_t i = 0; i < mirrored && pts.size() < 500; ++i) {
      const auto g = oracle::floor_key(pts[i], v);
      const Vec3 c{v[0] * (static_cast<double>(std::get<0>(g)) + 0.5),
                   v[1] * (static_cast<double>(std::get<1>(g)) + 0.5),
                   v[2] * (static_cast<double>(std::get<2>(g)) + 0.5)};
      const Vec3 m{2 * c[0] - pts[i][0], 2 * c[1] - pts[i][1], 2 * c[2] - pts[i][2]};
      if (m != pts[i] && oracle::floor_key(m, v) == g) pts.push_back(m);
    }
    // Exact duplicates exercise the index tie-break as well.
    for (std::size_t i = 0; i < 5; ++i) pts.push_back(pts[rng.below(base)]);
    rng.shuffle(std::span<Vec3>(pts));

    const auto ref = oracle::center_closest(pts, v);
    std::map<oracle::Key, std::size_t> best_count;
    for (const oracle::Winner& w : ref) {
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (oracle::floor_key(pts[i], v) == w.key && oracle::center_dist(pts[i], w.key, v) == w.dist)
          ++best_count[w.key];
      }
    }
    for (const auto& [k, c] : best_count) tie_voxels += c > 1 ? 1 : 0;

    std::set<Index> expect;
    for (const oracle::Winner& w : ref) expect.insert(w.index);

    const PointCloud cloud(pts);
    const std::vector<std::uint8_t> active(pts.size(), 1);
    SampleSpec spec;
    spec.fixed_voxel = v;
    spec.threads = 1;
    const SampleOutput layer = havs_layer(cloud, active, ref.size(), spec);
    if (std::set<Index>(layer.indices.begin(), layer.indices.end()) != expect) ++mismatches;

    for (int threads : {1, 4}) {
      const VoxelTable table = build_center_closest(pts, {}, v, threads);
      const auto entries = table.extract();
      bool same = entries.size() == ref.size();
      for (std::size_t k = 0; same && k < entries.size(); ++k) {
        same = entries[k].index == ref[k].index && entries[k].dist == ref[k].dist;
      }
      if (!same) ++mismatches;
    }
  }
  return {mismatches == 0 && tie_voxels > 0,
          format("100 clouds, %zu mismatches, %zu voxels with tied winners", mismatches,
                 tie_voxels)};
}

// 4 -------------------------------------------------------------------------

Outcome avs_contract() {
  std::size_t converged = 0, violations = 0;
  std::map<int, std::size_t> hist;
  const int scenes = 200;
  for (int s = 0; s < scenes; ++s) {
    Rng rng(static_cast<std::uint64_t>(s), 4);
    SceneConfig c;
    c.seed = static_cast<std::uint64_t>(s);
    const double r = 5.0 * std::pow(20.0, rng.uniform());
    c.extent = {r, r * rng.uniform(0.5, 1.0), rng.uniform(1.0, 6.0)};
    c.min_range = std::min(2.0, std::min(c.extent[0], c.extent[1]) / 5.0);
    c.n_background = 3000 + rng.below(9000);
    c.n_instances = rng.below(24);
    const PointCloud cloud = generate_scene(c);
    const std::size_t m = static_cast<std::size_t>(cloud.size() * rng.uniform(0.05, 0.4));
    AvsParams p;
    p.aspect = rng.below(2) ? Vec3{1, 1, 1} : Vec3{1, 1, rng.uniform(0.5, 2.0)};
    const AvsResult a = avs(cloud, m, p);
    ++hist[a.iterations];
    if (a.iterations > p.t_max) ++violations;
    if (a.converged) {
      ++converged;
      if (a.count < m || a.count > avs_upper_bound(m, p.sigma)) ++violations;
    }
  }
  const double rate = static_cast<double>(converged) / scenes;
  std::string dist;
  for (const auto& [it, n] : hist) dist += format("%s%d:%zu", dist.empty() ? "" : " ", it, n);
  const int claim = static_cast<int>(std::ceil(std::log2(1.0 / 0.05)));
  return {violations == 0 && rate >= 0.95,
          format("%d scenes, converged %.1f%%, %zu violations; iterations {%s}; "
                 "ceil(log2(1/sigma)) = %d",
                 scenes, 100.0 * rate, violations, dist.c_str(), claim)};
}

// 5 -------------------------------------------------------------------------

Outcome determinism() {
  const std::size_t n = std::size_t{1} << 14;
  const int max_threads = std::max(1, omp_get_num_procs());
  std::size_t differing = 0, clouds = 0;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const PointCloud scene = cli::bench_scene(n, 500 + seed);
    const std::vector<Vec3> pts(scene.points().begin(), scene.points().end());
    if (oracle::as_set(pts).size() != pts.size()) {
      return {false, "generated cloud has duplicate points"};
    }
    ++clouds;
    SampleSpec spec;
    spec.m = n / 4;
    spec.threads = 1;
    const auto reference = sorted(havs::havs(scene, spec).points);
    for (int r = 0; r < 10; ++r) {
      if (sorted(havs::havs(scene, spec).points) != reference) ++differing;
    }
    for (int t : {1, 4, max_threads}) {
      SampleSpec ts = spec;
      ts.threads = t;
      if (sorted(havs::havs(scene, ts).points) != reference) ++differing;
    }
    for (std::uint64_t p = 0; p < 10; ++p) {
      std::vector<Vec3> shuffled = pts;
      Rng rng(p, 5);
      rng.shuffle(std::span<Vec3>(shuffled));
      if (sorted(havs::havs(PointCloud(shuffled), spec).points) != reference) ++differing;
    }
  }
  return {differing == 0,
          format("%zu clouds of n=%zu, threads {1,4,%d}, 10 repeats, 10 permutations, %zu "
                 "differing outputs",
                 clouds, n, max_threads, differing)};
}

// 6, 7 ----------------------------------------------------------------------

struct QualityRow {
  double mean_havs, mean_rps;
  double min_fps, min_havs, min_rps;
  double inst_havs, inst_rps;
  double point_havs, point_fps;
};

std::vector<QualityRow> quality_rows() {
  std::vector<QualityRow> rows;
  const std::size_t n = std::size_t{1} << 14;
  const std::size_t m = n / 4;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const PointCloud scene = cli::bench_scene(n, 2000 + seed);
    SampleSpec hs;
    hs.m = m;
    hs.threads = 1;
    const SampleOutput h = havs::havs(scene, hs);
    const SampleOutput r = rps(scene, m, seed);
    const SampleOutput f = fps(scene, m);
    const SpacingStats sh = spacing_stats(h.points);
    const SpacingStats sr = spacing_stats(r.points);
    const SpacingStats sf = spacing_stats(f.points);
    const RecallReport rh = recall(scene, h.indices);
    const RecallReport rr = recall(scene, r.indices);
    const RecallReport rf = recall(scene, f.indices);
    rows.push_back({sh.mean, sr.mean, sf.min, sh.min, sr.min, rh.instance_recall,
                    rr.instance_recall, rh.point_recall, rf.point_recall});
  }
  return rows;
}

Outcome spacing_order(const std::vector<QualityRow>& rows) {
  std::size_t mean_ok = 0, min_ok = 0;
  for (const QualityRow& q : rows) {
    mean_ok += q.mean_havs > q.mean_rps ? 1 : 0;
    min_ok += (q.min_fps >= q.min_havs && q.min_havs >= q.min_rps) ? 1 : 0;
  }
  const double a = static_cast<double>(mean_ok) / rows.size();
  const double b = static_cast<double>(min_ok) / rows.size();
  return {a >= 0.9 && b >= 0.8,
          format("%zu scenes, mean HAVS > RPS in %.0f%%, min FPS >= HAVS >= RPS in %.0f%%",
                 rows.size(), 100 * a, 100 * b)};
}

Outcome recall_order(const std::vector<QualityRow>& rows) {
  std::size_t inst_ok = 0, point_ok = 0;
  for (const QualityRow& q : rows) {
    inst_ok += q.inst_havs >= q.inst_rps ? 1 : 0;
    point_ok += q.point_havs >= q.point_fps ? 1 : 0;
  }
  const double a = static_cast<double>(inst_ok) / rows.size();
  const double b = static_cast<double>(point_ok) / rows.size();
  return {a >= 0.9 && b >= 0.6,
          format("%zu scenes, instance recall HAVS >= RPS in %.0f%%, point recall HAVS >= FPS "
                 "in %.0f%%",
                 rows.size(), 100 * a, 100 * b)};
}

// 8, 9 ----------------------------------------------------------------------

struct Timings {
  std::map<std::pair<std::string, std::size_t>, double> median;
  double seconds = 0.0;
};

Timings bench_timings() {
  const auto t0 = Clock::now();
  cli::BenchConfig c;
  c.sizes = {std::size_t{1} << 14, std::size_t{1} << 16, std::size_t{1} << 18};
  c.methods = {Method::kFps, Method::kHavs};
  c.trials = 5;
  c.threads = 1;
  c.fps_max_n = std::size_t{1} << 16;
  Timings t;
  for (const cli::BenchRecord& r : cli::run_bench(c)) {
    if (!r.skipped) t.median[{r.method, r.n}] = r.median_ms;
  }
  t.seconds = seconds_since(t0);
  return t;
}

Outcome scaling(const Timings& t) {
  const double h16 = t.median.at({"havs", 1 << 16});
  const double h18 = t.median.at({"havs", 1 << 18});
  const double f14 = t.median.at({"fps", 1 << 14});
  const double f16 = t.median.at({"fps", 1 << 16});
  const double hr = h18 / h16, fr = f16 / f14;
  return {hr <= 8.0 && fr >= 10.0 && t.seconds < 600.0,
          format("HAVS t(2^18)/t(2^16) = %.2f (%.2f / %.2f ms), FPS t(2^16)/t(2^14) = %.2f "
                 "(%.1f / %.1f ms), benchmark %.1f s",
                 hr, h18, h16, fr, f16, f14, t.seconds)};
}

Outcome speedup(const Timings& t) {
  const double h16 = t.median.at({"havs", 1 << 16});
  const double f16 = t.median.at({"fps", 1 << 16});
  return {f16 / h16 >= 50.0,
          format("n=2^16, m=n/4: FPS %.1f ms, HAVS %.2f ms, speedup %.1fx", f16, h16, f16 / h16)};
}

// 10 ------------------------------------------------------------------------

Outcome avs_vs_fixed() {
  cli::AnalyzeConfig c;
  c.scenes = 100;
  c.n = std::size_t{1} << 14;
  c.extent_min = 5.0;
  c.extent_max = 50.0;
  c.threads = 1;
  std::vector<PointCloud> scenes;
  for (std::size_t s = 0; s < c.scenes; ++s) scenes.push_back(cli::avsrate_scene(c, s));
  const SamplingRateSummary sum = avs_sampling_rate(scenes, c.n / 4);
  return {sum.fixed_iqr > sum.avs_iqr,
          format("100 scenes, extents 5-50 m, deviation IQR fixed %.4f vs AVS %.4f",
                 sum.fixed_iqr, sum.avs_iqr)};
}

// 11 ------------------------------------------------------------------------

Outcome ablation(const fs::path& dir) {
  SceneConfig sc;
  sc.seed = 11;
  sc.n_background = 6000;
  const fs::path input = dir / "ablation.bin";
  write_bin(input, generate_scene(sc));
  // The CLI sees the float32 file contents, so compare against those.
  const PointCloud scene = read_bin(input);
  const std::size_t m = 1200;
  std::size_t runs = 0, failures = 0;
  std::string first_failure;
  for (const char* rep : {"average", "center", "random", "center_closest"}) {
    for (bool adaptive : {false, true}) {
      for (int layers : {1, 2, 3}) {
        const fs::path out = dir / "ablation.json";
        std::vector<std::string> args{"havs", "sample", "--input", input.string(), "--output",
                                      out.string(), "--num", std::to_string(m),
                                      "--representative", rep, "--layers",
                                      std::to_string(layers)};
        if (!adaptive) {
          args.push_back("--voxel");
          args.push_back("1.0");
        }
        std::vector<const char*> argv;
        for (const std::string& a : args) argv.push_back(a.c_str());
        std::ostringstream so, se;
        ++runs;
        const int code = cli::run(static_cast<int>(argv.size()), argv.data(), so, se);
        bool ok = code == 0;
        if (ok) {
          std::ifstream f(out);
          const auto j = nlohmann::json::parse(f);
          const auto idx = j["indices"].get<std::vector<Index>>();
          const auto pts = j["points"].get<std::vector<std::array<double, 3>>>();
          ok = pts.size() == m && j["avs_log"].size() == static_cast<std::size_t>(layers);
          const bool fake = std::strcmp(rep, "average") == 0 || std::strcmp(rep, "center") == 0;
          if (fake) {
            ok = ok && idx.empty();
          } else {
            const std::set<Index> uniq(idx.begin(), idx.end());
            ok = ok && idx.size() == m && uniq.size() == m && *uniq.rbegin() < scene.size();
            for (std::size_t k = 0; ok && k < idx.size(); ++k) {
              ok = Vec3{pts[k][0], pts[k][1], pts[k][2]} == scene[idx[k]];
            }
          }
        }
        if (!ok) {
          ++failures;
          if (first_failure.empty()) {
            first_failure = format(" (first: %s layers=%d %s: %s)", rep, layers,
                                   adaptive ? "adaptive" : "fixed", se.str().c_str());
          }
        }
      }
    }
  }
  return {failures == 0, format("%zu CLI runs, %zu failed%s", runs, failures, first_failure.c_str())};
}

// 12 ------------------------------------------------------------------------

Outcome io_round_trips(const fs::path& dir) {
  std::size_t failures = 0;
  SceneConfig sc;
  sc.seed = 12;
  const PointCloud scene = generate_scene(sc);

  write_bin(dir / "a.bin", scene);
  const PointCloud b = read_bin(dir / "a.bin");
  bool bin_ok = b.size() == scene.size();
  for (std::size_t i = 0; bin_ok && i < b.size(); ++i) {
    for (int a = 0; a < 3; ++a) {
      const float x = static_cast<float>(scene[i][a]);
      const float y = static_cast<float>(b[i][a]);
      bin_ok = bin_ok && std::memcmp(&x, &y, 4) == 0;
    }
    bin_ok = bin_ok && std::memcmp(&scene.intensity()[i], &b.intensity()[i], 4) == 0;
  }
  write_bin(dir / "b.bin", b);
  {
    std::ifstream fa(dir / "a.bin", std::ios::binary), fb(dir / "b.bin", std::ios::binary);
    const std::string sa{std::istreambuf_iterator<char>(fa), {}};
    const std::string sb{std::istreambuf_iterator<char>(fb), {}};
    bin_ok = bin_ok && sa == sb;
  }
  failures += bin_ok ? 0 : 1;

  const auto pts = oracle::uniform_cloud(5000, 12, -1000.0, 1000.0);
  write_xyz(dir / "a.xyz", PointCloud(pts));
  const PointCloud x = read_xyz(dir / "a.xyz");
  bool xyz_ok = x.size() == pts.size();
  for (std::size_t i = 0; xyz_ok && i < pts.size(); ++i) {
    for (int a = 0; a < 3; ++a) {
      xyz_ok = xyz_ok && std::abs(x[i][a] - pts[i][a]) <= 5e-6 * std::abs(pts[i][a]);
    }
  }
  failures += xyz_ok ? 0 : 1;

  struct Bad {
    std::string text;
    std::size_t line, column;
  };
  const std::vector<Bad> bad{{"0 0 0\n1 nan 2\n", 2, 3},
                             {"0 0 0\n1 2 inf\n", 2, 5},
                             {"1 2 x\n", 1, 5},
                             {"0 0 0\n0 0 0\n1 2\n", 3, 0}};
  std::size_t rejected = 0;
  for (const Bad& c : bad) {
    try {
      parse_xyz(c.text, "bad.xyz");
    } catch (const ParseError& e) {
      rejected += (e.line() == c.line && (c.column == 0 || e.column() == c.column)) ? 1 : 0;
    }
  }
  {
    std::ofstream(dir / "odd.bin", std::ios::binary) << std::string(20, '\0');
    try {
      read_bin(dir / "odd.bin");
    } catch (const ParseError&) {
      ++rejected;
    }
  }
  const bool reject_ok = rejected == bad.size() + 1;
  failures += reject_ok ? 0 : 1;
  return {failures == 0,
          format("bin bit-exact %s, xyz 6 digits %s, malformed rejected %zu/%zu",
                 bin_ok ? "yes" : "no", xyz_ok ? "yes" : "no", rejected, bad.size() + 1)};
}

}  // namespace

int main() {
  const fs::path dir = fs::temp_directory_path() / "havs_acceptance";
  fs::create_directories(dir);

  std::vector<QualityRow> rows;
  Timings timings;
  bool have_rows = false, have_timings = false;
  auto get_rows = [&]() -> const std::vector<QualityRow>& {
    if (!have_rows) rows = quality_rows();
    have_rows = true;
    return rows;
  };
  auto get_timings = [&]() -> const Timings& {
    if (!have_timings) timings = bench_timings();
    have_timings = true;
    return timings;
  };

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"FPS oracle equivalence", fps_oracle},
      {"FPS spacing lower bound", fps_spacing},
      {"center-closest oracle equivalence", center_closest_oracle},
      {"AVS contract", avs_contract},
      {"determinism and permutation invariance", determinism},
      {"spacing ordering", [&] { return spacing_order(get_rows()); }},
      {"instance recall direction", [&] { return recall_order(get_rows()); }},
      {"asymptotic scaling", [&] { return scaling(get_timings()); }},
      {"relative speedup", [&] { return speedup(get_timings()); }},
      {"AVS vs fixed voxel", avs_vs_fixed},
      {"ablation wiring", [&] { return ablation(dir); }},
      {"I/O round trips", [&] { return io_round_trips(dir); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("[%s] %2zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first.c_str(), o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  fs::remove_all(dir);
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed;
}

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "cli.hpp"
#include "havs/samplers.hpp"

namespace havs::cli {
namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    if (!cur.empty()) parts.push_back(cur);
  }
  return parts;
}

int exit_code_for(const Error& e) {
  return e.code() == ErrorCode::kIo || e.code() == ErrorCode::kParse ? kIoError : kUsageError;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw Error(ErrorCode::kIo, "write failed on '" + path + "'");
}

struct SampleArgs {
  std::string input;
  std::string output;
  std::string method = "havs";
  std::size_t num = 0;
  int layers = 2;
  double sigma = 0.05;
  int t_max = 20;
  std::string voxel;
  std::string aspect = "1,1,1";
  std::string representative = "center-closest";
  std::uint64_t seed = 0;
  std::string format;
  int threads = 0;
  std::string fps_start = "first";
  int knn = 16;
  std::string ids_mode = "deterministic";
};

int cmd_sample(const SampleArgs& a, std::ostream& out) {
  SampleSpec spec;
  spec.method = parse_method(a.method);
  spec.m = a.num;
  spec.layers = a.layers;
  spec.sigma = a.sigma;
  spec.t_max = a.t_max;
  spec.aspect = parse_vec3(a.aspect);
  spec.representative = parse_representative(a.representative);
  spec.seed = a.seed;
  spec.threads = a.threads;
  spec.ids_knn = a.knn;
  if (!a.voxel.empty()) spec.fixed_voxel = parse_vec3(a.voxel);
  if (a.fps_start == "random") {
    spec.fps_start = FpsStart::kRandom;
  } else if (a.fps_start != "first") {
    throw Error(ErrorCode::kInvalidArgument, "--fps-start must be 'first' or 'random'");
  }
  if (a.ids_mode == "probabilistic") {
    spec.ids_mode = IdsMode::kProbabilistic;
  } else if (a.ids_mode != "deterministic") {
    throw Error(ErrorCode::kInvalidArgument, "--ids-mode must be 'deterministic' or 'probabilistic'");
  }
  const OutputFormat format = a.format.empty() ? format_for_path(a.output) : parse_format(a.format);

  const PointCloud cloud = read_cloud(a.input);
  spec.validate(cloud.size());
  const SampleOutput result = sample(cloud, spec);
  write_output(result, format, a.output, &cloud);

  char buf[160];
  std::snprintf(buf, sizeof buf, "method=%s n=%zu m=%zu elapsed_ms=%.3f\n", a.method.c_str(),
                cloud.size(), result.points.size(), result.timing_ms);
  out << buf;
  return kOk;
}

}  // namespace

std::size_t parse_size(const std::string& token) {
  try {
    std::size_t pos = 0;
    if (const auto caret = token.find('^'); caret != std::string::npos) {
      const unsigned long base = std::stoul(token.substr(0, caret), &pos);
      if (pos != caret) throw std::invalid_argument(token);
      const unsigned long exp = std::stoul(token.substr(caret + 1), &pos);
      if (pos != token.size() - caret - 1 || exp > 40) throw std::invalid_argument(token);
      std::size_t v = 1;
      for (unsigned long i = 0; i < exp; ++i) v *= base;
      return v;
    }
    std::size_t v = std::stoul(token, &pos);
    if (pos < token.size() && (token[pos] == 'k' || token[pos] == 'K')) {
      v *= 1024;
      ++pos;
    }
    if (pos != token.size()) throw std::invalid_argument(token);
    return v;
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::kInvalidArgument, "invalid size '" + token + "'");
  }
}

std::vector<std::size_t> parse_size_list(const std::string& list) {
  std::vector<std::size_t> sizes;
  for (const std::string& t : split(list, ',')) sizes.push_back(parse_size(t));
  if (sizes.empty()) throw Error(ErrorCode::kInvalidArgument, "empty size list");
  return sizes;
}

std::vector<Method> parse_method_list(const std::string& list) {
  std::vector<Method> methods;
  for (const std::string& t : split(list, ',')) methods.push_back(parse_method(t));
  if (methods.empty()) throw Error(ErrorCode::kInvalidArgument, "empty method list");
  return methods;
}

Vec3 parse_vec3(const std::string& text) {
  const std::vector<std::string> parts = split(text, ',');
  if (parts.size() != 1 && parts.size() != 3) {
    throw Error(ErrorCode::kInvalidArgument, "expected X,Y,Z or a single value, got '" + text + "'");
  }
  Vec3 v;
  try {
    for (int a = 0; a < 3; ++a) {
      std::size_t pos = 0;
      const std::string& p = parts[parts.size() == 1 ? 0 : static_cast<std::size_t>(a)];
      v[a] = std::stod(p, &pos);
      if (pos != p.size()) throw std::invalid_argument(p);
    }
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::kInvalidArgument, "invalid vector '" + text + "'");
  }
  return v;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Point-cloud subsampling: HAVS and reference samplers"};
  app.require_subcommand(1);

  SampleArgs sa;
  CLI::App* sample_cmd = app.add_subcommand("sample", "Sample a point-cloud file");
  sample_cmd->add_option("--input", sa.input, "Input cloud (.bin KITTI float32, else ASCII xyz)")->required();
  sample_cmd->add_option("--output", sa.output, "Output path")->required();
  sample_cmd->add_option("--method", sa.method, "fps, rps, rvs, ids or havs");
  sample_cmd->add_option("--num", sa.num, "Target sample count")->required();
  sample_cmd->add_option("--layers", sa.layers, "HAVS layer count");
  sample_cmd->add_option("--sigma", sa.sigma, "AVS tolerance");
  sample_cmd->add_option("--tmax", sa.t_max, "AVS max iterations");
  sample_cmd->add_option("--voxel", sa.voxel, "Fixed voxel X,Y,Z in meters (rvs; disables AVS in havs)");
  sample_cmd->add_option("--aspect", sa.aspect, "Voxel aspect ratio X,Y,Z for AVS");
  sample_cmd->add_option("--representative", sa.representative,
                         "average, center, random or center-closest");
  sample_cmd->add_option("--seed", sa.seed, "Seed for randomized methods");
  sample_cmd->add_option("--format", sa.format, "xyz, bin or json (default: from extension)");
  sample_cmd->add_option("--threads", sa.threads, "Worker threads (default $HAVS_NUM_THREADS)");
  sample_cmd->add_option("--fps-start", sa.fps_start, "first or random");
  sample_cmd->add_option("--knn", sa.knn, "IDS neighbourhood size");
  sample_cmd->add_option("--ids-mode", sa.ids_mode, "deterministic or probabilistic");

  BenchConfig bc;
  std::string bench_sizes = "2^14,2^16,2^18";
  std::string bench_methods = "fps,rps,rvs,havs";
  std::string bench_out;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Latency benchmark across input scales");
  bench_cmd->add_option("--sizes", bench_sizes, "Comma-separated sizes, e.g. 2^14,2^16");
  bench_cmd->add_option("--methods", bench_methods, "Comma-separated methods");
  bench_cmd->add_option("--ratio", bc.ratio, "m = n * ratio");
  bench_cmd->add_option("--trials", bc.trials, "Timed trials per method and size");
  bench_cmd->add_option("--threads", bc.threads, "Worker threads (default $HAVS_NUM_THREADS)");
  bench_cmd->add_option("--fps-max-n", bc.fps_max_n, "Skip FPS above this input size");
  bench_cmd->add_option("--seed", bc.seed, "Scene seed");
  bench_cmd->add_option("--out", bench_out, "CSV path (default: stdout)");

  AnalyzeConfig ac;
  std::string report;
  std::string analyze_methods = "fps,rps,rvs,havs";
  std::string analyze_out;
  std::string analyze_summary;
  std::string analyze_voxel;
  std::string analyze_n = "2^14";
  CLI::App* analyze_cmd = app.add_subcommand("analyze", "Spacing, recall and AVS-rate reports");
  analyze_cmd->add_option("--report", report, "spacing, recall or avsrate")->required();
  analyze_cmd->add_option("--methods", analyze_methods, "Comma-separated methods (spacing, recall)");
  analyze_cmd->add_option("--scenes", ac.scenes, "Number of seeded scenes");
  analyze_cmd->add_option("--n", analyze_n, "Points per scene");
  analyze_cmd->add_option("--ratio", ac.ratio, "m = n * ratio");
  analyze_cmd->add_option("--seed", ac.seed, "First scene seed");
  analyze_cmd->add_option("--bins", ac.bins, "Spacing histogram bins");
  analyze_cmd->add_option("--threshold", ac.threshold, "Instance recall point threshold");
  analyze_cmd->add_option("--extent-min", ac.extent_min, "avsrate: smallest scene radius");
  analyze_cmd->add_option("--extent-max", ac.extent_max, "avsrate: largest scene radius");
  analyze_cmd->add_option("--voxel", analyze_voxel, "avsrate: shared fixed voxel (default: mean AVS voxel)");
  analyze_cmd->add_option("--threads", ac.threads, "Worker threads");
  analyze_cmd->add_option("--out", analyze_out, "CSV path (default: stdout)");
  analyze_cmd->add_option("--summary", analyze_summary, "JSON summary path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*sample_cmd) return cmd_sample(sa, out);

    if (*bench_cmd) {
      bc.sizes = parse_size_list(bench_sizes);
      bc.methods = parse_method_list(bench_methods);
      const std::vector<BenchRecord> records = run_bench(bc);
      if (bench_out.empty()) {
        write_bench_csv(out, records);
      } else {
        std::ostringstream csv;
        write_bench_csv(csv, records);
        write_text(bench_out, csv.str());
      }
      return kOk;
    }

    if (*analyze_cmd) {
      ac.methods = parse_method_list(analyze_methods);
      ac.n = parse_size(analyze_n);
      if (!analyze_voxel.empty()) ac.fixed_voxel = parse_vec3(analyze_voxel);
      if (ac.scenes == 0) throw Error(ErrorCode::kInvalidArgument, "--scenes must be >= 1");
      std::ostringstream csv;
      std::string summary;
      if (report == "spacing") {
        summary = analyze_spacing(ac, csv);
      } else if (report == "recall") {
        summary = analyze_recall(ac, csv);
      } else if (report == "avsrate") {
        summary = analyze_avsrate(ac, csv);
      } else {
        throw Error(ErrorCode::kInvalidArgument, "unknown report '" + report + "'");
      }
      if (analyze_out.empty()) {
        out << csv.str();
      } else {
        write_text(analyze_out, csv.str());
      }
      if (analyze_summary.empty()) {
        out << summary << '\n';
      } else {
        write_text(analyze_summary, summary + "\n");
      }
      return kOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kUsageError;
}

}  // namespace havs::cli

#include "havs/io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

namespace havs {
namespace {

std::string read_file(const fs::path& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for reading");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::kIo, "read failed on '" + path.string() + "'");
  return data;
}

void write_file(const fs::path& path, const std::string& data, std::ios::openmode mode) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed on '" + path.string() + "'");
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

std::uint32_t load_le32(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
         static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24;
}

void store_le32(std::uint32_t v, char* b) {
  b[0] = static_cast<char>(v & 0xFF);
  b[1] = static_cast<char>((v >> 8) & 0xFF);
  b[2] = static_cast<char>((v >> 16) & 0xFF);
  b[3] = static_cast<char>((v >> 24) & 0xFF);
}

PointCloud output_cloud(const SampleOutput& output, const PointCloud* source) {
  if (source && source->has_intensity() && !output.indices.empty()) {
    std::vector<float> inten;
    inten.reserve(output.indices.size());
    for (Index i : output.indices) inten.push_back(source->intensity()[i]);
    return PointCloud(output.points, std::move(inten));
  }
  return PointCloud(output.points);
}

}  // namespace

PointCloud parse_xyz(const std::string& text, const std::string& origin) {
  std::vector<Vec3> points;
  std::vector<float> intensity;
  std::size_t arity = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    ++line_no;
    const char* line = text.data() + pos;
    const std::size_t len = eol - pos;
    pos = eol + 1;

    std::size_t c = 0;
    while (c < len && is_space(line[c])) ++c;
    if (c == len || line[c] == '#') continue;

    double values[4];
    std::size_t count = 0;
    while (c < len) {
      while (c < len && is_space(line[c])) ++c;
      if (c == len) break;
      std::size_t end = c;
      while (end < len && !is_space(line[end])) ++end;
      if (count == 4) {
        throw ParseError(origin + ":" + std::to_string(line_no) + ":" + std::to_string(c + 1) +
                             ": too many columns (expected 3 or 4)",
                         line_no, c + 1);
      }
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(line + c, line + end, v);
      if (ec != std::errc() || ptr != line + end) {
        throw ParseError(origin + ":" + std::to_string(line_no) + ":" + std::to_string(c + 1) +
                             ": invalid number '" + std::string(line + c, end - c) + "'",
                         line_no, c + 1);
      }
      if (!std::isfinite(v)) {
        throw ParseError(origin + ":" + std::to_string(line_no) + ":" + std::to_string(c + 1) +
                             ": non-finite value '" + std::string(line + c, end - c) + "'",
                         line_no, c + 1);
      }
      values[count++] = v;
      c = end;
    }
    if (count < 3) {
      throw ParseError(origin + ":" + std::to_string(line_no) + ": expected 3 or 4 columns, got " +
                           std::to_string(count),
                       line_no, 1);
    }
    if (arity == 0) {
      arity = count;
    } else if (count != arity) {
      throw ParseError(origin + ":" + std::to_string(line_no) + ": mixed arity (" +
                           std::to_string(count) + " columns after " + std::to_string(arity) + ")",
                       line_no, 1);
    }
    points.push_back({values[0], values[1], values[2]});
    if (arity == 4) intensity.push_back(static_cast<float>(values[3]));
  }
  if (points.empty()) throw ParseError(origin + ": no points", line_no, 0);
  if (arity == 4) return PointCloud(std::move(points), std::move(intensity));
  return PointCloud(std::move(points));
}

PointCloud read_xyz(const fs::path& path) {
  return parse_xyz(read_file(path, std::ios::in), path.string());
}

PointCloud read_bin(const fs::path& path) {
  const std::string data = read_file(path, std::ios::in | std::ios::binary);
  if (data.size() % 16 != 0) {
    throw ParseError(path.string() + ": size " + std::to_string(data.size()) +
                         " is not a multiple of 16 bytes",
                     data.size() / 16 + 1, data.size());
  }
  const std::size_t n = data.size() / 16;
  std::vector<Vec3> points(n);
  std::vector<float> intensity(n);
  const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
  for (std::size_t i = 0; i < n; ++i) {
    float f[4];
    for (int k = 0; k < 4; ++k) {
      f[k] = std::bit_cast<float>(load_le32(bytes + 16 * i + 4 * static_cast<std::size_t>(k)));
      if (!std::isfinite(f[k])) {
        throw ParseError(path.string() + ": non-finite value in record " + std::to_string(i + 1) +
                             " at byte " + std::to_string(16 * i + 4 * static_cast<std::size_t>(k)),
                         i + 1, 16 * i + 4 * static_cast<std::size_t>(k));
      }
    }
    points[i] = {f[0], f[1], f[2]};
    intensity[i] = f[3];
  }
  return PointCloud(std::move(points), std::move(intensity));
}

PointCloud read_cloud(const fs::path& path) {
  return path.extension() == ".bin" ? read_bin(path) : read_xyz(path);
}

void write_xyz(const fs::path& path, const PointCloud& cloud) {
  std::string out;
  out.reserve(cloud.size() * 40);
  char buf[128];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud[i];
    int len;
    if (cloud.has_intensity()) {
      len = std::snprintf(buf, sizeof buf, "%.6g %.6g %.6g %.6g\n", p[0], p[1], p[2],
                          static_cast<double>(cloud.intensity()[i]));
    } else {
      len = std::snprintf(buf, sizeof buf, "%.6g %.6g %.6g\n", p[0], p[1], p[2]);
    }
    out.append(buf, static_cast<std::size_t>(len));
  }
  write_file(path, out, std::ios::out);
}

void write_bin(const fs::path& path, const PointCloud& cloud) {
  std::string out(cloud.size() * 16, '\0');
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud[i];
    const float f[4] = {static_cast<float>(p[0]), static_cast<float>(p[1]),
                        static_cast<float>(p[2]),
                        cloud.has_intensity() ? cloud.intensity()[i] : 0.0f};
    for (int k = 0; k < 4; ++k) {
      store_le32(std::bit_cast<std::uint32_t>(f[k]), out.data() + 16 * i + 4 * static_cast<std::size_t>(k));
    }
  }
  write_file(path, out, std::ios::out | std::ios::binary);
}

OutputFormat parse_format(const std::string& s) {
  if (s == "xyz") return OutputFormat::kXyz;
  if (s == "bin") return OutputFormat::kBin;
  if (s == "json") return OutputFormat::kJson;
  throw Error(ErrorCode::kInvalidArgument, "unknown output format '" + s + "'");
}

OutputFormat format_for_path(const fs::path& path) {
  const auto ext = path.extension();
  if (ext == ".bin") return OutputFormat::kBin;
  if (ext == ".json") return OutputFormat::kJson;
  return OutputFormat::kXyz;
}

std::string output_json(const SampleOutput& output) {
  using nlohmann::json;
  json j;
  j["method"] = output.method;
  j["m"] = output.points.size();
  j["indices"] = output.indices;
  json pts = json::array();
  for (const Vec3& p : output.points) pts.push_back({p[0], p[1], p[2]});
  j["points"] = std::move(pts);
  j["layer_of"] = output.layer_of;
  json log = json::array();
  for (const LayerLog& l : output.avs_log) {
    log.push_back({{"layer", l.layer},
                   {"target", l.target},
                   {"voxel", {l.voxel[0], l.voxel[1], l.voxel[2]}},
                   {"iterations", l.iterations},
                   {"nonempty", l.nonempty},
                   {"converged", l.converged},
                   {"adaptive", l.adaptive},
                   {"adjustment", to_string(l.adjustment)}});
  }
  j["avs_log"] = std::move(log);
  j["timing_ms"] = output.timing_ms;
  return j.dump(1) + "\n";
}

void write_output(const SampleOutput& output, OutputFormat format, const fs::path& path,
                  const PointCloud* source) {
  switch (format) {
    case OutputFormat::kXyz:
      write_xyz(path, output_cloud(output, source));
      return;
    case OutputFormat::kBin:
      write_bin(path, output_cloud(output, source));
      return;
    case OutputFormat::kJson:
      write_file(path, output_json(output), std::ios::out);
      return;
  }
}

}  // namespace havs

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "havs/io.hpp"
#include "havs/metrics.hpp"
#include "havs/samplers.hpp"

namespace py = pybind11;
using namespace havs;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<Vec3> to_points(const Array& a) {
  if (a.ndim() != 2 || a.shape(1) != 3) throw py::value_error("points must have shape (n, 3)");
  const auto r = a.unchecked<2>();
  std::vector<Vec3> pts(static_cast<std::size_t>(a.shape(0)));
  for (py::ssize_t i = 0; i < a.shape(0); ++i) pts[i] = {r(i, 0), r(i, 1), r(i, 2)};
  return pts;
}

py::array_t<double> from_points(std::span<const Vec3> pts) {
  py::array_t<double> out({static_cast<py::ssize_t>(pts.size()), py::ssize_t{3}});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (int a = 0; a < 3; ++a) w(i, a) = pts[i][a];
  }
  return out;
}

template <class T>
py::array_t<T> to_array(std::span<const T> v) {
  return py::array_t<T>(static_cast<py::ssize_t>(v.size()), v.data());
}

std::optional<Vec3> to_vec3(const std::optional<std::vector<double>>& v) {
  if (!v) return std::nullopt;
  if (v->size() == 1) return Vec3{(*v)[0], (*v)[0], (*v)[0]};
  if (v->size() != 3) throw py::value_error("expected 1 or 3 values");
  return Vec3{(*v)[0], (*v)[1], (*v)[2]};
}

py::dict layer_dict(const LayerLog& l) {
  py::dict d;
  d["layer"] = l.layer;
  d["target"] = l.target;
  d["voxel"] = py::make_tuple(l.voxel[0], l.voxel[1], l.voxel[2]);
  d["iterations"] = l.iterations;
  d["nonempty"] = l.nonempty;
  d["converged"] = l.converged;
  d["adaptive"] = l.adaptive;
  d["adjustment"] = to_string(l.adjustment);
  return d;
}

py::dict output_dict(const SampleOutput& o) {
  py::dict d;
  d["method"] = o.method;
  d["indices"] = to_array<Index>(o.indices);
  d["points"] = from_points(o.points);
  d["layer_of"] = to_array<int>(o.layer_of);
  py::list log;
  for (const LayerLog& l : o.avs_log) log.append(layer_dict(l));
  d["avs_log"] = log;
  d["timing_ms"] = o.timing_ms;
  return d;
}

PointCloud make_cloud(const Array& points, std::optional<std::vector<std::int32_t>> labels) {
  return PointCloud(to_points(points), std::nullopt, std::move(labels));
}

py::dict cloud_dict(const PointCloud& c) {
  py::dict d;
  d["points"] = from_points(c.points());
  d["intensity"] = c.has_intensity() ? py::object(to_array<float>(c.intensity())) : py::none();
  d["labels"] = c.has_labels() ? py::object(to_array<std::int32_t>(c.labels())) : py::none();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Hierarchical adaptive voxel-guided point cloud sampling";

  // Released on purpose: the type lives as long as the interpreter.
  static py::handle error = py::exception<Error>(m, "HavsError", PyExc_ValueError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ParseError& e) {
      py::object exc = error(e.what());
      exc.attr("line") = e.line();
      exc.attr("column") = e.column();
      py::set_error(error, exc);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.def(
      "sample",
      [](const Array& points, std::size_t num, const std::string& method, int layers,
         double sigma, int t_max, const std::string& representative, std::uint64_t seed,
         std::optional<std::vector<double>> voxel, std::optional<std::vector<double>> aspect,
         int threads, const std::string& fps_start, int knn, const std::string& ids_mode) {
        const PointCloud cloud = make_cloud(points, std::nullopt);
        SampleSpec s;
        s.m = num;
        s.method = parse_method(method);
        s.layers = layers;
        s.sigma = sigma;
        s.t_max = t_max;
        s.representative = parse_representative(representative);
        s.seed = seed;
        s.fixed_voxel = to_vec3(voxel);
        if (aspect) s.aspect = *to_vec3(aspect);
        s.threads = threads;
        if (fps_start == "random") {
          s.fps_start = FpsStart::kRandom;
        } else if (fps_start != "first") {
          throw py::value_error("fps_start must be 'first' or 'random'");
        }
        s.ids_knn = knn;
        if (ids_mode == "probabilistic") {
          s.ids_mode = IdsMode::kProbabilistic;
        } else if (ids_mode != "deterministic") {
          throw py::value_error("ids_mode must be 'deterministic' or 'probabilistic'");
        }
        SampleOutput out;
        {
          py::gil_scoped_release release;
          out = havs::sample(cloud, s);
        }
        return output_dict(out);
      },
      py::arg("points"), py::arg("num"), py::arg("method") = "havs", py::arg("layers") = 2,
      py::arg("sigma") = 0.05, py::arg("t_max") = 20,
      py::arg("representative") = "center_closest", py::arg("seed") = 0,
      py::arg("voxel") = py::none(), py::arg("aspect") = py::none(), py::arg("threads") = 0,
      py::arg("fps_start") = "first", py::arg("knn") = 16, py::arg("ids_mode") = "deterministic");

  m.def(
      "avs",
      [](const Array& points, std::size_t num, double sigma, int t_max,
         std::optional<std::vector<double>> aspect, int threads) {
        const PointCloud cloud = make_cloud(points, std::nullopt);
        AvsParams p;
        p.sigma = sigma;
        p.t_max = t_max;
        if (aspect) p.aspect = *to_vec3(aspect);
        p.threads = resolve_threads(threads);
        const AvsResult r = havs::avs(cloud, num, p);
        py::dict d;
        d["voxel"] = py::make_tuple(r.voxel[0], r.voxel[1], r.voxel[2]);
        d["count"] = r.count;
        d["iterations"] = r.iterations;
        d["converged"] = r.converged;
        return d;
      },
      py::arg("points"), py::arg("num"), py::arg("sigma") = 0.05, py::arg("t_max") = 20,
      py::arg("aspect") = py::none(), py::arg("threads") = 0);

  m.def(
      "spacing",
      [](const Array& points, std::size_t bins) {
        const std::vector<Vec3> pts = to_points(points);
        const SpacingStats s = spacing_stats(pts, bins);
        py::dict d;
        d["nn_dists"] = to_array<double>(s.nn_dists);
        d["min"] = s.min;
        d["mean"] = s.mean;
        d["max"] = s.max;
        d["counts"] = s.histogram.counts;
        d["edges"] = s.histogram.edges;
        return d;
      },
      py::arg("points"), py::arg("bins") = 64);

  m.def(
      "recall",
      [](const Array& points, std::vector<std::int32_t> labels, std::vector<Index> selected,
         std::size_t threshold) {
        const PointCloud cloud = make_cloud(points, std::move(labels));
        const RecallReport r = havs::recall(cloud, selected, threshold);
        return py::make_tuple(r.point_recall, r.instance_recall);
      },
      py::arg("points"), py::arg("labels"), py::arg("selected"), py::arg("threshold") = 1);

  m.def(
      "read_cloud", [](const fs::path& path) { return cloud_dict(havs::read_cloud(path)); },
      py::arg("path"));

  m.def(
      "write_cloud",
      [](const fs::path& path, const Array& points) {
        const PointCloud cloud = make_cloud(points, std::nullopt);
        if (format_for_path(path) == OutputFormat::kBin) {
          write_bin(path, cloud);
        } else {
          write_xyz(path, cloud);
        }
      },
      py::arg("path"), py::arg("points"));

  m.def(
      "generate_scene",
      [](std::uint64_t seed, std::size_t n_background, std::size_t n_instances,
         std::optional<std::vector<double>> extent) {
        SceneConfig c;
        c.seed = seed;
        c.n_background = n_background;
        c.n_instances = n_instances;
        if (extent) c.extent = *to_vec3(extent);
        return cloud_dict(havs::generate_scene(c));
      },
      py::arg("seed") = 0, py::arg("n_background") = 12000, py::arg("n_instances") = 24,
      py::arg("extent") = py::none());
}

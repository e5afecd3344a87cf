#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "evdeblur/consistency.hpp"
#include "evdeblur/dataset.hpp"
#include "evdeblur/edi.hpp"
#include "evdeblur/eger.hpp"
#include "evdeblur/io.hpp"
#include "evdeblur/metrics.hpp"
#include "evdeblur/simulator.hpp"
#include "evdeblur/synthetic.hpp"

namespace py = pybind11;
using namespace evd;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Image image_from_array(const DoubleArray& arr) {
  const py::buffer_info buf = arr.request();
  if (buf.ndim != 2 && buf.ndim != 3) {
    throw Error(Errc::bad_argument, "image array must be (H,W) or (H,W,C)");
  }
  const int h = static_cast<int>(buf.shape[0]);
  const int w = static_cast<int>(buf.shape[1]);
  const int c = buf.ndim == 3 ? static_cast<int>(buf.shape[2]) : 1;
  if (c != 1 && c != 3) throw Error(Errc::bad_argument, "channels must be 1 or 3");
  Image img(w, h, c);
  std::memcpy(img.data.data(), buf.ptr, img.data.size() * sizeof(double));
  return img;
}

py::array_t<double> array_from_image(const Image& img) {
  py::array_t<double> arr;
  if (img.channels == 1) {
    arr = py::array_t<double>({img.height, img.width});
  } else {
    arr = py::array_t<double>({img.height, img.width, img.channels});
  }
  std::memcpy(arr.mutable_data(), img.data.data(), img.data.size() * sizeof(double));
  return arr;
}

py::array_t<double> array_from_plane(const std::vector<double>& data, int channels,
                                     int height, int width) {
  py::array_t<double> arr({channels, height, width});
  std::memcpy(arr.mutable_data(), data.data(), data.size() * sizeof(double));
  return arr;
}

SharpVideo video_from_arrays(const DoubleArray& frames, const std::vector<double>& timestamps) {
  const py::buffer_info buf = frames.request();
  if (buf.ndim != 3 && buf.ndim != 4) {
    throw Error(Errc::bad_argument, "video array must be (T,H,W) or (T,H,W,C)");
  }
  const int n = static_cast<int>(buf.shape[0]);
  const int h = static_cast<int>(buf.shape[1]);
  const int w = static_cast<int>(buf.shape[2]);
  const int c = buf.ndim == 4 ? static_cast<int>(buf.shape[3]) : 1;
  SharpVideo video;
  video.width = w;
  video.height = h;
  video.timestamps = timestamps;
  const double* src = static_cast<const double*>(buf.ptr);
  const std::size_t frame_len = static_cast<std::size_t>(h) * w * c;
  for (int k = 0; k < n; ++k) {
    Image f(w, h, c);
    std::memcpy(f.data.data(), src + k * frame_len, frame_len * sizeof(double));
    video.frames.push_back(std::move(f));
  }
  return video;
}

// Operator handle usable from both directions: wraps the EDI engine or any
// Python callable (target_interval, blur, stream) -> image array.
struct OperatorHandle {
  DeblurOperator fn;
};

OperatorHandle operator_from_callable(const py::function& callable) {
  return {[callable](const TimeInterval& target, const BlurryFrame& blur,
                     const EventStream& stream) -> Image {
    py::gil_scoped_acquire gil;
    py::object result = callable(target, blur, stream);
    return image_from_array(result.cast<DoubleArray>());
  }};
}

}  // namespace

PYBIND11_MODULE(_evdeblur, m) {
  m.doc() = "event-based motion deblurring core";

  py::register_exception<Error>(m, "EvdError");

  py::class_<TimeInterval>(m, "TimeInterval")
      .def(py::init<double, double>(), py::arg("start"), py::arg("end"))
      .def_readwrite("start", &TimeInterval::start)
      .def_readwrite("end", &TimeInterval::end)
      .def_property_readonly("length", &TimeInterval::length)
      .def_property_readonly("degenerate", &TimeInterval::degenerate)
      .def("midpoint", &TimeInterval::midpoint)
      .def("__repr__", [](const TimeInterval& iv) {
        return "TimeInterval(" + std::to_string(iv.start) + ", " + std::to_string(iv.end) + ")";
      });

  py::class_<Event>(m, "Event")
      .def(py::init([](double t, int x, int y, int p) { return Event{t, x, y, p}; }),
           py::arg("t"), py::arg("x"), py::arg("y"), py::arg("p"))
      .def_readwrite("t", &Event::t)
      .def_readwrite("x", &Event::x)
      .def_readwrite("y", &Event::y)
      .def_readwrite("p", &Event::p);

  py::class_<EventStream>(m, "EventStream")
      .def(py::init([](const DoubleArray& t, const py::array_t<int>& x,
                       const py::array_t<int>& y, const py::array_t<int>& p, int width,
                       int height, const TimeInterval& span) {
             EventStream s;
             s.width = width;
             s.height = height;
             s.span = span;
             const auto tb = t.unchecked<1>();
             const auto xb = x.unchecked<1>();
             const auto yb = y.unchecked<1>();
             const auto pb = p.unchecked<1>();
             for (py::ssize_t i = 0; i < tb.shape(0); ++i) {
               s.events.push_back({tb(i), xb(i), yb(i), pb(i)});
             }
             return s;
           }),
           py::arg("t"), py::arg("x"), py::arg("y"), py::arg("p"), py::arg("width"),
           py::arg("height"), py::arg("span"))
      .def_readonly("width", &EventStream::width)
      .def_readonly("height", &EventStream::height)
      .def_readwrite("span", &EventStream::span)
      .def("__len__", [](const EventStream& s) { return s.events.size(); })
      .def("timestamps",
           [](const EventStream& s) {
             py::array_t<double> arr(static_cast<py::ssize_t>(s.events.size()));
             auto out = arr.mutable_unchecked<1>();
             for (std::size_t i = 0; i < s.events.size(); ++i) out(i) = s.events[i].t;
             return arr;
           })
      .def("coords",
           [](const EventStream& s) {
             py::array_t<int> arr({static_cast<py::ssize_t>(s.events.size()),
                                   static_cast<py::ssize_t>(3)});
             auto out = arr.mutable_unchecked<2>();
             for (std::size_t i = 0; i < s.events.size(); ++i) {
               out(i, 0) = s.events[i].x;
               out(i, 1) = s.events[i].y;
               out(i, 2) = s.events[i].p;
             }
             return arr;
           });

  py::class_<Image>(m, "Image")
      .def(py::init(&image_from_array), py::arg("array"))
      .def_readonly("width", &Image::width)
      .def_readonly("height", &Image::height)
      .def_readonly("channels", &Image::channels)
      .def("numpy", &array_from_image);

  py::class_<BlurryFrame>(m, "BlurryFrame")
      .def(py::init([](const DoubleArray& image, const TimeInterval& exposure) {
             return BlurryFrame{image_from_array(image), exposure};
           }),
           py::arg("image"), py::arg("exposure"))
      .def_readwrite("exposure", &BlurryFrame::exposure)
      .def_property_readonly(
          "image", [](const BlurryFrame& b) { return array_from_image(b.image); });

  py::class_<SharpVideo>(m, "SharpVideo")
      .def(py::init(&video_from_arrays), py::arg("frames"), py::arg("timestamps"))
      .def_readonly("width", &SharpVideo::width)
      .def_readonly("height", &SharpVideo::height)
      .def_readonly("timestamps", &SharpVideo::timestamps)
      .def("__len__", [](const SharpVideo& v) { return v.frames.size(); })
      .def("frame",
           [](const SharpVideo& v, std::size_t k) { return array_from_image(v.frames.at(k)); });

  py::class_<SimulatorConfig>(m, "SimulatorConfig")
      .def(py::init([](double c, double eps, std::uint64_t seed) {
             return SimulatorConfig{c, eps, seed};
           }),
           py::arg("c") = 0.2, py::arg("eps") = 0.01, py::arg("seed") = 0)
      .def_readwrite("c", &SimulatorConfig::c)
      .def_readwrite("eps", &SimulatorConfig::eps)
      .def_readwrite("seed", &SimulatorConfig::seed);

  py::class_<EdiConfig>(m, "EdiConfig")
      .def(py::init([](double c, double eps, int n_samples, double ratio_floor) {
             return EdiConfig{c, eps, n_samples, ratio_floor};
           }),
           py::arg("c") = 0.2, py::arg("eps") = 0.01, py::arg("n_samples") = 49,
           py::arg("ratio_floor") = 1e-6)
      .def_readwrite("c", &EdiConfig::c)
      .def_readwrite("eps", &EdiConfig::eps)
      .def_readwrite("n_samples", &EdiConfig::n_samples)
      .def_readwrite("ratio_floor", &EdiConfig::ratio_floor);

  py::class_<IntegralMap>(m, "IntegralMap")
      .def_readonly("width", &IntegralMap::width)
      .def_readonly("height", &IntegralMap::height)
      .def_readonly("t", &IntegralMap::t)
      .def_readonly("interval", &IntegralMap::interval)
      .def("numpy", [](const IntegralMap& map) {
        return array_from_plane(map.values, 1, map.height, map.width);
      });

  py::class_<VoxelGrid>(m, "VoxelGrid")
      .def_readonly("n_bins", &VoxelGrid::n_bins)
      .def("numpy", [](const VoxelGrid& g) {
        return array_from_plane(g.data, 2 * g.n_bins, g.height, g.width);
      });

  py::class_<EgerTensor>(m, "EgerTensor")
      .def_readonly("n_bins", &EgerTensor::n_bins)
      .def_readonly("parent", &EgerTensor::parent)
      .def_readonly("target", &EgerTensor::target)
      .def("numpy",
           [](const EgerTensor& t) {
             return array_from_plane(t.data, 6 * t.n_bins, t.height, t.width);
           })
      .def("section_sum", &EgerTensor::section_sum);

  py::class_<CalibrationResult>(m, "CalibrationResult")
      .def_readonly("c", &CalibrationResult::c)
      .def_readonly("flat_residual", &CalibrationResult::flat_residual);

  py::class_<LossWeights>(m, "LossWeights")
      .def(py::init([](double bc, double sc, double tg, double sg) {
             return LossWeights{bc, sc, tg, sg};
           }),
           py::arg("bc") = 50.0, py::arg("sc") = 1.0, py::arg("tg") = 0.0,
           py::arg("sg") = 0.0)
      .def_readwrite("bc", &LossWeights::bc)
      .def_readwrite("sc", &LossWeights::sc)
      .def_readwrite("tg", &LossWeights::tg)
      .def_readwrite("sg", &LossWeights::sg);

  py::class_<TrainingPair>(m, "TrainingPair")
      .def(py::init([](const BlurryFrame& b_t, const BlurryFrame& b_tilde,
                       const EventStream& stream, double t) {
             return TrainingPair{b_t, b_tilde, stream, t};
           }),
           py::arg("b_t"), py::arg("b_tilde"), py::arg("stream"), py::arg("t"))
      .def_readwrite("b_t", &TrainingPair::b_t)
      .def_readwrite("b_tilde", &TrainingPair::b_tilde)
      .def_readwrite("stream", &TrainingPair::stream)
      .def_readwrite("t", &TrainingPair::t);

  py::class_<LossBreakdown>(m, "LossBreakdown")
      .def_readonly("bc", &LossBreakdown::bc)
      .def_readonly("sc", &LossBreakdown::sc)
      .def_readonly("tg", &LossBreakdown::tg)
      .def_readonly("sg", &LossBreakdown::sg)
      .def_readonly("total", &LossBreakdown::total);

  py::class_<QualityReport>(m, "QualityReport")
      .def_readonly("psnr_color", &QualityReport::psnr_color)
      .def_readonly("ssim_color", &QualityReport::ssim_color)
      .def_readonly("psnr_gray", &QualityReport::psnr_gray)
      .def_readonly("ssim_gray", &QualityReport::ssim_gray);

  py::class_<OperatorHandle>(m, "DeblurOperator")
      .def(py::init(&operator_from_callable), py::arg("callable"))
      .def("__call__", [](const OperatorHandle& op, const TimeInterval& target,
                          const BlurryFrame& blur, const EventStream& stream) {
        return array_from_image(op.fn(target, blur, stream));
      });

  py::class_<DatasetRecipe>(m, "DatasetRecipe")
      .def(py::init<>())
      .def_readwrite("hr_width", &DatasetRecipe::hr_width)
      .def_readwrite("hr_height", &DatasetRecipe::hr_height)
      .def_readwrite("spatial_ratio", &DatasetRecipe::spatial_ratio)
      .def_readwrite("frames_per_blur", &DatasetRecipe::frames_per_blur)
      .def_readwrite("temporal_scale", &DatasetRecipe::temporal_scale)
      .def_readwrite("threshold_c", &DatasetRecipe::threshold_c)
      .def_readwrite("eps", &DatasetRecipe::eps)
      .def_readwrite("seed", &DatasetRecipe::seed);

  py::class_<SceneSpec>(m, "SceneSpec")
      .def(py::init<>())
      .def_readwrite("width", &SceneSpec::width)
      .def_readwrite("height", &SceneSpec::height)
      .def_readwrite("frames", &SceneSpec::frames)
      .def_readwrite("duration", &SceneSpec::duration)
      .def_readwrite("channels", &SceneSpec::channels)
      .def_readwrite("shift_frac", &SceneSpec::shift_frac);

  // core
  m.def("validate_stream", [](const EventStream& s) -> py::object {
    const auto issue = validate_stream(s);
    if (!issue) return py::none();
    return py::str(std::string(errc_name(issue->kind)) + ": " + issue->message);
  });
  m.def("slice", &slice, py::arg("stream"), py::arg("interval"));
  m.def("signed_count_map", [](const EventStream& s, const TimeInterval& iv) {
    const std::vector<int> counts = signed_count_map(s, iv);
    py::array_t<int> arr({s.height, s.width});
    std::memcpy(arr.mutable_data(), counts.data(), counts.size() * sizeof(int));
    return arr;
  });

  // simulator
  m.def("simulate_events", &simulate_events, py::arg("video"), py::arg("config"));
  m.def("synthesize_blur", &synthesize_blur, py::arg("video"), py::arg("interval"));
  m.def("extend_blur", &extend_blur, py::arg("adjacent"));
  m.def(
      "downsample",
      [](const DoubleArray& img, int factor) {
        return array_from_image(downsample(image_from_array(img), factor));
      },
      py::arg("image"), py::arg("factor"));
  m.def("make_scene", &make_scene, py::arg("spec"));

  // edi
  m.def("compute_integral_map", &compute_integral_map, py::arg("stream"), py::arg("t"),
        py::arg("interval"), py::arg("config"));
  m.def(
      "deblur",
      [](const BlurryFrame& blur, const EventStream& stream, double t, const EdiConfig& cfg) {
        return array_from_image(deblur(blur, stream, t, cfg));
      },
      py::arg("blur"), py::arg("stream"), py::arg("t"), py::arg("config"));
  m.def("upsample_integral_map", &upsample_integral_map, py::arg("map"),
        py::arg("target_width"), py::arg("target_height"));
  m.def(
      "deblur_multiscale",
      [](const BlurryFrame& blur, const EventStream& stream, double t, const EdiConfig& cfg) {
        return array_from_image(deblur_multiscale(blur, stream, t, cfg));
      },
      py::arg("blur"), py::arg("stream"), py::arg("t"), py::arg("config"));
  m.def("blur2blur", &blur2blur, py::arg("blur"), py::arg("stream"), py::arg("t"),
        py::arg("target"), py::arg("config"));
  m.def(
      "reblur",
      [](const std::vector<DoubleArray>& latents, const TimeInterval& exposure) {
        std::vector<Image> imgs;
        for (const DoubleArray& arr : latents) imgs.push_back(image_from_array(arr));
        return reblur(imgs, exposure);
      },
      py::arg("latents"), py::arg("exposure"));
  m.def("calibrate_threshold", &calibrate_threshold, py::arg("blur"), py::arg("blur_ext"),
        py::arg("stream"), py::arg("c_min"), py::arg("c_max"), py::arg("grid"),
        py::arg("config"));

  // eger
  m.def("build_eger", &build_eger, py::arg("stream"), py::arg("target"), py::arg("n_bins"));
  m.def("voxel_grid", &voxel_grid, py::arg("stream"), py::arg("n_bins"));
  m.def("bin_index", &bin_index, py::arg("t"), py::arg("span"), py::arg("n_bins"));

  // metrics
  m.def(
      "psnr",
      [](const DoubleArray& a, const DoubleArray& b) {
        return psnr(image_from_array(a), image_from_array(b));
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "ssim",
      [](const DoubleArray& a, const DoubleArray& b) {
        return ssim(image_from_array(a), image_from_array(b));
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "to_gray",
      [](const DoubleArray& img) { return array_from_image(to_gray(image_from_array(img))); },
      py::arg("image"));
  m.def("latent_indices", &latent_indices, py::arg("frames_per_blur"), py::arg("count") = 7);

  // consistency
  m.def("make_edi_operator",
        [](const EdiConfig& cfg) { return OperatorHandle{make_edi_operator(cfg)}; });
  m.def(
      "ratio_of",
      [](const OperatorHandle& op, const TimeInterval& target, const BlurryFrame& blur,
         const EventStream& stream) {
        return array_from_image(ratio_of(op.fn, target, blur, stream));
      },
      py::arg("op"), py::arg("target"), py::arg("blur"), py::arg("stream"));
  m.def(
      "loss_bc",
      [](const OperatorHandle& op, const TrainingPair& pair) { return loss_bc(op.fn, pair); },
      py::arg("op"), py::arg("pair"));
  m.def(
      "loss_sc",
      [](const OperatorHandle& op, const TrainingPair& pair) { return loss_sc(op.fn, pair); },
      py::arg("op"), py::arg("pair"));
  m.def(
      "loss_tg",
      [](const OperatorHandle& teacher, const OperatorHandle& student,
         const TrainingPair& pair) { return loss_tg(teacher.fn, student.fn, pair); },
      py::arg("teacher"), py::arg("student"), py::arg("pair"));
  m.def(
      "loss_sg",
      [](const OperatorHandle& teacher, const OperatorHandle& student,
         const TrainingPair& pair, int factor) {
        return loss_sg(teacher.fn, student.fn, pair, factor);
      },
      py::arg("teacher"), py::arg("student"), py::arg("pair"), py::arg("factor"));
  m.def(
      "total_loss",
      [](const OperatorHandle& op, const OperatorHandle& teacher,
         const std::vector<TrainingPair>& batch, const LossWeights& weights, int sg_factor) {
        return total_loss(op.fn, teacher.fn, batch, weights, sg_factor);
      },
      py::arg("op"), py::arg("teacher"), py::arg("batch"), py::arg("weights"),
      py::arg("sg_factor") = 1);
  m.def("scale_sets", [](const std::vector<double>& base, int m_scale, double r_bar) {
    const ScaleSets s = scale_sets(base, m_scale, r_bar);
    return py::make_tuple(s.exposures, s.r_min, s.r_max);
  });

  // io
  m.def("write_events", &write_events, py::arg("path"), py::arg("stream"));
  m.def("read_events", &read_events, py::arg("path"));
  m.def(
      "read_pnm",
      [](const std::filesystem::path& p) { return array_from_image(read_pnm(p)); },
      py::arg("path"));
  m.def(
      "write_pnm",
      [](const std::filesystem::path& p, const DoubleArray& img) {
        write_pnm(p, image_from_array(img));
      },
      py::arg("path"), py::arg("image"));
  m.def("read_video_dir", &read_video_dir, py::arg("dir"));
  m.def("write_video_dir", &write_video_dir, py::arg("dir"), py::arg("video"));
  m.def("write_eger", &write_eger, py::arg("path"), py::arg("tensor"));
  m.def("read_eger", &read_eger, py::arg("path"));

  // dataset
  m.def(
      "generate_dataset",
      [](const SharpVideo& video, const DatasetRecipe& recipe,
         const std::filesystem::path& root) {
        std::vector<std::string> ids;
        for (const SampleManifest& sm : generate(video, recipe, root)) ids.push_back(sm.id);
        return ids;
      },
      py::arg("video"), py::arg("recipe"), py::arg("root"));
  m.def(
      "load_sample",
      [](const std::filesystem::path& manifest, const std::string& id, bool lr) {
        LoadedSample s = load_sample(manifest, id, lr);
        py::list gt;
        for (const Image& img : s.gt) gt.append(array_from_image(img));
        return py::make_tuple(s.pair, gt, s.gt_times);
      },
      py::arg("manifest"), py::arg("id") = std::string(), py::arg("lr_frames") = false);
}

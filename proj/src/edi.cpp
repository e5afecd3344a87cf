#include "evdeblur/edi.hpp"

#include <algorithm>
#include <cmath>

namespace evd {

namespace {

constexpr double kValueFloor = 1e-300;  // keeps map values strictly positive

void check_cfg(const EdiConfig& cfg) {
  if (cfg.c <= 0.0 || cfg.n_samples < 1 || cfg.ratio_floor <= 0.0) {
    throw Error(Errc::bad_argument, "EdiConfig requires c > 0, n_samples >= 1, ratio_floor > 0");
  }
}

// Frame/event resolution ratio; both axes must agree and be >= 1.
double resolution_ratio(const Image& frame, const EventStream& stream) {
  const double rx = static_cast<double>(frame.width) / stream.width;
  const double ry = static_cast<double>(frame.height) / stream.height;
  if (std::abs(rx - ry) > 1e-9 * std::max(rx, ry) || rx < 1.0 - 1e-12) {
    throw Error(Errc::aspect_mismatch, "frame/event dims must share one ratio >= 1");
  }
  return rx;
}

IntegralMap fit_to_frame(IntegralMap map, const Image& frame) {
  if (map.width == frame.width && map.height == frame.height) return map;
  return upsample_integral_map(map, frame.width, frame.height);
}

Image divide_by_map(const Image& img, const IntegralMap& map, double floor) {
  Image out(img.width, img.height, img.channels);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const double d = std::max(map.at(y, x), floor);
      for (int c = 0; c < img.channels; ++c) out.at(y, x, c) = img.at(y, x, c) / d;
    }
  }
  return out;
}

}  // namespace

IntegralMap compute_integral_map(const EventStream& stream, double t,
                                 const TimeInterval& interval, const EdiConfig& cfg) {
  check_cfg(cfg);
  if (!stream.span.contains(t)) {
    throw Error(Errc::anchor_out_of_span, "anchor outside stream span");
  }
  if (!stream.span.contains(interval)) {
    throw Error(Errc::interval_out_of_span, "integral interval outside stream span");
  }

  const std::size_t npix = static_cast<std::size_t>(stream.width) * stream.height;
  IntegralMap map;
  map.width = stream.width;
  map.height = stream.height;
  map.t = t;
  map.interval = interval;
  map.values.assign(npix, 1.0);
  if (interval.degenerate() || stream.empty()) return map;  // exp(0) = 1

  // S(t, f) = C(f) - C(t) with C(x) the per-pixel signed count of events at
  // timestamps <= x; the difference covers anchors on either side of f.
  std::vector<int> anchor_count(npix, 0);
  for (const Event& e : stream.events) {
    if (e.t > t) break;
    anchor_count[static_cast<std::size_t>(e.y) * stream.width + e.x] += e.p;
  }

  std::vector<int> count(npix, 0);
  std::vector<double> weight(npix);
  for (std::size_t i = 0; i < npix; ++i) weight[i] = std::exp(-cfg.c * anchor_count[i]);

  std::vector<double> acc(npix, 0.0);
  const double step = interval.length() / cfg.n_samples;
  std::size_t ev = 0;
  for (int j = 0; j < cfg.n_samples; ++j) {
    const double fj = interval.start + (j + 0.5) * step;
    while (ev < stream.events.size() && stream.events[ev].t <= fj) {
      const Event& e = stream.events[ev++];
      const std::size_t idx = static_cast<std::size_t>(e.y) * stream.width + e.x;
      count[idx] += e.p;
      weight[idx] = std::exp(cfg.c * (count[idx] - anchor_count[idx]));
    }
    for (std::size_t i = 0; i < npix; ++i) acc[i] += weight[i];
  }

  const double inv_n = 1.0 / cfg.n_samples;
  for (std::size_t i = 0; i < npix; ++i) {
    map.values[i] = std::max(acc[i] * inv_n, kValueFloor);
  }
  return map;
}

Image deblur(const BlurryFrame& blur, const EventStream& stream, double t,
             const EdiConfig& cfg) {
  if (stream.width != blur.image.width || stream.height != blur.image.height) {
    throw Error(Errc::resolution_mismatch,
                "stream and frame dims differ; use deblur_multiscale");
  }
  if (!blur.exposure.contains(t)) {
    throw Error(Errc::anchor_out_of_exposure, "anchor outside the exposure");
  }
  IntegralMap map = compute_integral_map(stream, t, blur.exposure, cfg);
  return divide_by_map(blur.image, map, cfg.ratio_floor);
}

IntegralMap upsample_integral_map(const IntegralMap& map, int target_width,
                                  int target_height) {
  if (target_width < map.width || target_height < map.height) {
    throw Error(Errc::downscale, "target dims smaller than source dims");
  }
  if (target_width == map.width && target_height == map.height) return map;

  IntegralMap out;
  out.width = target_width;
  out.height = target_height;
  out.t = map.t;
  out.interval = map.interval;
  out.values.resize(static_cast<std::size_t>(target_width) * target_height);

  const double sx = static_cast<double>(map.width) / target_width;
  const double sy = static_cast<double>(map.height) / target_height;
  for (int y = 0; y < target_height; ++y) {
    double src_y = (y + 0.5) * sy - 0.5;
    src_y = std::clamp(src_y, 0.0, static_cast<double>(map.height - 1));
    const int y0 = static_cast<int>(src_y);
    const int y1 = std::min(y0 + 1, map.height - 1);
    const double fy = src_y - y0;
    for (int x = 0; x < target_width; ++x) {
      double src_x = (x + 0.5) * sx - 0.5;
      src_x = std::clamp(src_x, 0.0, static_cast<double>(map.width - 1));
      const int x0 = static_cast<int>(src_x);
      const int x1 = std::min(x0 + 1, map.width - 1);
      const double fx = src_x - x0;
      // lerp form keeps constant maps exactly constant
      const double top = map.at(y0, x0) + fx * (map.at(y0, x1) - map.at(y0, x0));
      const double bot = map.at(y1, x0) + fx * (map.at(y1, x1) - map.at(y1, x0));
      out.values[static_cast<std::size_t>(y) * target_width + x] = top + fy * (bot - top);
    }
  }
  return out;
}

Image deblur_multiscale(const BlurryFrame& blur, const EventStream& stream,
                        double t, const EdiConfig& cfg) {
  resolution_ratio(blur.image, stream);
  if (!blur.exposure.contains(t)) {
    throw Error(Errc::anchor_out_of_exposure, "anchor outside the exposure");
  }
  IntegralMap map =
      fit_to_frame(compute_integral_map(stream, t, blur.exposure, cfg), blur.image);
  return divide_by_map(blur.image, map, cfg.ratio_floor);
}

BlurryFrame blur2blur(const BlurryFrame& blur, const EventStream& stream, double t,
                      const TimeInterval& target, const EdiConfig& cfg) {
  if (!blur.exposure.contains(target)) {
    throw Error(Errc::target_not_nested, "target interval not inside the exposure");
  }
  if (!target.contains(t)) {
    throw Error(Errc::anchor_out_of_target, "anchor outside the target interval");
  }
  if (target == blur.exposure) return blur;  // ratio is identically 1
  resolution_ratio(blur.image, stream);

  IntegralMap num = fit_to_frame(compute_integral_map(stream, t, target, cfg), blur.image);
  IntegralMap den =
      fit_to_frame(compute_integral_map(stream, t, blur.exposure, cfg), blur.image);

  // (B * num) / den keeps the degenerate-target case bitwise equal to deblur
  Image out(blur.image.width, blur.image.height, blur.image.channels);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      const double n = num.at(y, x);
      const double d = std::max(den.at(y, x), cfg.ratio_floor);
      for (int c = 0; c < out.channels; ++c) {
        out.at(y, x, c) = blur.image.at(y, x, c) * n / d;
      }
    }
  }
  return {std::move(out), target};
}

BlurryFrame reblur(const std::vector<Image>& latents, const TimeInterval& exposure) {
  if (latents.size() < 2) {
    throw Error(Errc::too_few_latents, "reblur needs at least 2 latent images");
  }
  Image acc(latents.front().width, latents.front().height, latents.front().channels, 0.0);
  for (const Image& l : latents) {
    if (!l.same_shape(acc)) throw Error(Errc::size_mismatch, "latent sizes differ");
    for (std::size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += l.data[i];
  }
  const double n = static_cast<double>(latents.size());
  for (double& v : acc.data) v /= n;
  return {std::move(acc), exposure};
}

CalibrationResult calibrate_threshold(const BlurryFrame& blur, const BlurryFrame& blur_ext,
                                      const EventStream& stream, double c_min, double c_max,
                                      int grid, const EdiConfig& cfg_template) {
  if (!(0.0 < c_min && c_min < c_max)) {
    throw Error(Errc::bad_argument, "need 0 < c_min < c_max");
  }
  if (grid < 3) throw Error(Errc::bad_argument, "grid must be >= 3");
  if (!blur_ext.exposure.contains(blur.exposure)) {
    throw Error(Errc::target_not_nested, "blur exposure must nest inside blur_ext exposure");
  }
  if (stream.empty()) return {c_min, true};

  const double anchor = blur.exposure.midpoint();
  auto residual = [&](double c) {
    EdiConfig cfg = cfg_template;
    cfg.c = c;
    BlurryFrame pred = blur2blur(blur_ext, stream, anchor, blur.exposure, cfg);
    return mean_abs_diff(pred.image, blur.image);
  };

  std::vector<double> cs(grid), rs(grid);
  for (int k = 0; k < grid; ++k) {
    cs[k] = c_min + k * (c_max - c_min) / (grid - 1);
    rs[k] = residual(cs[k]);
  }
  const auto best_it = std::min_element(rs.begin(), rs.end());
  const int best = static_cast<int>(best_it - rs.begin());
  const double spread = *std::max_element(rs.begin(), rs.end()) - *best_it;
  if (spread <= 1e-15) return {c_min, true};

  double lo = cs[std::max(0, best - 1)];
  double hi = cs[std::min(grid - 1, best + 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - inv_phi * (hi - lo);
  double b = lo + inv_phi * (hi - lo);
  double ra = residual(a);
  double rb = residual(b);
  while (hi - lo > 1e-3 * 0.5 * (hi + lo)) {
    if (ra < rb) {
      hi = b;
      b = a;
      rb = ra;
      a = hi - inv_phi * (hi - lo);
      ra = residual(a);
    } else {
      lo = a;
      a = b;
      ra = rb;
      b = lo + inv_phi * (hi - lo);
      rb = residual(b);
    }
  }
  return {0.5 * (lo + hi), false};
}

}  // namespace evd

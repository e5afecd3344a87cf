#include "evdeblur/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace evd {

namespace {

void check_video(const SharpVideo& video) {
  if (video.frames.size() < 2) {
    throw Error(Errc::degenerate_video, "need at least 2 frames");
  }
  if (video.timestamps.size() != video.frames.size()) {
    throw Error(Errc::size_mismatch, "timestamp count differs from frame count");
  }
  for (std::size_t i = 0; i < video.frames.size(); ++i) {
    const Image& f = video.frames[i];
    if (f.width != video.width || f.height != video.height) {
      throw Error(Errc::size_mismatch, "frame size differs across the video");
    }
    if (i > 0 && video.timestamps[i] <= video.timestamps[i - 1]) {
      throw Error(Errc::bad_argument, "timestamps must be strictly increasing");
    }
  }
}

std::vector<double> log_raster(const Image& frame, double eps) {
  Image lum = luminance(frame);
  std::vector<double> out(lum.data.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(lum.data[i] + eps);
  return out;
}

}  // namespace

EventStream simulate_events(const SharpVideo& video, const SimulatorConfig& cfg) {
  check_video(video);
  if (cfg.c <= 0.0 || cfg.eps <= 0.0) {
    throw Error(Errc::bad_argument, "threshold and eps must be positive");
  }

  const int w = video.width;
  const int h = video.height;
  const std::size_t npix = static_cast<std::size_t>(w) * h;

  std::vector<double> prev = log_raster(video.frames[0], cfg.eps);
  std::vector<double> ref = prev;  // per-pixel reference level

  EventStream stream;
  stream.width = w;
  stream.height = h;
  stream.span = {video.timestamps.front(), video.timestamps.back()};

  for (std::size_t k = 1; k < video.frames.size(); ++k) {
    std::vector<double> next = log_raster(video.frames[k], cfg.eps);
    const double t0 = video.timestamps[k - 1];
    const double t1 = video.timestamps[k];
    for (std::size_t i = 0; i < npix; ++i) {
      const double l0 = prev[i];
      const double l1 = next[i];
      if (l1 == l0) continue;
      const int x = static_cast<int>(i % w);
      const int y = static_cast<int>(i / w);
      // "reaches" is inclusive; the tolerance absorbs last-ulp rounding of
      // the interpolant so knife-edge crossings still fire
      const double edge = 1e-12 * std::max(1.0, std::abs(l1));
      if (l1 > l0) {
        for (double level = ref[i] + cfg.c; level <= l1 + edge; level += cfg.c) {
          const double tc =
              std::min(t1, t0 + (level - l0) / (l1 - l0) * (t1 - t0));
          stream.events.push_back({tc, x, y, +1});
          ref[i] = level;
        }
      } else {
        for (double level = ref[i] - cfg.c; level >= l1 - edge; level -= cfg.c) {
          const double tc =
              std::min(t1, t0 + (level - l0) / (l1 - l0) * (t1 - t0));
          stream.events.push_back({tc, x, y, -1});
          ref[i] = level;
        }
      }
    }
    prev = std::move(next);
  }

  std::sort(stream.events.begin(), stream.events.end(),
            [](const Event& a, const Event& b) {
              return std::tie(a.t, a.y, a.x, a.p) < std::tie(b.t, b.y, b.x, b.p);
            });
  return stream;
}

BlurryFrame synthesize_blur(const SharpVideo& video, const TimeInterval& interval) {
  check_video(video);
  const double tol = 1e-9;
  bool start_on_grid = false;
  bool end_on_grid = false;
  for (double ts : video.timestamps) {
    if (std::abs(ts - interval.start) <= tol) start_on_grid = true;
    if (std::abs(ts - interval.end) <= tol) end_on_grid = true;
  }
  if (!start_on_grid || !end_on_grid) {
    throw Error(Errc::interval_not_on_grid, "blur interval endpoints must be frame timestamps");
  }

  Image acc(video.width, video.height, video.frames.front().channels, 0.0);
  int count = 0;
  for (std::size_t k = 0; k < video.frames.size(); ++k) {
    const double ts = video.timestamps[k];
    if (ts >= interval.start - tol && ts <= interval.end + tol) {
      for (std::size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += video.frames[k].data[i];
      ++count;
    }
  }
  if (count < 2) {
    throw Error(Errc::too_few_frames, "blur interval must cover at least 2 frames");
  }
  for (double& v : acc.data) v /= count;
  return {std::move(acc), interval};
}

BlurryFrame extend_blur(const std::vector<BlurryFrame>& adjacent) {
  if (adjacent.size() < 2) {
    throw Error(Errc::too_few_frames, "extend_blur needs at least 2 frames");
  }
  const BlurryFrame& first = adjacent.front();
  const double len = first.exposure.length();
  if (len <= 0.0) {
    throw Error(Errc::non_contiguous_exposures, "exposures must be non-degenerate");
  }
  const double len_tol = 1e-6 * len;
  for (std::size_t i = 0; i < adjacent.size(); ++i) {
    if (!adjacent[i].image.same_shape(first.image)) {
      throw Error(Errc::size_mismatch, "extend_blur frames differ in size");
    }
    if (std::abs(adjacent[i].exposure.length() - len) > len_tol) {
      throw Error(Errc::non_contiguous_exposures, "exposure lengths differ");
    }
    if (i > 0) {
      // a one-frame-step gap must pass even for the shortest legal window
      // (3 frames, where the step is half the exposure length)
      const double gap = adjacent[i].exposure.start - adjacent[i - 1].exposure.end;
      if (gap < -len_tol || gap > 0.5 * len + len_tol) {
        throw Error(Errc::non_contiguous_exposures, "exposures are not adjacent in time");
      }
    }
  }

  Image acc(first.image.width, first.image.height, first.image.channels, 0.0);
  for (const BlurryFrame& b : adjacent) {
    for (std::size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += b.image.data[i];
  }
  const double m = static_cast<double>(adjacent.size());
  for (double& v : acc.data) v /= m;
  return {std::move(acc), {first.exposure.start, adjacent.back().exposure.end}};
}

Image downsample(const Image& img, int factor) {
  if (factor < 1) throw Error(Errc::bad_argument, "factor must be >= 1");
  if (factor == 1) return img;
  if (img.width % factor != 0 || img.height % factor != 0) {
    throw Error(Errc::not_divisible, "image dims not divisible by factor");
  }
  Image out(img.width / factor, img.height / factor, img.channels, 0.0);
  const double norm = 1.0 / (static_cast<double>(factor) * factor);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      for (int c = 0; c < img.channels; ++c) {
        out.at(y / factor, x / factor, c) += img.at(y, x, c) * norm;
      }
    }
  }
  return out;
}

}  // namespace evd

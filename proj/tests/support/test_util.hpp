#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "evdeblur/core.hpp"
#include "evdeblur/simulator.hpp"

namespace evd::testutil {

inline EventStream stream_of(std::vector<Event> events, int w, int h, TimeInterval span) {
  EventStream s;
  s.events = std::move(events);
  s.width = w;
  s.height = h;
  s.span = span;
  return s;
}

// Video on a single pixel stepping through the given intensities at the
// given timestamps.
inline SharpVideo single_pixel_video(const std::vector<double>& values,
                                     const std::vector<double>& times) {
  SharpVideo v;
  v.width = 1;
  v.height = 1;
  for (double val : values) {
    Image f(1, 1, 1);
    f.at(0, 0) = val;
    v.frames.push_back(f);
  }
  v.timestamps = times;
  return v;
}

// Uniformly random stream, time-sorted, on a fixed sensor.
inline EventStream random_stream(std::mt19937& rng, int w, int h, int count,
                                 TimeInterval span = {0.0, 1.0}) {
  std::uniform_real_distribution<double> ut(span.start, span.end);
  std::uniform_int_distribution<int> ux(0, w - 1);
  std::uniform_int_distribution<int> uy(0, h - 1);
  std::bernoulli_distribution up(0.5);
  std::vector<double> times(count);
  for (double& t : times) t = ut(rng);
  std::sort(times.begin(), times.end());
  EventStream s;
  s.width = w;
  s.height = h;
  s.span = span;
  for (int i = 0; i < count; ++i) {
    s.events.push_back({times[i], ux(rng), uy(rng), up(rng) ? 1 : -1});
  }
  return s;
}

// Replays a stream per pixel against the video's log luminance: the
// reference level walks by p*c per event; returns the largest |L - ref|
// over all pixels and frame timestamps.
inline double max_replay_residual(const SharpVideo& video, const EventStream& stream,
                                  double c, double eps) {
  const std::size_t npix = static_cast<std::size_t>(video.width) * video.height;
  std::vector<double> ref(npix);
  const Image first = luminance(video.frames.front());
  for (std::size_t i = 0; i < npix; ++i) ref[i] = std::log(first.data[i] + eps);

  double worst = 0.0;
  std::size_t ev = 0;
  for (std::size_t k = 0; k < video.frames.size(); ++k) {
    const double tk = video.timestamps[k];
    while (ev < stream.events.size() && stream.events[ev].t <= tk) {
      const Event& e = stream.events[ev++];
      ref[static_cast<std::size_t>(e.y) * video.width + e.x] += e.p * c;
    }
    const Image lum = luminance(video.frames[k]);
    for (std::size_t i = 0; i < npix; ++i) {
      worst = std::max(worst, std::abs(std::log(lum.data[i] + eps) - ref[i]));
    }
  }
  return worst;
}

// Largest log-luminance change between adjacent outer-integral midpoint
// sample times, evaluated from the latent frames by linear interpolation of
// the log raster. This is the discretization slack of the round-trip bound.
inline double log_variation_between_samples(const SharpVideo& video, TimeInterval exposure,
                                            int n_samples, double eps) {
  const std::size_t npix = static_cast<std::size_t>(video.width) * video.height;
  auto log_at = [&](double t, std::vector<double>& out) {
    std::size_t k = 1;
    while (k + 1 < video.timestamps.size() && video.timestamps[k] < t) ++k;
    const double t0 = video.timestamps[k - 1];
    const double t1 = video.timestamps[k];
    const double a = t1 == t0 ? 0.0 : (t - t0) / (t1 - t0);
    const Image l0 = luminance(video.frames[k - 1]);
    const Image l1 = luminance(video.frames[k]);
    out.resize(npix);
    for (std::size_t i = 0; i < npix; ++i) {
      const double g0 = std::log(l0.data[i] + eps);
      const double g1 = std::log(l1.data[i] + eps);
      out[i] = g0 + a * (g1 - g0);
    }
  };
  double worst = 0.0;
  std::vector<double> prev, cur;
  for (int j = 0; j < n_samples; ++j) {
    const double fj = exposure.start + (j + 0.5) * exposure.length() / n_samples;
    log_at(fj, cur);
    if (j > 0) {
      for (std::size_t i = 0; i < prev.size(); ++i) {
        worst = std::max(worst, std::abs(cur[i] - prev[i]));
      }
    }
    std::swap(prev, cur);
  }
  return worst;
}

}  // namespace evd::testutil

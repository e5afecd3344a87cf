#include "evdeblur/synthetic.hpp"

#include <cmath>

namespace evd {

SharpVideo make_scene(const SceneSpec& spec) {
  constexpr double kTau = 6.283185307179586;
  SharpVideo video;
  video.width = spec.width;
  video.height = spec.height;
  video.frames.reserve(spec.frames);
  video.timestamps.reserve(spec.frames);

  for (int k = 0; k < spec.frames; ++k) {
    const double t = spec.duration * k / (spec.frames - 1);
    const double shift = spec.shift_frac * spec.width * t / spec.duration;
    Image frame(spec.width, spec.height, spec.channels);
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        const double u = (x - shift) / spec.width;
        const double v = (y - 0.6 * shift) / spec.height;
        const double base = 0.5 + 0.18 * std::sin(kTau * 3.0 * u) * std::cos(kTau * 2.0 * v) +
                            0.12 * std::sin(kTau * (u + 2.0 * v));
        for (int c = 0; c < spec.channels; ++c) {
          // mild per-channel gain keeps color frames inside (0, 1)
          frame.at(y, x, c) = base * (1.0 - 0.06 * c);
        }
      }
    }
    video.frames.push_back(std::move(frame));
    video.timestamps.push_back(t);
  }
  return video;
}

}  // namespace evd

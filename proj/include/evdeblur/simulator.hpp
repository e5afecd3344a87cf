#pragma once

#include <cstdint>
#include <vector>

#include "evdeblur/core.hpp"

namespace evd {

// Sharp latent sequence, assumed sampled at a sufficiently high frame rate.
// Event generation uses the luminance channel when frames are color.
struct SharpVideo {
  std::vector<Image> frames;
  std::vector<double> timestamps;  // strictly increasing, one per frame
  int width = 0;
  int height = 0;
};

struct SimulatorConfig {
  double c = 0.2;     // contrast threshold, log-intensity units
  double eps = 0.01;  // log-domain floor: L = ln(I + eps)
  std::uint64_t seed = 0;  // reserved for dataset-pipeline randomness
};

// Ideal threshold-crossing simulation. Per pixel the log intensity
// L(t) = ln(I(t) + eps) is linearly interpolated between frames; every time
// the interpolant reaches the reference level +/- c (inclusive) an event is
// emitted at the exact crossing time and the reference advances by p*c.
// The merged stream is sorted by (t, y, x, p) and spans [t0, t_last].
// After the walk, |L - L_ref| < c holds at every frame timestamp.
EventStream simulate_events(const SharpVideo& video, const SimulatorConfig& cfg);

// Linear-intensity mean of all frames with timestamps in the closed
// interval; endpoints must coincide with frame timestamps.
BlurryFrame synthesize_blur(const SharpVideo& video, const TimeInterval& interval);

// Pixelwise mean of M adjacent equal-length blurry frames; the exposure
// becomes the union of the inputs. Consecutive exposures may touch exactly
// or be separated by the source video's inter-frame gap (at most half the
// exposure length, the one-frame step of a 3-frame window).
BlurryFrame extend_blur(const std::vector<BlurryFrame>& adjacent);

// Non-overlapping factor x factor box average; dims must divide evenly.
Image downsample(const Image& img, int factor);

}  // namespace evd

#pragma once

#include <vector>

#include "evdeblur/core.hpp"

namespace evd {

struct EdiConfig {
  double c = 0.2;            // contrast threshold, log units
  double eps = 0.01;         // log floor, must match the event source
  int n_samples = 49;        // outer-integral midpoint samples
  double ratio_floor = 1e-6; // lower clamp for divisions
};

// Per-pixel exposure-averaged exponential of signed event counts relative
// to the anchor time t. Equals 1 everywhere for a degenerate interval or an
// empty stream.
struct IntegralMap {
  std::vector<double> values;  // height*width row-major, all > 0
  int width = 0;
  int height = 0;
  double t = 0.0;  // anchor
  TimeInterval interval;

  double at(int y, int x) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
};

// Midpoint-rule discretization with sample times
//   f_j = start + (j + 0.5) * (end - start) / n_samples,
// averaging exp(c * S(t, f_j)) per pixel, where S(t, f) is the signed event
// count between the anchor and f (negative when f precedes t).
IntegralMap compute_integral_map(const EventStream& stream, double t,
                                 const TimeInterval& interval, const EdiConfig& cfg);

// Latent image I(t) = B / E(t, exposure), elementwise; a single-channel map
// divides every color channel. Values are not clamped here, only at save
// time. Requires stream and frame at the same resolution.
Image deblur(const BlurryFrame& blur, const EventStream& stream, double t,
             const EdiConfig& cfg);

// Bilinear upsampling with half-pixel centers and edge clamping.
// Target dims must not be smaller than the source dims.
IntegralMap upsample_integral_map(const IntegralMap& map, int target_width,
                                  int target_height);

// Deblur an HR frame against LR events: the integral map is computed at
// event resolution, upsampled to frame resolution, then divided out. The
// frame/event resolution ratio R must be >= 1 and equal on both axes; R = 1
// reduces exactly to deblur.
Image deblur_multiscale(const BlurryFrame& blur, const EventStream& stream,
                        double t, const EdiConfig& cfg);

// Convert a blurry frame to a nested target exposure:
//   B_target = [E^(t, target) / E^(t, exposure)] * B.
// target == exposure returns the input image unchanged; a degenerate target
// degenerates to the deblur output.
BlurryFrame blur2blur(const BlurryFrame& blur, const EventStream& stream,
                      double t, const TimeInterval& target, const EdiConfig& cfg);

// Pixelwise mean of latent images, stamped with the given exposure.
BlurryFrame reblur(const std::vector<Image>& latents, const TimeInterval& exposure);

struct CalibrationResult {
  double c = 0.0;
  bool flat_residual = false;  // set when the residual does not depend on c
};

// Recover the unknown threshold from a pair of observations at two blur
// scales. Reblurring EDI latents back over their own exposure reproduces B
// identically for every candidate c (the blur factors out of the exp-count
// algebra), so a single frame carries no threshold information; the
// brightness-consistency residual
//   r(c) = mean |B - blur2blur(B_ext -> B.exposure, threshold c)|
// against an adjacent extended blur does. r is scanned on a uniform grid in
// [c_min, c_max] and the best grid point refined with one golden-section
// pass to 1e-3 relative precision. An empty stream leaves r flat in c; the
// result then carries c_min and the flat_residual flag.
CalibrationResult calibrate_threshold(const BlurryFrame& blur, const BlurryFrame& blur_ext,
                                      const EventStream& stream, double c_min, double c_max,
                                      int grid, const EdiConfig& cfg_template);

}  // namespace evd

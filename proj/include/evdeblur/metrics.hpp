#pragma once

#include <string>
#include <vector>

#include "evdeblur/core.hpp"

namespace evd {

// PSNR is capped here for identical images instead of going infinite.
inline constexpr double kPsnrCapDb = 100.0;

// 10*log10(1 / MSE) on the [0,1] scale, MSE averaged over all samples.
double psnr(const Image& a, const Image& b);

// Single-scale SSIM, 11x11 Gaussian window sigma=1.5, K1=0.01, K2=0.03,
// data range 1.0, averaged over valid (fully covered) window positions;
// color images average the per-channel scores. Dims must be >= 11.
double ssim(const Image& a, const Image& b);

// BT.601 gray conversion; single-channel input passes through.
Image to_gray(const Image& img);

struct FrameQuality {
  double psnr_color = 0.0;
  double ssim_color = 0.0;
  double psnr_gray = 0.0;
  double ssim_gray = 0.0;
};

struct QualityReport {
  double psnr_color = 0.0;
  double ssim_color = 0.0;
  double psnr_gray = 0.0;
  double ssim_gray = 0.0;
  std::vector<FrameQuality> per_frame;
};

// Per-frame PSNR/SSIM in color and gray plus their means over the sequence.
QualityReport eval_sequence(const std::vector<Image>& restored,
                            const std::vector<Image>& truth);

// Evenly spaced latent indices including both endpoints, e.g. 7 latents of
// a 49-frame window sit at {0, 8, 16, 24, 32, 40, 48}.
std::vector<int> latent_indices(int frames_per_blur, int count = 7);

struct ReportRow {
  std::string label;  // method / scale
  QualityReport report;
};

// Plain-text table with color and gray PSNR/SSIM columns per row, and the
// matching comma-separated form. Empty input yields the header only.
std::string format_quality_table(const std::vector<ReportRow>& rows);
std::string format_quality_csv(const std::vector<ReportRow>& rows);

}  // namespace evd

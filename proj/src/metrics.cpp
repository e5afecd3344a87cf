#include "evdeblur/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace evd {

namespace {

constexpr int kWindow = 11;
constexpr double kSigma = 1.5;
constexpr double kK1 = 0.01;
constexpr double kK2 = 0.03;

std::vector<double> gaussian_kernel() {
  std::vector<double> k(kWindow);
  const int half = kWindow / 2;
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - half;
    k[i] = std::exp(-d * d / (2.0 * kSigma * kSigma));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

// Separable valid-mode Gaussian filter of a single-channel plane.
std::vector<double> gauss_valid(const std::vector<double>& src, int w, int h,
                                const std::vector<double>& kernel, int& out_w, int& out_h) {
  const int half = kWindow / 2;
  out_w = w - 2 * half;
  out_h = h - 2 * half;
  std::vector<double> tmp(static_cast<std::size_t>(out_w) * h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kWindow; ++i) acc += kernel[i] * src[static_cast<std::size_t>(y) * w + x + i];
      tmp[static_cast<std::size_t>(y) * out_w + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(out_w) * out_h, 0.0);
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < kWindow; ++i) acc += kernel[i] * tmp[static_cast<std::size_t>(y + i) * out_w + x];
      out[static_cast<std::size_t>(y) * out_w + x] = acc;
    }
  }
  return out;
}

double ssim_plane(const std::vector<double>& a, const std::vector<double>& b, int w, int h) {
  static const std::vector<double> kernel = gaussian_kernel();
  const std::size_t n = a.size();
  std::vector<double> aa(n), bb(n), ab(n);
  for (std::size_t i = 0; i < n; ++i) {
    aa[i] = a[i] * a[i];
    bb[i] = b[i] * b[i];
    ab[i] = a[i] * b[i];
  }
  int vw = 0, vh = 0;
  const std::vector<double> mu_a = gauss_valid(a, w, h, kernel, vw, vh);
  const std::vector<double> mu_b = gauss_valid(b, w, h, kernel, vw, vh);
  const std::vector<double> e_aa = gauss_valid(aa, w, h, kernel, vw, vh);
  const std::vector<double> e_bb = gauss_valid(bb, w, h, kernel, vw, vh);
  const std::vector<double> e_ab = gauss_valid(ab, w, h, kernel, vw, vh);

  const double c1 = kK1 * kK1;  // data range 1.0
  const double c2 = kK2 * kK2;
  double acc = 0.0;
  for (std::size_t i = 0; i < mu_a.size(); ++i) {
    const double var_a = e_aa[i] - mu_a[i] * mu_a[i];
    const double var_b = e_bb[i] - mu_b[i] * mu_b[i];
    const double cov = e_ab[i] - mu_a[i] * mu_b[i];
    const double num = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
    const double den = (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (var_a + var_b + c2);
    acc += num / den;
  }
  return acc / static_cast<double>(mu_a.size());
}

}  // namespace

double psnr(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw Error(Errc::size_mismatch, "psnr over different shapes");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.data.size());
  if (mse == 0.0) return kPsnrCapDb;
  return std::min(kPsnrCapDb, 10.0 * std::log10(1.0 / mse));
}

double ssim(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw Error(Errc::size_mismatch, "ssim over different shapes");
  if (a.width < kWindow || a.height < kWindow) {
    throw Error(Errc::too_small, "ssim needs dims >= 11");
  }
  const std::size_t plane = static_cast<std::size_t>(a.width) * a.height;
  std::vector<double> pa(plane), pb(plane);
  double acc = 0.0;
  for (int c = 0; c < a.channels; ++c) {
    for (std::size_t i = 0; i < plane; ++i) {
      pa[i] = a.data[i * a.channels + c];
      pb[i] = b.data[i * b.channels + c];
    }
    acc += ssim_plane(pa, pb, a.width, a.height);
  }
  return acc / a.channels;
}

Image to_gray(const Image& img) { return luminance(img); }

QualityReport eval_sequence(const std::vector<Image>& restored,
                            const std::vector<Image>& truth) {
  if (restored.size() != truth.size()) {
    throw Error(Errc::length_mismatch, "restored and truth sequence lengths differ");
  }
  if (restored.empty()) throw Error(Errc::length_mismatch, "empty sequences");

  QualityReport report;
  for (std::size_t i = 0; i < restored.size(); ++i) {
    FrameQuality q;
    q.psnr_color = psnr(restored[i], truth[i]);
    q.ssim_color = ssim(restored[i], truth[i]);
    const Image rg = to_gray(restored[i]);
    const Image tg = to_gray(truth[i]);
    q.psnr_gray = psnr(rg, tg);
    q.ssim_gray = ssim(rg, tg);
    report.per_frame.push_back(q);
    report.psnr_color += q.psnr_color;
    report.ssim_color += q.ssim_color;
    report.psnr_gray += q.psnr_gray;
    report.ssim_gray += q.ssim_gray;
  }
  const double n = static_cast<double>(restored.size());
  report.psnr_color /= n;
  report.ssim_color /= n;
  report.psnr_gray /= n;
  report.ssim_gray /= n;
  return report;
}

std::string format_quality_table(const std::vector<ReportRow>& rows) {
  char line[160];
  std::string out;
  std::snprintf(line, sizeof(line), "%-24s %12s %12s %12s %12s\n", "method/scale",
                "PSNR(color)", "SSIM(color)", "PSNR(gray)", "SSIM(gray)");
  out += line;
  for (const ReportRow& row : rows) {
    std::snprintf(line, sizeof(line), "%-24s %12.4f %12.4f %12.4f %12.4f\n",
                  row.label.c_str(), row.report.psnr_color, row.report.ssim_color,
                  row.report.psnr_gray, row.report.ssim_gray);
    out += line;
  }
  return out;
}

std::string format_quality_csv(const std::vector<ReportRow>& rows) {
  std::string out = "method,psnr_color,ssim_color,psnr_gray,ssim_gray\n";
  char line[160];
  for (const ReportRow& row : rows) {
    std::snprintf(line, sizeof(line), "%s,%.6f,%.6f,%.6f,%.6f\n", row.label.c_str(),
                  row.report.psnr_color, row.report.ssim_color, row.report.psnr_gray,
                  row.report.ssim_gray);
    out += line;
  }
  return out;
}

std::vector<int> latent_indices(int frames_per_blur, int count) {
  if (frames_per_blur < 1 || count < 1) {
    throw Error(Errc::bad_argument, "frames_per_blur and count must be positive");
  }
  count = std::min(count, frames_per_blur);
  std::vector<int> indices;
  indices.reserve(count);
  if (count == 1) {
    indices.push_back(frames_per_blur / 2);
    return indices;
  }
  for (int k = 0; k < count; ++k) {
    const double pos = static_cast<double>(k) * (frames_per_blur - 1) / (count - 1);
    indices.push_back(static_cast<int>(std::lround(pos)));
  }
  return indices;
}

}  // namespace evd

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "evdeblur/metrics.hpp"

using namespace evd;

namespace {

Image constant_image(int w, int h, double v, int c = 1) { return Image(w, h, c, v); }

Image textured_image(int w, int h, unsigned seed = 1) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 0.9);
  Image img(w, h, 1);
  for (double& v : img.data) v = u(rng);
  return img;
}

}  // namespace

TEST_CASE("psnr") {
  SUBCASE("identical images hit the cap") {
    Image a = textured_image(16, 16);
    CHECK(psnr(a, a) == kPsnrCapDb);
  }
  SUBCASE("uniform half-step error") {
    Image a = constant_image(8, 8, 0.0);
    Image b = constant_image(8, 8, 0.5);
    CHECK(psnr(a, b) == doctest::Approx(10.0 * std::log10(4.0)).epsilon(1e-12));
  }
  SUBCASE("one differing pixel in a 10x10 image") {
    Image a = constant_image(10, 10, 0.0);
    Image b = a;
    b.at(3, 4) = 1.0;
    CHECK(psnr(a, b) == doctest::Approx(20.0).epsilon(1e-12));
  }
  SUBCASE("symmetry") {
    Image a = textured_image(12, 12, 2);
    Image b = textured_image(12, 12, 3);
    CHECK(psnr(a, b) == psnr(b, a));
  }
  SUBCASE("monotone in noise amplitude") {
    Image a = textured_image(16, 16, 4);
    double prev = kPsnrCapDb + 1.0;
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> noise(a.data.size());
    for (double& v : noise) v = u(rng);
    for (double amp : {0.01, 0.05, 0.2}) {
      Image b = a;
      for (std::size_t i = 0; i < b.data.size(); ++i) b.data[i] += amp * noise[i];
      const double value = psnr(a, b);
      CHECK(value < prev);
      prev = value;
    }
  }
  SUBCASE("shape mismatch rejected") {
    CHECK_THROWS_AS(psnr(constant_image(4, 4, 0.0), constant_image(4, 5, 0.0)), Error);
  }
}

TEST_CASE("ssim") {
  SUBCASE("identical images score exactly one") {
    Image a = textured_image(24, 18, 5);
    CHECK(ssim(a, a) == 1.0);
  }
  SUBCASE("constant images follow the closed-form luminance term") {
    Image a = constant_image(16, 16, 0.3);
    Image b = constant_image(16, 16, 0.7);
    const double c1 = 0.01 * 0.01;
    const double expected = (2.0 * 0.3 * 0.7 + c1) / (0.3 * 0.3 + 0.7 * 0.7 + c1);
    CHECK(ssim(a, b) == doctest::Approx(expected).epsilon(1e-9));
  }
  SUBCASE("inverted image scores below one") {
    Image a = textured_image(20, 20, 6);
    Image inv = a;
    for (double& v : inv.data) v = 1.0 - v;
    CHECK(ssim(a, inv) < 1.0);
  }
  SUBCASE("symmetry") {
    Image a = textured_image(16, 16, 7);
    Image b = textured_image(16, 16, 8);
    CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-14));
  }
  SUBCASE("continuity near identity") {
    Image a = textured_image(24, 24, 9);
    Image b = a;
    for (double& v : b.data) v += 1e-4;
    CHECK(ssim(a, b) >= 0.999);
  }
  SUBCASE("images below the window size are rejected") {
    CHECK_THROWS_AS(ssim(constant_image(8, 8, 0.5), constant_image(8, 8, 0.5)), Error);
  }
}

TEST_CASE("to_gray") {
  SUBCASE("gray input passes through") {
    Image g = constant_image(4, 4, 0.42);
    CHECK(to_gray(g).data == g.data);
  }
  SUBCASE("white stays white: weights sum to one") {
    Image w(2, 2, 3, 1.0);
    for (double v : to_gray(w).data) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("pure red maps to its weight") {
    Image r(1, 1, 3);
    r.at(0, 0, 0) = 1.0;
    CHECK(to_gray(r).at(0, 0) == doctest::Approx(0.299).epsilon(1e-12));
  }
}

TEST_CASE("eval_sequence") {
  SUBCASE("perfect restoration caps every metric") {
    std::vector<Image> seq = {textured_image(16, 16, 10), textured_image(16, 16, 11)};
    QualityReport r = eval_sequence(seq, seq);
    CHECK(r.psnr_color == kPsnrCapDb);
    CHECK(r.ssim_color == 1.0);
    CHECK(r.psnr_gray == kPsnrCapDb);
    CHECK(r.ssim_gray == 1.0);
    CHECK(r.per_frame.size() == 2);
  }
  SUBCASE("single pair reduces to that pair's metrics") {
    Image a = textured_image(16, 16, 12);
    Image b = textured_image(16, 16, 13);
    QualityReport r = eval_sequence({a}, {b});
    CHECK(r.psnr_color == psnr(a, b));
    CHECK(r.ssim_color == ssim(a, b));
  }
  SUBCASE("length mismatch rejected") {
    Image a = textured_image(16, 16, 14);
    CHECK_THROWS_AS(eval_sequence({a}, {a, a}), Error);
  }
}

TEST_CASE("quality tables") {
  SUBCASE("empty results give the header only") {
    const std::string table = format_quality_table({});
    CHECK(table.find("method/scale") != std::string::npos);
    CHECK(std::count(table.begin(), table.end(), '\n') == 1);
    const std::string csv = format_quality_csv({});
    CHECK(csv == "method,psnr_color,ssim_color,psnr_gray,ssim_gray\n");
  }
  SUBCASE("one row per report") {
    QualityReport r;
    r.psnr_color = 24.12;
    r.ssim_color = 0.7898;
    r.psnr_gray = 24.63;
    r.ssim_gray = 0.8022;
    const std::string table = format_quality_table({{"edi_r4", r}});
    CHECK(table.find("edi_r4") != std::string::npos);
    CHECK(table.find("24.12") != std::string::npos);
    const std::string csv = format_quality_csv({{"edi_r4", r}});
    CHECK(csv.find("edi_r4,24.12") != std::string::npos);
  }
}

TEST_CASE("latent_indices spread evenly over the window") {
  CHECK(latent_indices(49) == std::vector<int>{0, 8, 16, 24, 32, 40, 48});
  CHECK(latent_indices(9, 3) == std::vector<int>{0, 4, 8});
  CHECK(latent_indices(5) == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(latent_indices(49, 1) == std::vector<int>{24});
}

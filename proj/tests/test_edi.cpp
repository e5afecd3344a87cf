#include <doctest.h>

#include <cmath>
#include <random>

#include "evdeblur/edi.hpp"
#include "evdeblur/simulator.hpp"
#include "evdeblur/synthetic.hpp"
#include "support/test_util.hpp"

using namespace evd;
using testutil::stream_of;

namespace {

// Single pixel, one positive event at t=0.5, threshold ln 2 -- the
// worked configuration whose maps are evaluated by hand.
EventStream one_event_stream() {
  return stream_of({{0.5, 0, 0, 1}}, 1, 1, {0.0, 1.0});
}

EdiConfig ln2_cfg(int n_samples = 2) {
  return {std::log(2.0), 0.01, n_samples, 1e-6};
}

}  // namespace

TEST_CASE("compute_integral_map") {
  SUBCASE("empty stream gives the all-ones map") {
    EventStream s = stream_of({}, 3, 2, {0.0, 1.0});
    IntegralMap m = compute_integral_map(s, 0.25, {0.0, 1.0}, ln2_cfg(8));
    for (double v : m.values) CHECK(v == 1.0);
  }
  SUBCASE("degenerate interval gives the all-ones map") {
    EventStream s = one_event_stream();
    IntegralMap m = compute_integral_map(s, 0.5, {0.5, 0.5}, ln2_cfg(8));
    CHECK(m.values[0] == 1.0);
  }
  SUBCASE("hand-evaluated single event, anchor at the start") {
    IntegralMap m = compute_integral_map(one_event_stream(), 0.0, {0.0, 1.0}, ln2_cfg());
    CHECK(m.values[0] == doctest::Approx(1.5).epsilon(1e-12));
  }
  SUBCASE("anchor and interval must lie inside the span") {
    EventStream s = one_event_stream();
    CHECK_THROWS_AS(compute_integral_map(s, 2.0, {0.0, 1.0}, ln2_cfg()), Error);
    CHECK_THROWS_AS(compute_integral_map(s, 0.5, {0.0, 2.0}, ln2_cfg()), Error);
  }
  SUBCASE("positive everywhere on random streams") {
    std::mt19937 rng(3);
    for (int rep = 0; rep < 10; ++rep) {
      EventStream s = testutil::random_stream(rng, 6, 4, 80);
      IntegralMap m = compute_integral_map(s, 0.3, {0.1, 0.9}, {0.4, 0.01, 7, 1e-6});
      for (double v : m.values) CHECK(v > 0.0);
    }
  }
}

TEST_CASE("deblur") {
  SUBCASE("empty stream returns the blurry frame unchanged") {
    EventStream s = stream_of({}, 2, 2, {0.0, 1.0});
    Image img(2, 2, 1, 0.42);
    Image out = deblur({img, {0.0, 1.0}}, s, 0.5, ln2_cfg(4));
    CHECK(out.data == img.data);
  }
  SUBCASE("hand-evaluated latents at both exposure ends") {
    Image img(1, 1, 1, 0.75);
    BlurryFrame blur{img, {0.0, 1.0}};
    EventStream s = one_event_stream();
    CHECK(deblur(blur, s, 0.0, ln2_cfg()).at(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(deblur(blur, s, 1.0, ln2_cfg()).at(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("resolution mismatch is rejected") {
    EventStream s = stream_of({}, 2, 2, {0.0, 1.0});
    Image img(4, 4, 1, 0.5);
    CHECK_THROWS_AS(deblur({img, {0.0, 1.0}}, s, 0.5, ln2_cfg()), Error);
  }
  SUBCASE("anchor outside the exposure is rejected") {
    EventStream s = stream_of({}, 1, 1, {0.0, 2.0});
    Image img(1, 1, 1, 0.5);
    CHECK_THROWS_AS(deblur({img, {0.0, 1.0}}, s, 1.5, ln2_cfg()), Error);
  }
  SUBCASE("one event map divides every color channel") {
    Image img(1, 1, 3);
    img.at(0, 0, 0) = 0.75;
    img.at(0, 0, 1) = 0.3;
    img.at(0, 0, 2) = 0.15;
    Image out = deblur({img, {0.0, 1.0}}, one_event_stream(), 0.0, ln2_cfg());
    CHECK(out.at(0, 0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(out.at(0, 0, 1) == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(out.at(0, 0, 2) == doctest::Approx(0.1).epsilon(1e-12));
  }
}

TEST_CASE("upsample_integral_map") {
  IntegralMap m;
  m.width = 2;
  m.height = 1;
  m.values = {1.0, 3.0};
  m.t = 0.0;
  m.interval = {0.0, 1.0};
  SUBCASE("same dims is the identity") {
    IntegralMap u = upsample_integral_map(m, 2, 1);
    CHECK(u.values == m.values);
  }
  SUBCASE("hand bilinear with half-pixel centers") {
    IntegralMap u = upsample_integral_map(m, 4, 1);
    REQUIRE(u.values.size() == 4);
    CHECK(u.values[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(u.values[1] == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(u.values[2] == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(u.values[3] == doctest::Approx(3.0).epsilon(1e-12));
  }
  SUBCASE("constants stay constant at any size") {
    IntegralMap c;
    c.width = 3;
    c.height = 2;
    c.values.assign(6, 1.37);
    IntegralMap u = upsample_integral_map(c, 7, 5);
    for (double v : u.values) CHECK(v == 1.37);
  }
  SUBCASE("downscaling is rejected") {
    CHECK_THROWS_AS(upsample_integral_map(m, 1, 1), Error);
  }
}

TEST_CASE("deblur_multiscale") {
  SUBCASE("R=1 is bitwise identical to deblur") {
    std::mt19937 rng(5);
    EventStream s = testutil::random_stream(rng, 8, 6, 50);
    Image img(8, 6, 1, 0.0);
    std::uniform_real_distribution<double> u(0.1, 0.9);
    for (double& v : img.data) v = u(rng);
    BlurryFrame blur{img, {0.2, 0.8}};
    const EdiConfig cfg{0.25, 0.01, 9, 1e-6};
    Image a = deblur(blur, s, 0.5, cfg);
    Image b = deblur_multiscale(blur, s, 0.5, cfg);
    CHECK(a.data == b.data);
  }
  SUBCASE("empty stream at R=4 returns the blur unchanged") {
    EventStream s = stream_of({}, 4, 2, {0.0, 1.0});
    Image img(16, 8, 1, 0.33);
    Image out = deblur_multiscale({img, {0.0, 1.0}}, s, 0.5, ln2_cfg(4));
    CHECK(out.data == img.data);
  }
  SUBCASE("mismatched axis ratios are rejected") {
    EventStream s = stream_of({}, 4, 4, {0.0, 1.0});
    Image img(16, 8, 1, 0.5);
    CHECK_THROWS_AS(deblur_multiscale({img, {0.0, 1.0}}, s, 0.5, ln2_cfg()), Error);
  }
}

TEST_CASE("blur2blur") {
  Image img(1, 1, 1, 0.6);
  BlurryFrame blur{img, {0.0, 1.0}};
  EventStream s = one_event_stream();
  SUBCASE("target equal to the exposure returns the input unchanged") {
    BlurryFrame out = blur2blur(blur, s, 0.5, {0.0, 1.0}, ln2_cfg());
    CHECK(out.image.data == img.data);
  }
  SUBCASE("degenerate target equals deblur_multiscale bitwise") {
    BlurryFrame out = blur2blur(blur, s, 0.25, {0.25, 0.25}, ln2_cfg());
    Image direct = deblur_multiscale(blur, s, 0.25, ln2_cfg());
    CHECK(out.image.data == direct.data);
  }
  SUBCASE("hand-evaluated ratio of the two maps") {
    // numerator map over [0, 0.5] is 1, denominator over [0, 1] is 1.5
    BlurryFrame out = blur2blur(blur, s, 0.0, {0.0, 0.5}, ln2_cfg());
    CHECK(out.image.at(0, 0) == doctest::Approx(0.6 * 2.0 / 3.0).epsilon(1e-12));
    CHECK(out.exposure == TimeInterval{0.0, 0.5});
  }
  SUBCASE("target must nest and contain the anchor") {
    CHECK_THROWS_AS(blur2blur(blur, s, 0.5, {0.0, 1.5}, ln2_cfg()), Error);
    CHECK_THROWS_AS(blur2blur(blur, s, 0.9, {0.0, 0.5}, ln2_cfg()), Error);
  }
}

TEST_CASE("reblur") {
  Image a(2, 1, 1, 0.0);
  Image b(2, 1, 1, 1.0);
  SUBCASE("mean of identical latents is that latent") {
    BlurryFrame out = reblur({b, b}, {0.0, 1.0});
    CHECK(out.image.at(0, 0) == 1.0);
  }
  SUBCASE("two-point mean") {
    BlurryFrame out = reblur({a, b}, {0.0, 1.0});
    CHECK(out.image.at(0, 1) == 0.5);
  }
  SUBCASE("fewer than two latents rejected") {
    CHECK_THROWS_AS(reblur({a}, {0.0, 1.0}), Error);
  }
}

TEST_CASE("round-trip bound holds on simulator-exact data") {
  SceneSpec spec;
  spec.width = 32;
  spec.height = 24;
  spec.frames = 99;
  spec.shift_frac = 0.4;
  SharpVideo video = make_scene(spec);
  const double c = 0.2, eps = 0.01;
  EventStream stream = simulate_events(video, {c, eps, 0});

  const int s_frames = 49;
  const TimeInterval window{video.timestamps[0], video.timestamps[s_frames - 1]};
  BlurryFrame blur = synthesize_blur(video, window);
  EdiConfig cfg{c, eps, s_frames, 1e-6};

  const int mid = s_frames / 2;
  const double t_mid = video.timestamps[mid];
  Image restored = deblur(blur, stream, t_mid, cfg);
  const Image truth = video.frames[mid];

  const double delta_disc =
      testutil::log_variation_between_samples(video, window, cfg.n_samples, eps);
  CHECK(delta_disc <= c);  // n_samples matches the latent count
  const double bound = 2.0 * c + delta_disc;
  double worst = 0.0;
  for (std::size_t i = 0; i < truth.data.size(); ++i) {
    worst = std::max(worst, std::abs(std::log(restored.data[i] + eps) -
                                     std::log(truth.data[i] + eps)));
  }
  CHECK(worst <= bound);
}

TEST_CASE("blur2blur reproduces the directly synthesized shorter blur") {
  SceneSpec spec;
  spec.width = 32;
  spec.height = 24;
  spec.frames = 98;
  spec.shift_frac = 0.4;
  SharpVideo video = make_scene(spec);
  const double c = 0.2, eps = 0.01;
  EventStream stream = simulate_events(video, {c, eps, 0});
  BlurryFrame b1 = synthesize_blur(video, {video.timestamps[0], video.timestamps[48]});
  BlurryFrame b2 = synthesize_blur(video, {video.timestamps[49], video.timestamps[97]});
  BlurryFrame ext = extend_blur({b1, b2});

  EdiConfig cfg{c, eps, 49, 1e-6};
  BlurryFrame back = blur2blur(ext, stream, b1.exposure.midpoint(), b1.exposure, cfg);
  const double bound = (std::exp(2.0 * c) - 1.0) * mean_value(ext.image);
  CHECK(mean_abs_diff(back.image, b1.image) <= bound);
}

TEST_CASE("anchor consistency: reblur transports of two anchors agree") {
  SceneSpec spec;
  spec.width = 24;
  spec.height = 16;
  spec.frames = 49;
  SharpVideo video = make_scene(spec);
  const double c = 0.2, eps = 0.01;
  EventStream stream = simulate_events(video, {c, eps, 0});
  const TimeInterval window{video.timestamps.front(), video.timestamps.back()};
  BlurryFrame blur = synthesize_blur(video, window);
  EdiConfig cfg{c, eps, 49, 1e-6};

  auto transported = [&](double t) {
    Image latent = deblur(blur, stream, t, cfg);
    IntegralMap map = compute_integral_map(stream, t, window, cfg);
    Image back(latent.width, latent.height, latent.channels);
    for (int y = 0; y < back.height; ++y) {
      for (int x = 0; x < back.width; ++x) {
        for (int ch = 0; ch < back.channels; ++ch) {
          back.at(y, x, ch) = latent.at(y, x, ch) * map.at(y, x);
        }
      }
    }
    return back;
  };
  const double delta_disc =
      testutil::log_variation_between_samples(video, window, cfg.n_samples, eps);
  const double rt = std::exp(2.0 * c + delta_disc) - 1.0;
  const double bound = 2.0 * rt * (mean_value(blur.image) + eps);
  CHECK(mean_abs_diff(transported(video.timestamps[10]), transported(video.timestamps[40])) <=
        bound);
}

TEST_CASE("calibrate_threshold") {
  SUBCASE("empty stream flags a flat residual") {
    EventStream s = stream_of({}, 2, 2, {0.0, 2.0});
    Image img(2, 2, 1, 0.4);
    BlurryFrame b{img, {0.0, 1.0}};
    BlurryFrame ext{img, {0.0, 2.0}};
    CalibrationResult r = calibrate_threshold(b, ext, s, 0.05, 0.5, 5, ln2_cfg(4));
    CHECK(r.flat_residual);
    CHECK(r.c == 0.05);
  }
  SUBCASE("recovers the simulated threshold within ten percent") {
    SceneSpec spec;
    spec.width = 48;
    spec.height = 48;
    spec.frames = 200;
    spec.shift_frac = 0.8;
    SharpVideo video = make_scene(spec);
    const double c_true = 0.2;
    EventStream stream = simulate_events(video, {c_true, 0.01, 0});
    BlurryFrame b1 = synthesize_blur(video, {video.timestamps[0], video.timestamps[48]});
    BlurryFrame b2 = synthesize_blur(video, {video.timestamps[49], video.timestamps[97]});
    BlurryFrame ext = extend_blur({b1, b2});
    EdiConfig cfg{0.1, 0.01, 49, 1e-6};
    CalibrationResult r = calibrate_threshold(b1, ext, stream, 0.05, 0.5, 20, cfg);
    CHECK(!r.flat_residual);
    CHECK(std::abs(r.c - c_true) <= 0.1 * c_true);

    SUBCASE("rescaling intensities leaves the argmin in place") {
      SharpVideo scaled = video;
      for (Image& f : scaled.frames) {
        for (double& v : f.data) v *= 0.5;
      }
      EventStream stream2 = simulate_events(scaled, {c_true, 0.005, 0});
      BlurryFrame s1 = synthesize_blur(scaled, {scaled.timestamps[0], scaled.timestamps[48]});
      BlurryFrame s2 = synthesize_blur(scaled, {scaled.timestamps[49], scaled.timestamps[97]});
      BlurryFrame sext = extend_blur({s1, s2});
      CalibrationResult r2 = calibrate_threshold(s1, sext, stream2, 0.05, 0.5, 20, cfg);
      CHECK(std::abs(r2.c - r.c) <= 1e-3);
    }
  }
  SUBCASE("bad bracket rejected") {
    EventStream s = one_event_stream();
    Image img(1, 1, 1, 0.5);
    BlurryFrame b{img, {0.0, 0.5}};
    BlurryFrame ext{img, {0.0, 1.0}};
    CHECK_THROWS_AS(calibrate_threshold(b, ext, s, 0.5, 0.1, 5, ln2_cfg()), Error);
    CHECK_THROWS_AS(calibrate_threshold(b, ext, s, 0.1, 0.5, 2, ln2_cfg()), Error);
  }
}

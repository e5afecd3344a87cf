#include "checks.hpp"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <vector>

#include "evdeblur/consistency.hpp"
#include "evdeblur/dataset.hpp"
#include "evdeblur/edi.hpp"
#include "evdeblur/eger.hpp"
#include "evdeblur/io.hpp"
#include "evdeblur/metrics.hpp"
#include "evdeblur/simulator.hpp"
#include "evdeblur/synthetic.hpp"

namespace evd::checks {

namespace {

namespace fs = std::filesystem;

struct Property {
  const char* name;
  std::function<bool(std::string&)> run;
};

EventStream random_stream(std::mt19937& rng, int w, int h, int count) {
  std::uniform_real_distribution<double> ut(0.0, 1.0);
  std::uniform_int_distribution<int> ux(0, w - 1);
  std::uniform_int_distribution<int> uy(0, h - 1);
  std::bernoulli_distribution up(0.5);
  std::vector<double> times(count);
  for (double& t : times) t = ut(rng);
  std::sort(times.begin(), times.end());
  EventStream s;
  s.width = w;
  s.height = h;
  s.span = {0.0, 1.0};
  for (int i = 0; i < count; ++i) s.events.push_back({times[i], ux(rng), uy(rng), up(rng) ? 1 : -1});
  return s;
}

double max_replay_residual(const SharpVideo& video, const EventStream& stream, double c,
                           double eps) {
  const std::size_t npix = static_cast<std::size_t>(video.width) * video.height;
  std::vector<double> ref(npix);
  const Image first = luminance(video.frames.front());
  for (std::size_t i = 0; i < npix; ++i) ref[i] = std::log(first.data[i] + eps);
  double worst = 0.0;
  std::size_t ev = 0;
  for (std::size_t k = 0; k < video.frames.size(); ++k) {
    while (ev < stream.events.size() && stream.events[ev].t <= video.timestamps[k]) {
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

double max_sample_log_step(const SharpVideo& video, TimeInterval exposure, int n_samples,
                           double eps) {
  const std::size_t npix = static_cast<std::size_t>(video.width) * video.height;
  auto log_at = [&](double t, std::vector<double>& out) {
    std::size_t k = 1;
    while (k + 1 < video.timestamps.size() && video.timestamps[k] < t) ++k;
    const double t0 = video.timestamps[k - 1], t1 = video.timestamps[k];
    const double a = t1 == t0 ? 0.0 : (t - t0) / (t1 - t0);
    const Image l0 = luminance(video.frames[k - 1]);
    const Image l1 = luminance(video.frames[k]);
    out.resize(npix);
    for (std::size_t i = 0; i < npix; ++i) {
      const double g0 = std::log(l0.data[i] + eps), g1 = std::log(l1.data[i] + eps);
      out[i] = g0 + a * (g1 - g0);
    }
  };
  double worst = 0.0;
  std::vector<double> prev, cur;
  for (int j = 0; j < n_samples; ++j) {
    log_at(exposure.start + (j + 0.5) * exposure.length() / n_samples, cur);
    if (j > 0) {
      for (std::size_t i = 0; i < prev.size(); ++i) {
        worst = std::max(worst, std::abs(cur[i] - prev[i]));
      }
    }
    std::swap(prev, cur);
  }
  return worst;
}

// Shared fixture: one smooth scene, its events, two adjacent 49-frame blur
// windows and the extended frame, all at threshold 0.2.
struct Fixture {
  SharpVideo video;
  EventStream stream;
  BlurryFrame b1, b2, ext;
  double c = 0.2;
  double eps = 0.01;

  Fixture() {
    SceneSpec spec;
    spec.width = 32;
    spec.height = 24;
    spec.frames = 98;
    spec.shift_frac = 0.45;
    video = make_scene(spec);
    stream = simulate_events(video, {c, eps, 0});
    b1 = synthesize_blur(video, {video.timestamps[0], video.timestamps[48]});
    b2 = synthesize_blur(video, {video.timestamps[49], video.timestamps[97]});
    ext = extend_blur({b1, b2});
  }

  EdiConfig cfg() const { return {c, eps, 49, 1e-6}; }
};

std::vector<Property> build_properties(const Fixture& fx) {
  std::vector<Property> props;

  props.push_back({"core.slice_idempotent", [&fx](std::string&) {
    EventStream once = slice(fx.stream, {0.2, 0.8});
    EventStream twice = slice(once, {0.2, 0.8});
    return once.events.size() == twice.events.size();
  }});

  props.push_back({"core.slice_preserves_events", [&fx](std::string& msg) {
    EventStream out = slice(fx.stream, {0.1, 0.9});
    std::size_t j = 0;
    for (const Event& e : fx.stream.events) {
      if (e.t < 0.1 || e.t > 0.9) continue;
      const Event& o = out.events[j++];
      if (o.t != e.t || o.x != e.x || o.y != e.y || o.p != e.p) {
        msg = "event fields changed";
        return false;
      }
    }
    return j == out.events.size();
  }});

  props.push_back({"core.signed_count_additive", [&fx](std::string& msg) {
    const double m = 0.437;
    auto whole = signed_count_map(fx.stream, {0.0, 1.0});
    auto left = signed_count_map(fx.stream, {0.0, m});
    auto right = signed_count_map(fx.stream, {std::nextafter(m, 2.0), 1.0});
    for (std::size_t i = 0; i < whole.size(); ++i) {
      if (whole[i] != left[i] + right[i]) {
        msg = "split counts differ";
        return false;
      }
    }
    return true;
  }});

  props.push_back({"simulator.residual_bound", [&fx](std::string& msg) {
    const double r = max_replay_residual(fx.video, fx.stream, fx.c, fx.eps);
    if (r >= fx.c) {
      msg = "replay residual " + std::to_string(r);
      return false;
    }
    return true;
  }});

  props.push_back({"simulator.scaling_invariance", [&fx](std::string& msg) {
    SharpVideo scaled = fx.video;
    for (Image& f : scaled.frames) {
      for (double& v : f.data) v *= 0.5;
    }
    EventStream b = simulate_events(scaled, {fx.c, 0.5 * fx.eps, 0});
    if (b.events.size() != fx.stream.events.size()) {
      msg = "event counts differ";
      return false;
    }
    return true;
  }});

  props.push_back({"simulator.extend_matches_union", [&fx](std::string&) {
    BlurryFrame whole =
        synthesize_blur(fx.video, {fx.b1.exposure.start, fx.b2.exposure.end});
    return mean_abs_diff(fx.ext.image, whole.image) <= 1e-12;
  }});

  props.push_back({"simulator.downsample_mean_commutes", [&fx](std::string&) {
    Image mean(fx.video.width, fx.video.height, 1, 0.0);
    const int n = 8;
    for (int k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < mean.data.size(); ++i) {
        mean.data[i] += fx.video.frames[k].data[i] / n;
      }
    }
    Image a = downsample(mean, 4);
    Image b(fx.video.width / 4, fx.video.height / 4, 1, 0.0);
    for (int k = 0; k < n; ++k) {
      const Image d = downsample(fx.video.frames[k], 4);
      for (std::size_t i = 0; i < b.data.size(); ++i) b.data[i] += d.data[i] / n;
    }
    return mean_abs_diff(a, b) <= 1e-12;
  }});

  props.push_back({"edi.integral_map_positive", [](std::string&) {
    std::mt19937 rng(77);
    for (int rep = 0; rep < 5; ++rep) {
      EventStream s = random_stream(rng, 6, 5, 120);
      IntegralMap m = compute_integral_map(s, 0.4, {0.05, 0.95}, {0.5, 0.01, 9, 1e-6});
      for (double v : m.values) {
        if (!(v > 0.0)) return false;
      }
    }
    return true;
  }});

  props.push_back({"edi.degenerate_interval_unit", [&fx](std::string&) {
    IntegralMap m = compute_integral_map(fx.stream, 0.3, {0.3, 0.3}, fx.cfg());
    for (double v : m.values) {
      if (v != 1.0) return false;
    }
    return true;
  }});

  props.push_back({"edi.round_trip_bound", [&fx](std::string& msg) {
    const int mid = 24;
    Image restored = deblur(fx.b1, fx.stream, fx.video.timestamps[mid], fx.cfg());
    const double delta =
        max_sample_log_step(fx.video, fx.b1.exposure, fx.cfg().n_samples, fx.eps);
    const double bound = 2.0 * fx.c + delta;
    double worst = 0.0;
    const Image& truth = fx.video.frames[mid];
    for (std::size_t i = 0; i < truth.data.size(); ++i) {
      worst = std::max(worst, std::abs(std::log(restored.data[i] + fx.eps) -
                                       std::log(truth.data[i] + fx.eps)));
    }
    if (worst > bound) {
      msg = "worst log error " + std::to_string(worst) + " bound " + std::to_string(bound);
      return false;
    }
    return true;
  }});

  props.push_back({"edi.blur2blur_consistency", [&fx](std::string& msg) {
    BlurryFrame back =
        blur2blur(fx.ext, fx.stream, fx.b1.exposure.midpoint(), fx.b1.exposure, fx.cfg());
    const double err = mean_abs_diff(back.image, fx.b1.image);
    const double bound = (std::exp(2.0 * fx.c) - 1.0) * mean_value(fx.ext.image);
    if (err > bound) {
      msg = "error " + std::to_string(err) + " bound " + std::to_string(bound);
      return false;
    }
    return true;
  }});

  props.push_back({"edi.multiscale_r1_bitwise", [&fx](std::string&) {
    const double t = fx.b1.exposure.midpoint();
    Image a = deblur(fx.b1, fx.stream, t, fx.cfg());
    Image b = deblur_multiscale(fx.b1, fx.stream, t, fx.cfg());
    return a.data == b.data;
  }});

  props.push_back({"edi.multiscale_gain", [](std::string& msg) {
    SceneSpec spec;
    spec.width = 128;
    spec.height = 64;
    spec.frames = 49;
    spec.shift_frac = 0.3;
    SharpVideo hr = make_scene(spec);
    SharpVideo lr = hr;
    for (Image& f : lr.frames) f = downsample(f, 4);
    lr.width /= 4;
    lr.height /= 4;
    EventStream ev = simulate_events(lr, {0.2, 0.01, 0});
    BlurryFrame blur = synthesize_blur(hr, {hr.timestamps.front(), hr.timestamps.back()});
    const Image& truth = hr.frames[24];
    Image restored = deblur_multiscale(blur, ev, hr.timestamps[24], {0.2, 0.01, 49, 1e-6});
    const double gain = psnr(restored, truth) - psnr(blur.image, truth);
    if (gain < 3.0) {
      msg = "gain " + std::to_string(gain) + " dB";
      return false;
    }
    return true;
  }});

  props.push_back({"edi.anchor_consistency", [&fx](std::string&) {
    auto transported = [&](double t) {
      Image latent = deblur(fx.b1, fx.stream, t, fx.cfg());
      IntegralMap map = compute_integral_map(fx.stream, t, fx.b1.exposure, fx.cfg());
      Image back(latent.width, latent.height, latent.channels);
      for (int y = 0; y < back.height; ++y) {
        for (int x = 0; x < back.width; ++x) back.at(y, x) = latent.at(y, x) * map.at(y, x);
      }
      return back;
    };
    const double delta =
        max_sample_log_step(fx.video, fx.b1.exposure, fx.cfg().n_samples, fx.eps);
    const double rt = std::exp(2.0 * fx.c + delta) - 1.0;
    const double bound = 2.0 * rt * (mean_value(fx.b1.image) + fx.eps);
    return mean_abs_diff(transported(fx.video.timestamps[8]),
                         transported(fx.video.timestamps[40])) <= bound;
  }});

  props.push_back({"edi.threshold_calibration", [&fx](std::string& msg) {
    SceneSpec spec;
    spec.width = 48;
    spec.height = 48;
    spec.frames = 200;
    spec.shift_frac = 0.8;
    SharpVideo video = make_scene(spec);
    EventStream ev = simulate_events(video, {0.2, 0.01, 0});
    BlurryFrame b1 = synthesize_blur(video, {video.timestamps[0], video.timestamps[48]});
    BlurryFrame b2 = synthesize_blur(video, {video.timestamps[49], video.timestamps[97]});
    BlurryFrame ext = extend_blur({b1, b2});
    CalibrationResult r = calibrate_threshold(b1, ext, ev, 0.05, 0.5, 20, fx.cfg());
    if (std::abs(r.c - 0.2) > 0.02) {
      msg = "calibrated " + std::to_string(r.c);
      return false;
    }
    return true;
  }});

  props.push_back({"eger.section_conservation", [](std::string&) {
    std::mt19937 rng(5);
    for (int rep = 0; rep < 10; ++rep) {
      EventStream s = random_stream(rng, 6, 5, 60);
      for (int n : {1, 5, 16}) {
        EgerTensor e = build_eger(s, {0.25, 0.7}, n);
        if (e.section_sum().data != voxel_grid(s, n).data) return false;
      }
    }
    return true;
  }});

  props.push_back({"eger.total_mass", [&fx](std::string&) {
    EgerTensor e = build_eger(fx.stream, {0.3, 0.6}, 16);
    double mass = 0.0;
    for (double v : e.data) mass += v;
    return mass == static_cast<double>(fx.stream.events.size());
  }});

  props.push_back({"eger.monotone_nesting", [&fx](std::string&) {
    EgerTensor small = build_eger(fx.stream, {0.4, 0.6}, 8);
    EgerTensor wide = build_eger(fx.stream, {0.2, 0.8}, 8);
    const std::size_t section =
        static_cast<std::size_t>(16) * fx.stream.height * fx.stream.width;
    for (std::size_t i = 0; i < section; ++i) {
      if (wide.data[section + i] < small.data[section + i]) return false;
    }
    return true;
  }});

  props.push_back({"eger.permutation_safe", [](std::string&) {
    std::vector<Event> evs = {{0.5, 0, 0, 1}, {0.5, 1, 1, -1}, {0.5, 2, 0, 1}};
    EventStream s1, s2;
    s1.width = s2.width = 3;
    s1.height = s2.height = 2;
    s1.span = s2.span = {0.0, 1.0};
    s1.events = evs;
    std::reverse(evs.begin(), evs.end());
    s2.events = evs;
    return build_eger(s1, {0.4, 0.6}, 4).data == build_eger(s2, {0.4, 0.6}, 4).data;
  }});

  props.push_back({"consistency.losses_zero_degenerate", [&fx](std::string&) {
    const DeblurOperator op = make_edi_operator(fx.cfg());
    TrainingPair degenerate{fx.b1, fx.b1, fx.stream, fx.b1.exposure.midpoint()};
    return loss_bc(op, degenerate) == 0.0 && loss_sc(op, degenerate) == 0.0 &&
           loss_tg(op, op, degenerate) == 0.0 && loss_sg(op, op, degenerate, 1) == 0.0;
  }});

  props.push_back({"consistency.loss_bounds", [&fx](std::string& msg) {
    const DeblurOperator op = make_edi_operator(fx.cfg());
    TrainingPair pair{fx.b1, fx.ext, fx.stream, fx.b1.exposure.midpoint()};
    const double delta =
        max_sample_log_step(fx.video, fx.ext.exposure, fx.cfg().n_samples, fx.eps);
    const double bc = loss_bc(op, pair);
    const double bc_bound = (std::exp(2.0 * fx.c) - 1.0) * mean_value(fx.ext.image);
    const Image side_a =
        ratio_of(op, pair.b_t.exposure, pair.b_tilde, slice(fx.stream, pair.b_tilde.exposure));
    const double sc = loss_sc(op, pair);
    const double sc_bound =
        (std::exp(3.0 * (2.0 * fx.c + delta)) - 1.0) * mean_value(side_a);
    const double tg = loss_tg(op, op, pair);
    const double tg_bound = 2.0 * (std::exp(2.0 * fx.c + delta) - 1.0) *
                            (mean_value(fx.b1.image) + fx.eps);
    if (bc > bc_bound || sc > sc_bound || tg > tg_bound) {
      std::ostringstream os;
      os << "bc " << bc << "/" << bc_bound << " sc " << sc << "/" << sc_bound << " tg "
         << tg << "/" << tg_bound;
      msg = os.str();
      return false;
    }
    return true;
  }});

  props.push_back({"consistency.total_linear_in_weights", [&fx](std::string&) {
    const DeblurOperator op = make_edi_operator(fx.cfg());
    TrainingPair pair{fx.b1, fx.ext, fx.stream, fx.b1.exposure.midpoint()};
    LossBreakdown a = total_loss(op, op, {pair}, {50.0, 1.0, 50.0, 50.0}, 1);
    LossBreakdown b = total_loss(op, op, {pair}, {100.0, 2.0, 100.0, 100.0}, 1);
    return b.total == 2.0 * a.total;
  }});

  props.push_back({"metrics.psnr_identity_symmetry", [&fx](std::string&) {
    const Image& a = fx.b1.image;
    const Image& b = fx.b2.image;
    return psnr(a, a) == kPsnrCapDb && psnr(a, b) == psnr(b, a);
  }});

  props.push_back({"metrics.psnr_monotone", [&fx](std::string&) {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> noise(fx.b1.image.data.size());
    for (double& v : noise) v = u(rng);
    double prev = kPsnrCapDb + 1.0;
    for (double amp : {0.01, 0.05, 0.2}) {
      Image noisy = fx.b1.image;
      for (std::size_t i = 0; i < noisy.data.size(); ++i) noisy.data[i] += amp * noise[i];
      const double value = psnr(fx.b1.image, noisy);
      if (value >= prev) return false;
      prev = value;
    }
    return true;
  }});

  props.push_back({"metrics.ssim_identity_continuity", [&fx](std::string&) {
    if (ssim(fx.b1.image, fx.b1.image) != 1.0) return false;
    Image nudged = fx.b1.image;
    for (double& v : nudged.data) v += 1e-4;
    return ssim(fx.b1.image, nudged) >= 0.999;
  }});

  props.push_back({"metrics.ssim_constant_closed_form", [](std::string&) {
    Image a(16, 16, 1, 0.3);
    Image b(16, 16, 1, 0.7);
    const double c1 = 1e-4;
    const double expected = (2.0 * 0.3 * 0.7 + c1) / (0.09 + 0.49 + c1);
    return std::abs(ssim(a, b) - expected) <= 1e-9;
  }});

  props.push_back({"dataset.generate_load_round_trip", [&fx](std::string& msg) {
    const fs::path root =
        fs::temp_directory_path() / ("evd_check_" + std::to_string(::getpid()));
    fs::remove_all(root);
    DatasetRecipe recipe;
    recipe.hr_width = 32;
    recipe.hr_height = 24;
    recipe.spatial_ratio = 4;
    recipe.frames_per_blur = 9;
    recipe.temporal_scale = 2;
    bool ok = true;
    try {
      generate(fx.video, recipe, root);
      LoadedSample loaded = load_sample(root / "manifest.txt");
      ok = !loaded.gt.empty() && loaded.pair.b_tilde.exposure.contains(loaded.pair.t);
    } catch (const std::exception& ex) {
      msg = ex.what();
      ok = false;
    }
    fs::remove_all(root);
    return ok;
  }});

  return props;
}

}  // namespace

int run_all(std::ostream& os) {
  const Fixture fx;
  int failures = 0;
  for (const Property& p : build_properties(fx)) {
    std::string msg;
    bool ok = false;
    try {
      ok = p.run(msg);
    } catch (const std::exception& ex) {
      msg = ex.what();
    }
    if (ok) {
      os << "PASS " << p.name << "\n";
    } else {
      ++failures;
      os << "FAIL " << p.name << (msg.empty() ? "" : ": " + msg) << "\n";
    }
  }
  os << (failures == 0 ? "all properties passed" : "some properties FAILED") << "\n";
  return failures;
}

}  // namespace evd::checks

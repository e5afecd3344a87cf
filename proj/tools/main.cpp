#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <iostream>
#include <string>
#include <vector>

#include "checks.hpp"
#include "evdeblur/consistency.hpp"
#include "evdeblur/dataset.hpp"
#include "evdeblur/edi.hpp"
#include "evdeblur/eger.hpp"
#include "evdeblur/io.hpp"
#include "evdeblur/metrics.hpp"
#include "evdeblur/simulator.hpp"

namespace fs = std::filesystem;
using namespace evd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInvariant = 3;

TimeInterval parse_interval(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    throw Error(Errc::bad_argument, "interval must be start:end, got " + text);
  }
  TimeInterval iv{std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
  if (iv.start > iv.end) throw Error(Errc::bad_argument, "interval start exceeds end");
  return iv;
}

// Absolute seconds or symbolic start|mid|end resolved against an interval.
double parse_time(const std::string& text, const TimeInterval& reference) {
  if (text == "start") return reference.start;
  if (text == "mid") return reference.midpoint();
  if (text == "end") return reference.end;
  return std::stod(text);
}

std::vector<std::string> split_csv(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

fs::path numbered_path(const fs::path& base, std::size_t index, std::size_t total) {
  if (total <= 1) return base;
  char suffix[16];
  std::snprintf(suffix, sizeof(suffix), "_%02zu", index);
  fs::path out = base;
  out.replace_filename(base.stem().string() + suffix + base.extension().string());
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw Error(Errc::missing_file, "cannot create " + path.string());
  os << text;
}

// Binds an event file to an exposure window: events outside the window
// cancel inside every anchored count difference, so restricting the stream
// to the window leaves all integral maps unchanged.
EventStream bind_to_window(EventStream stream, const TimeInterval& window) {
  stream.span.start = std::min(stream.span.start, window.start);
  stream.span.end = std::max(stream.span.end, window.end);
  EventStream out = slice(stream, window);
  return out;
}

std::vector<Image> read_image_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(Errc::missing_file, dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string ext = entry.path().extension().string();
    if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Image> out;
  for (const fs::path& f : files) out.push_back(read_pnm(f));
  if (out.empty()) throw Error(Errc::missing_file, "no anymap images in " + dir.string());
  return out;
}

int run_simulate(const std::string& video_dir, const std::string& out, double c, double eps) {
  const SharpVideo video = read_video_dir(video_dir);
  const EventStream stream = simulate_events(video, {c, eps, 0});
  write_events(out, stream);
  std::cout << "wrote " << stream.events.size() << " events (" << stream.width << "x"
            << stream.height << ") to " << out << "\n";
  return kExitOk;
}

int run_blur(const std::string& video_dir, int frames, const std::string& out_dir) {
  const SharpVideo video = read_video_dir(video_dir);
  if (frames < 2) throw Error(Errc::bad_argument, "--frames must be >= 2");
  const int n_windows = static_cast<int>(video.frames.size()) / frames;
  if (n_windows < 1) throw Error(Errc::video_too_short, "video shorter than one window");
  fs::create_directories(out_dir);
  std::ofstream exposures(fs::path(out_dir) / "exposures.txt");
  const char* ext = video.frames.front().channels == 1 ? "pgm" : "ppm";
  for (int w = 0; w < n_windows; ++w) {
    const TimeInterval window{video.timestamps[w * frames],
                              video.timestamps[w * frames + frames - 1]};
    const BlurryFrame blur = synthesize_blur(video, window);
    char name[64];
    std::snprintf(name, sizeof(name), "blur_%03d.%s", w, ext);
    write_pnm(fs::path(out_dir) / name, blur.image);
    char line[128];
    std::snprintf(line, sizeof(line), "%s %.17g %.17g\n", name, window.start, window.end);
    exposures << line;
  }
  std::cout << "wrote " << n_windows << " blurry frames to " << out_dir << "\n";
  return kExitOk;
}

int run_deblur(const std::string& blur_path, const std::string& exposure_text,
               const std::string& events_path, const std::string& t_text,
               const std::string& out, double ratio_override, double c, double eps,
               int samples) {
  const TimeInterval exposure = parse_interval(exposure_text);
  BlurryFrame blur{read_pnm(blur_path), exposure};
  EventStream stream = bind_to_window(read_events(events_path), exposure);

  const double detected = static_cast<double>(blur.image.width) / stream.width;
  if (ratio_override > 0.0 && std::abs(ratio_override - detected) > 1e-9) {
    std::ostringstream msg;
    msg << "--ratio " << ratio_override << " disagrees with detected " << detected;
    throw Error(Errc::resolution_mismatch, msg.str());
  }

  const EdiConfig cfg{c, eps, samples, 1e-6};
  const std::vector<std::string> specs = split_csv(t_text);
  if (specs.empty()) throw Error(Errc::bad_argument, "no --t value given");
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const double t = parse_time(specs[i], exposure);
    Image latent = deblur_multiscale(blur, stream, t, cfg);
    for (double& v : latent.data) v = std::clamp(v, 0.0, 1.0);  // save-time clamp
    const fs::path path = numbered_path(out, i, specs.size());
    write_pnm(path, latent);
    std::cout << "latent t=" << t << " -> " << path.string() << "\n";
  }
  return kExitOk;
}

int run_blur2blur(const std::string& blur_path, const std::string& exposure_text,
                  const std::string& events_path, const std::string& target_text,
                  const std::string& t_text, const std::string& out, double c, double eps,
                  int samples) {
  const TimeInterval exposure = parse_interval(exposure_text);
  const TimeInterval target = parse_interval(target_text);
  BlurryFrame blur{read_pnm(blur_path), exposure};
  EventStream stream = bind_to_window(read_events(events_path), exposure);
  const double t = parse_time(t_text, target);
  BlurryFrame retimed = blur2blur(blur, stream, t, target, {c, eps, samples, 1e-6});
  for (double& v : retimed.image.data) v = std::clamp(v, 0.0, 1.0);
  write_pnm(out, retimed.image);
  std::cout << "retimed blur [" << target.start << "," << target.end << "] -> " << out
            << "\n";
  return kExitOk;
}

int run_eger(const std::string& events_path, const std::string& target_text, int bins,
             const std::string& parent_text, const std::string& out) {
  EventStream stream = read_events(events_path);
  if (!parent_text.empty()) stream.span = parse_interval(parent_text);
  const TimeInterval target = parse_interval(target_text);
  const EgerTensor tensor = build_eger(stream, target, bins);
  write_eger(out, tensor);
  std::cout << "wrote " << tensor.channel_count() << "x" << tensor.height << "x"
            << tensor.width << " tensor to " << out << "\n";
  return kExitOk;
}

int run_calibrate(const std::string& blur_path, const std::string& exposure_text,
                  const std::string& blur2_path, const std::string& exposure2_text,
                  const std::string& events_path, double c_min, double c_max, int grid,
                  double eps, int samples) {
  BlurryFrame first{read_pnm(blur_path), parse_interval(exposure_text)};
  BlurryFrame second{read_pnm(blur2_path), parse_interval(exposure2_text)};
  const BlurryFrame ext = extend_blur({first, second});
  EventStream stream = bind_to_window(read_events(events_path), ext.exposure);
  const EdiConfig cfg{0.5 * (c_min + c_max), eps, samples, 1e-6};
  const CalibrationResult result =
      calibrate_threshold(first, ext, stream, c_min, c_max, grid, cfg);
  std::cout << "c=" << result.c << "\n";
  std::cout << "flat_residual=" << (result.flat_residual ? 1 : 0) << "\n";
  if (result.flat_residual) {
    std::cout << "warning: residual does not depend on c (no events?)\n";
  }
  return kExitOk;
}

int run_dataset(const std::string& video_dir, const std::string& out_dir,
                const DatasetRecipe& recipe) {
  const SharpVideo video = read_video_dir(video_dir);
  const std::vector<SampleManifest> samples = generate(video, recipe, out_dir);
  std::cout << "wrote " << samples.size() << " samples to " << out_dir << "\n";
  return kExitOk;
}

// Factor for the spatial-generalization term drawn from the divisors of the
// frame dims that keep the frame/event ratio at least 1.
int draw_sg_factor(const TrainingPair& pair, std::uint64_t seed) {
  const int w = pair.b_tilde.image.width;
  const int h = pair.b_tilde.image.height;
  const int ratio = pair.b_tilde.image.width / pair.stream.width;
  std::vector<int> divisors;
  for (int d = 1; d <= ratio; ++d) {
    if (w % d == 0 && h % d == 0) divisors.push_back(d);
  }
  if (divisors.empty()) return 1;
  std::mt19937_64 rng(seed);
  return divisors[rng() % divisors.size()];
}

int run_losses(const std::string& manifest, const std::string& id, bool lr, double c,
               double eps, int samples, int sg_factor, std::uint64_t seed,
               const LossWeights& weights, const std::string& out_prefix) {
  const EdiConfig cfg{c, eps, samples, 1e-6};
  const DeblurOperator op = make_edi_operator(cfg);
  std::vector<std::string> ids;
  if (id.empty()) {
    for (const SampleManifest& sm : read_manifest(manifest)) ids.push_back(sm.id);
  } else {
    ids.push_back(id);
  }
  std::vector<LossRow> rows;
  std::uint64_t index = 0;
  for (const std::string& sample_id : ids) {
    const LoadedSample sample = load_sample(manifest, sample_id, lr);
    const int factor =
        sg_factor > 0 ? sg_factor : draw_sg_factor(sample.pair, seed + index++);
    LossBreakdown losses = total_loss(op, op, {sample.pair}, weights, factor);
    rows.push_back({sample_id, losses});
  }
  std::cout << format_loss_report(rows);
  if (!out_prefix.empty()) {
    write_text(out_prefix + ".txt", format_loss_report(rows));
    write_text(out_prefix + ".csv", format_loss_csv(rows));
  }
  return kExitOk;
}

int run_eval(const std::vector<std::string>& sets, const std::string& restored_dir,
             const std::string& gt_dir, const std::string& label,
             const std::string& out_prefix) {
  std::vector<ReportRow> rows;
  auto eval_pair = [&](const std::string& name, const std::string& rdir,
                       const std::string& gdir) {
    const std::vector<Image> restored = read_image_dir(rdir);
    const std::vector<Image> truth = read_image_dir(gdir);
    rows.push_back({name, eval_sequence(restored, truth)});
  };
  for (const std::string& set : sets) {
    const std::vector<std::string> parts = split_csv(set);
    if (parts.size() != 3) {
      throw Error(Errc::bad_argument, "--set needs label,restored_dir,gt_dir");
    }
    eval_pair(parts[0], parts[1], parts[2]);
  }
  if (!restored_dir.empty()) eval_pair(label, restored_dir, gt_dir);

  const std::string table = format_quality_table(rows);
  std::cout << table;
  if (!out_prefix.empty()) {
    write_text(out_prefix + ".txt", table);
    write_text(out_prefix + ".csv", format_quality_csv(rows));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"event-based motion deblurring toolkit"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "video directory -> event file");
  std::string sim_video, sim_out;
  double sim_c = 0.2, sim_eps = 0.01;
  simulate->add_option("--video", sim_video, "directory of anymap frames + timestamps.txt")
      ->required();
  simulate->add_option("--out", sim_out, "output event file")->required();
  simulate->add_option("--threshold", sim_c, "contrast threshold (log units)");
  simulate->add_option("--eps", sim_eps, "log floor");

  // blur
  auto* blur_cmd = app.add_subcommand("blur", "video directory -> windowed blurry frames");
  std::string blur_video, blur_out;
  int blur_frames = 49;
  blur_cmd->add_option("--video", blur_video, "directory of anymap frames")->required();
  blur_cmd->add_option("--frames", blur_frames, "latent frames per blur window");
  blur_cmd->add_option("--out", blur_out, "output directory")->required();

  // deblur
  auto* deblur_cmd = app.add_subcommand("deblur", "blur + events + t -> latent image(s)");
  std::string d_blur, d_exposure, d_events, d_t = "mid", d_out;
  double d_ratio = 0.0, d_c = 0.2, d_eps = 0.01;
  int d_samples = 49;
  deblur_cmd->add_option("--blur", d_blur, "blurry anymap image")->required();
  deblur_cmd->add_option("--exposure", d_exposure, "exposure interval start:end")->required();
  deblur_cmd->add_option("--events", d_events, "event file")->required();
  deblur_cmd->add_option("--t", d_t, "latent time(s): seconds or start|mid|end, comma list");
  deblur_cmd->add_option("--out", d_out, "output image path")->required();
  deblur_cmd->add_option("--ratio", d_ratio, "expected frame/event resolution ratio");
  deblur_cmd->add_option("--threshold", d_c, "contrast threshold");
  deblur_cmd->add_option("--eps", d_eps, "log floor");
  deblur_cmd->add_option("--samples", d_samples, "outer-integral sample count");

  // blur2blur
  auto* b2b = app.add_subcommand("blur2blur", "re-expose a blurry frame to a nested window");
  std::string b_blur, b_exposure, b_events, b_target, b_t = "mid", b_out;
  double b_c = 0.2, b_eps = 0.01;
  int b_samples = 49;
  b2b->add_option("--blur", b_blur)->required();
  b2b->add_option("--exposure", b_exposure)->required();
  b2b->add_option("--events", b_events)->required();
  b2b->add_option("--target", b_target, "target interval start:end")->required();
  b2b->add_option("--t", b_t, "anchor inside the target");
  b2b->add_option("--out", b_out)->required();
  b2b->add_option("--threshold", b_c);
  b2b->add_option("--eps", b_eps);
  b2b->add_option("--samples", b_samples);

  // eger
  auto* eger_cmd = app.add_subcommand("eger", "events + target + bins -> tensor file");
  std::string e_events, e_target, e_parent, e_out;
  int e_bins = 16;
  eger_cmd->add_option("--events", e_events)->required();
  eger_cmd->add_option("--target", e_target, "target interval start:end")->required();
  eger_cmd->add_option("--bins", e_bins, "temporal bins N");
  eger_cmd->add_option("--parent", e_parent, "parent interval (default: event span)");
  eger_cmd->add_option("--out", e_out)->required();

  // calibrate
  auto* cal = app.add_subcommand("calibrate",
                                 "two adjacent blurs + events -> contrast threshold");
  std::string c_blur, c_exposure, c_blur2, c_exposure2, c_events;
  double c_min = 0.05, c_max = 0.5, c_eps = 0.01;
  int c_grid = 20, c_samples = 49;
  cal->add_option("--blur", c_blur)->required();
  cal->add_option("--exposure", c_exposure)->required();
  cal->add_option("--blur2", c_blur2, "adjacent blurry frame")->required();
  cal->add_option("--exposure2", c_exposure2)->required();
  cal->add_option("--events", c_events)->required();
  cal->add_option("--cmin", c_min);
  cal->add_option("--cmax", c_max);
  cal->add_option("--grid", c_grid);
  cal->add_option("--eps", c_eps);
  cal->add_option("--samples", c_samples);

  // dataset
  auto* ds = app.add_subcommand("dataset", "video directory -> multi-scale dataset tree");
  std::string ds_video, ds_out;
  DatasetRecipe recipe;
  ds->add_option("--video", ds_video)->required();
  ds->add_option("--out", ds_out)->required();
  ds->add_option("--hr-width", recipe.hr_width);
  ds->add_option("--hr-height", recipe.hr_height);
  ds->add_option("--ratio", recipe.spatial_ratio, "spatial ratio R");
  ds->add_option("--frames", recipe.frames_per_blur, "latent frames per blur S");
  ds->add_option("--m", recipe.temporal_scale, "temporal scale M");
  ds->add_option("--threshold", recipe.threshold_c);
  ds->add_option("--eps", recipe.eps);
  ds->add_option("--seed", recipe.seed);

  // losses
  auto* losses_cmd =
      app.add_subcommand("losses", "dataset manifest -> per-sample consistency losses");
  std::string l_manifest, l_id, l_prefix;
  bool l_lr = false;
  double l_c = 0.2, l_eps = 0.01;
  int l_samples = 49, l_sg_factor = 1;
  std::uint64_t l_seed = 0;
  LossWeights l_weights;
  losses_cmd->add_option("--manifest", l_manifest, "dataset manifest.txt")->required();
  losses_cmd->add_option("--id", l_id, "evaluate one sample (default: all)");
  losses_cmd->add_flag("--lr", l_lr, "use the LR frames (R=1) instead of HR");
  losses_cmd->add_option("--threshold", l_c);
  losses_cmd->add_option("--eps", l_eps);
  losses_cmd->add_option("--samples", l_samples);
  losses_cmd->add_option("--sg-factor", l_sg_factor,
                         "downsampling factor of the spatial term; 0 draws one per "
                         "sample from the seed");
  losses_cmd->add_option("--seed", l_seed, "seed for the drawn factors");
  losses_cmd->add_option("--beta-bc", l_weights.bc);
  losses_cmd->add_option("--beta-sc", l_weights.sc);
  losses_cmd->add_option("--beta-tg", l_weights.tg);
  losses_cmd->add_option("--beta-sg", l_weights.sg);
  losses_cmd->add_option("--out", l_prefix, "write <prefix>.txt and <prefix>.csv");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "restored dir + gt dir -> quality tables");
  std::vector<std::string> ev_sets;
  std::string ev_restored, ev_gt, ev_label = "restored", ev_prefix;
  eval_cmd->add_option("--set", ev_sets, "repeatable label,restored_dir,gt_dir triple");
  eval_cmd->add_option("--restored", ev_restored, "directory of restored frames");
  eval_cmd->add_option("--gt", ev_gt, "directory of ground-truth frames");
  eval_cmd->add_option("--label", ev_label, "row label for the single pair");
  eval_cmd->add_option("--out", ev_prefix, "write <prefix>.txt and <prefix>.csv");

  // check
  auto* check_cmd = app.add_subcommand("check", "run the full invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) return run_simulate(sim_video, sim_out, sim_c, sim_eps);
    if (blur_cmd->parsed()) return run_blur(blur_video, blur_frames, blur_out);
    if (deblur_cmd->parsed()) {
      return run_deblur(d_blur, d_exposure, d_events, d_t, d_out, d_ratio, d_c, d_eps,
                        d_samples);
    }
    if (b2b->parsed()) {
      return run_blur2blur(b_blur, b_exposure, b_events, b_target, b_t, b_out, b_c, b_eps,
                           b_samples);
    }
    if (eger_cmd->parsed()) return run_eger(e_events, e_target, e_bins, e_parent, e_out);
    if (cal->parsed()) {
      return run_calibrate(c_blur, c_exposure, c_blur2, c_exposure2, c_events, c_min,
                           c_max, c_grid, c_eps, c_samples);
    }
    if (ds->parsed()) return run_dataset(ds_video, ds_out, recipe);
    if (losses_cmd->parsed()) {
      return run_losses(l_manifest, l_id, l_lr, l_c, l_eps, l_samples, l_sg_factor,
                        l_seed, l_weights, l_prefix);
    }
    if (eval_cmd->parsed()) {
      if (ev_sets.empty() && ev_restored.empty() && ev_prefix.empty()) {
        std::cerr << "eval needs --set, --restored/--gt, or --out\n";
        return kExitUsage;
      }
      // no inputs with --out still emits the header-only tables
      return run_eval(ev_sets, ev_restored, ev_gt, ev_label, ev_prefix);
    }
    if (check_cmd->parsed()) {
      return checks::run_all(std::cout) == 0 ? kExitOk : kExitInvariant;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == Errc::invariant_violation ? kExitInvariant : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

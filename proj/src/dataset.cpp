#include "evdeblur/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "evdeblur/io.hpp"
#include "evdeblur/metrics.hpp"

namespace evd {

namespace {

namespace fs = std::filesystem;

void check_recipe(const DatasetRecipe& r) {
  if (r.frames_per_blur < 3 || r.frames_per_blur % 2 == 0) {
    throw Error(Errc::bad_argument, "frames_per_blur must be odd and >= 3");
  }
  if (r.temporal_scale < 1) throw Error(Errc::bad_argument, "temporal_scale must be >= 1");
  if (r.spatial_ratio < 1) throw Error(Errc::bad_argument, "spatial_ratio must be >= 1");
  if (r.hr_width % r.spatial_ratio != 0 || r.hr_height % r.spatial_ratio != 0) {
    throw Error(Errc::not_divisible, "hr dims must divide by the spatial ratio");
  }
}

Image center_crop(const Image& img, int w, int h) {
  if (img.width == w && img.height == h) return img;
  if (img.width < w || img.height < h) {
    throw Error(Errc::size_mismatch, "video frames smaller than the recipe hr size");
  }
  const int x0 = (img.width - w) / 2;
  const int y0 = (img.height - h) / 2;
  Image out(w, h, img.channels);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < img.channels; ++c) out.at(y, x, c) = img.at(y0 + y, x0 + x, c);
    }
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_interval(const TimeInterval& iv) {
  return fmt_double(iv.start) + ":" + fmt_double(iv.end);
}

TimeInterval parse_interval(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw Error(Errc::parse_error, "interval " + text);
  return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(text);
  while (std::getline(is, item, ';')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void write_manifest(const fs::path& path, const std::vector<SampleManifest>& samples) {
  std::ofstream os(path);
  if (!os) throw Error(Errc::missing_file, "cannot create " + path.string());
  for (const SampleManifest& s : samples) {
    os << "id=" << s.id << "\n";
    os << "spatial_ratio=" << s.spatial_ratio << "\n";
    os << "temporal_scale=" << s.temporal_scale << "\n";
    os << "latent_fps=" << fmt_double(s.latent_fps) << "\n";
    os << "exposure_t=" << fmt_interval(s.exposure_t) << "\n";
    os << "exposure_ext=" << fmt_interval(s.exposure_ext) << "\n";
    os << "hr_blur=" << s.hr_blur << "\n";
    os << "lr_blur=" << s.lr_blur << "\n";
    os << "hr_blur_ext=" << s.hr_blur_ext << "\n";
    os << "lr_blur_ext=" << s.lr_blur_ext << "\n";
    os << "hr_blur_parts=";
    for (std::size_t i = 0; i < s.hr_blur_parts.size(); ++i) {
      os << (i ? ";" : "") << s.hr_blur_parts[i];
    }
    os << "\nlr_blur_parts=";
    for (std::size_t i = 0; i < s.lr_blur_parts.size(); ++i) {
      os << (i ? ";" : "") << s.lr_blur_parts[i];
    }
    os << "\nevents=" << s.events << "\n";
    os << "gt_hr=";
    for (std::size_t i = 0; i < s.gt_hr.size(); ++i) os << (i ? ";" : "") << s.gt_hr[i];
    os << "\ngt_lr=";
    for (std::size_t i = 0; i < s.gt_lr.size(); ++i) os << (i ? ";" : "") << s.gt_lr[i];
    os << "\ngt_times=";
    for (std::size_t i = 0; i < s.gt_times.size(); ++i) {
      os << (i ? ";" : "") << fmt_double(s.gt_times[i]);
    }
    os << "\n\n";
  }
}

}  // namespace

std::vector<SampleManifest> generate(const SharpVideo& video, const DatasetRecipe& recipe,
                                     const std::filesystem::path& root) {
  check_recipe(recipe);
  const int s = recipe.frames_per_blur;
  const int m = recipe.temporal_scale;
  const int total = static_cast<int>(video.frames.size());
  const int n_windows = total / s;
  const int n_samples = n_windows / m;
  if (n_samples < 1) {
    throw Error(Errc::video_too_short, "video shorter than one M*S frame group");
  }

  for (const char* sub : {"hr_blur", "lr_blur", "hr_blur_ext", "lr_blur_ext", "events", "gt"}) {
    fs::create_directories(root / sub);
  }

  // Crop to the recipe size once, derive the LR sequence by box averaging.
  std::vector<Image> hr_frames(total);
  std::vector<Image> lr_frames(total);
  for (int k = 0; k < total; ++k) {
    hr_frames[k] = center_crop(video.frames[k], recipe.hr_width, recipe.hr_height);
    lr_frames[k] = downsample(hr_frames[k], recipe.spatial_ratio);
  }

  SharpVideo lr_video;
  lr_video.frames = lr_frames;
  lr_video.timestamps = video.timestamps;
  lr_video.width = recipe.hr_width / recipe.spatial_ratio;
  lr_video.height = recipe.hr_height / recipe.spatial_ratio;
  const EventStream events =
      simulate_events(lr_video, {recipe.threshold_c, recipe.eps, recipe.seed});

  SharpVideo hr_video;
  hr_video.frames = std::move(hr_frames);
  hr_video.timestamps = video.timestamps;
  hr_video.width = recipe.hr_width;
  hr_video.height = recipe.hr_height;

  const double fps = recipe.latent_fps > 0.0
                         ? recipe.latent_fps
                         : (total - 1) / (video.timestamps.back() - video.timestamps.front());
  const std::vector<int> gt_idx = latent_indices(s);
  const char* img_ext = video.frames.front().channels == 1 ? "pgm" : "ppm";

  std::vector<SampleManifest> samples;
  char buf[128];
  for (int g = 0; g < n_samples; ++g) {
    SampleManifest sm;
    std::snprintf(buf, sizeof(buf), "sample_%03d", g);
    sm.id = buf;
    sm.spatial_ratio = recipe.spatial_ratio;
    sm.temporal_scale = m;
    sm.latent_fps = fps;

    std::vector<BlurryFrame> hr_parts, lr_parts;
    for (int j = 0; j < m; ++j) {
      const int first = (g * m + j) * s;
      const TimeInterval window{video.timestamps[first], video.timestamps[first + s - 1]};
      hr_parts.push_back(synthesize_blur(hr_video, window));
      lr_parts.push_back(synthesize_blur(lr_video, window));

      std::snprintf(buf, sizeof(buf), "hr_blur/%s_w%02d.%s", sm.id.c_str(), j, img_ext);
      sm.hr_blur_parts.push_back(buf);
      write_pnm(root / buf, hr_parts.back().image);
      std::snprintf(buf, sizeof(buf), "lr_blur/%s_w%02d.%s", sm.id.c_str(), j, img_ext);
      sm.lr_blur_parts.push_back(buf);
      write_pnm(root / buf, lr_parts.back().image);
    }
    sm.hr_blur = sm.hr_blur_parts.front();
    sm.lr_blur = sm.lr_blur_parts.front();
    sm.exposure_t = hr_parts.front().exposure;

    const BlurryFrame hr_ext = m > 1 ? extend_blur(hr_parts) : hr_parts.front();
    const BlurryFrame lr_ext = m > 1 ? extend_blur(lr_parts) : lr_parts.front();
    sm.exposure_ext = hr_ext.exposure;
    std::snprintf(buf, sizeof(buf), "hr_blur_ext/%s.%s", sm.id.c_str(), img_ext);
    sm.hr_blur_ext = buf;
    write_pnm(root / buf, hr_ext.image);
    std::snprintf(buf, sizeof(buf), "lr_blur_ext/%s.%s", sm.id.c_str(), img_ext);
    sm.lr_blur_ext = buf;
    write_pnm(root / buf, lr_ext.image);

    std::snprintf(buf, sizeof(buf), "events/%s.evt", sm.id.c_str());
    sm.events = buf;
    write_events(root / buf, slice(events, sm.exposure_ext));

    const int first = g * m * s;
    for (std::size_t i = 0; i < gt_idx.size(); ++i) {
      const int frame = first + gt_idx[i];
      sm.gt_times.push_back(video.timestamps[frame]);
      std::snprintf(buf, sizeof(buf), "gt/%s_hr_%02zu.%s", sm.id.c_str(), i, img_ext);
      sm.gt_hr.push_back(buf);
      write_pnm(root / buf, hr_video.frames[frame]);
      std::snprintf(buf, sizeof(buf), "gt/%s_lr_%02zu.%s", sm.id.c_str(), i, img_ext);
      sm.gt_lr.push_back(buf);
      write_pnm(root / buf, lr_video.frames[frame]);
    }

    samples.push_back(std::move(sm));
  }

  write_manifest(root / "manifest.txt", samples);
  return samples;
}

std::vector<SampleManifest> read_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream is(manifest_path);
  if (!is) throw Error(Errc::missing_file, manifest_path.string());
  std::vector<SampleManifest> samples;
  SampleManifest cur;
  bool open = false;
  std::string line;
  auto flush = [&] {
    if (open) samples.push_back(cur);
    cur = SampleManifest{};
    open = false;
  };
  while (std::getline(is, line)) {
    if (line.empty()) {
      flush();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::parse_error, "manifest line without '=': " + line);
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    open = true;
    if (key == "id") cur.id = value;
    else if (key == "spatial_ratio") cur.spatial_ratio = std::stoi(value);
    else if (key == "temporal_scale") cur.temporal_scale = std::stoi(value);
    else if (key == "latent_fps") cur.latent_fps = std::stod(value);
    else if (key == "exposure_t") cur.exposure_t = parse_interval(value);
    else if (key == "exposure_ext") cur.exposure_ext = parse_interval(value);
    else if (key == "hr_blur") cur.hr_blur = value;
    else if (key == "lr_blur") cur.lr_blur = value;
    else if (key == "hr_blur_ext") cur.hr_blur_ext = value;
    else if (key == "lr_blur_ext") cur.lr_blur_ext = value;
    else if (key == "hr_blur_parts") cur.hr_blur_parts = split_list(value);
    else if (key == "lr_blur_parts") cur.lr_blur_parts = split_list(value);
    else if (key == "events") cur.events = value;
    else if (key == "gt_hr") cur.gt_hr = split_list(value);
    else if (key == "gt_lr") cur.gt_lr = split_list(value);
    else if (key == "gt_times") {
      for (const std::string& item : split_list(value)) cur.gt_times.push_back(std::stod(item));
    } else {
      throw Error(Errc::parse_error, "unknown manifest key " + key);
    }
  }
  flush();
  return samples;
}

LoadedSample load_sample(const std::filesystem::path& manifest_path, const std::string& id,
                         bool lr_frames) {
  const std::vector<SampleManifest> samples = read_manifest(manifest_path);
  if (samples.empty()) throw Error(Errc::parse_error, "manifest has no samples");
  const SampleManifest* found = nullptr;
  for (const SampleManifest& s : samples) {
    if (id.empty() || s.id == id) {
      found = &s;
      break;
    }
  }
  if (!found) throw Error(Errc::missing_file, "no sample named " + id);
  const SampleManifest& sm = *found;
  const fs::path dir = manifest_path.parent_path();

  if (!sm.exposure_ext.contains(sm.exposure_t)) {
    throw Error(Errc::invariant_violation, sm.id + ": exposure_t not inside exposure_ext");
  }
  for (double t : sm.gt_times) {
    if (!sm.exposure_t.contains(t)) {
      throw Error(Errc::invariant_violation, sm.id + ": gt time outside exposure_t");
    }
  }

  LoadedSample out;
  out.manifest = sm;
  const std::string& blur_path = lr_frames ? sm.lr_blur : sm.hr_blur;
  const std::string& ext_path = lr_frames ? sm.lr_blur_ext : sm.hr_blur_ext;
  out.pair.b_t = {read_pnm(dir / blur_path), sm.exposure_t};
  out.pair.b_tilde = {read_pnm(dir / ext_path), sm.exposure_ext};
  out.pair.t = sm.exposure_t.midpoint();
  out.pair.stream = read_events(dir / sm.events);
  for (const Event& e : out.pair.stream.events) {
    if (!sm.exposure_ext.contains(e.t)) {
      throw Error(Errc::invariant_violation, sm.id + ": event outside exposure_ext");
    }
  }
  // the manifest binds the record file to the extended exposure window
  out.pair.stream.span = sm.exposure_ext;
  if (auto issue = validate_stream(out.pair.stream)) {
    throw Error(Errc::invariant_violation, sm.id + ": " + issue->message);
  }
  if (!out.pair.b_tilde.image.same_shape(out.pair.b_t.image)) {
    throw Error(Errc::invariant_violation, sm.id + ": blur and extended blur sizes differ");
  }

  const std::vector<std::string>& gt_paths = lr_frames ? sm.gt_lr : sm.gt_hr;
  if (gt_paths.size() != sm.gt_times.size()) {
    throw Error(Errc::invariant_violation, sm.id + ": gt path/time count mismatch");
  }
  for (const std::string& p : gt_paths) out.gt.push_back(read_pnm(dir / p));
  out.gt_times = sm.gt_times;
  return out;
}

}  // namespace evd

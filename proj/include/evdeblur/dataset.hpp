#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "evdeblur/consistency.hpp"
#include "evdeblur/core.hpp"
#include "evdeblur/simulator.hpp"

namespace evd {

// Synthetic multi-scale dataset recipe: HR/LR sharp sequences, events at LR,
// blurry frames at both temporal scales and both spatial ratios.
struct DatasetRecipe {
  int hr_width = 256;
  int hr_height = 128;
  int spatial_ratio = 4;    // R_bar; HR dims must divide by it
  int frames_per_blur = 49; // S, odd and >= 3
  int temporal_scale = 2;   // M adjacent blurs per extended frame
  double threshold_c = 0.2;
  double eps = 0.01;
  std::uint64_t seed = 0;
  double latent_fps = 0.0;  // 0 = derive from timestamps
};

struct SampleManifest {
  std::string id;
  int spatial_ratio = 1;
  int temporal_scale = 1;
  double latent_fps = 0.0;
  TimeInterval exposure_t;    // exposure of the first constituent blur
  TimeInterval exposure_ext;  // union exposure of the extended blur
  std::string hr_blur;        // first constituent window, HR
  std::string lr_blur;
  std::string hr_blur_ext;
  std::string lr_blur_ext;
  std::vector<std::string> hr_blur_parts;  // all M constituent windows
  std::vector<std::string> lr_blur_parts;
  std::string events;  // LR events over exposure_ext
  std::vector<std::string> gt_hr;
  std::vector<std::string> gt_lr;
  std::vector<double> gt_times;  // inside exposure_t
};

// Writes dataset_root/{hr_blur,lr_blur,hr_blur_ext,lr_blur_ext,events,gt}/
// plus manifest.txt, and returns the manifests. Windows are aligned,
// non-overlapping S-frame blocks starting at frame 0, grouped M at a time.
// Deterministic for a fixed recipe.
std::vector<SampleManifest> generate(const SharpVideo& video, const DatasetRecipe& recipe,
                                     const std::filesystem::path& root);

std::vector<SampleManifest> read_manifest(const std::filesystem::path& manifest_path);

struct LoadedSample {
  TrainingPair pair;
  std::vector<Image> gt;  // ground-truth latents matching the pair resolution
  std::vector<double> gt_times;
  SampleManifest manifest;
};

// Materialize a training pair (HR frames with LR events by default, or the
// all-LR variant) and its ground truth, validating every invariant on load.
LoadedSample load_sample(const std::filesystem::path& manifest_path,
                         const std::string& id = "", bool lr_frames = false);

}  // namespace evd

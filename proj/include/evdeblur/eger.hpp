#pragma once

#include <vector>

#include "evdeblur/core.hpp"

namespace evd {

// Polarity-separated temporal-bin accumulation over N equal bins of the
// stream span: channels [0, N) are positive-polarity bins, [N, 2N) negative.
struct VoxelGrid {
  std::vector<double> data;  // (2N, H, W), channel-major
  int n_bins = 0;
  int width = 0;
  int height = 0;

  double at(int ch, int y, int x) const {
    return data[(static_cast<std::size_t>(ch) * height + y) * width + x];
  }
};

// Exposure-guided event representation: three polarity-separated voxel
// tensors partitioning the parent exposure around the target interval,
// concatenated channelwise into shape (6N, H, W).
//
// Sections: channels [0, 2N) count events before the target ([t_s, ts_hat)),
// [2N, 4N) events inside the closed target, [4N, 6N) events after it
// ((te_hat, t_e]). Within a section, channels are ordered
// [positive bins 0..N-1, negative bins 0..N-1]. Bins subdivide the parent
// interval, so an event keeps its global bin index across sections, and the
// three sections sum to the plain 2N voxel grid exactly.
struct EgerTensor {
  std::vector<double> data;  // (6N, H, W), channel-major, integer counts
  int n_bins = 0;
  int width = 0;
  int height = 0;
  TimeInterval parent;  // stream span
  TimeInterval target;

  int channel_count() const { return 6 * n_bins; }
  double at(int ch, int y, int x) const {
    return data[(static_cast<std::size_t>(ch) * height + y) * width + x];
  }
  // Elementwise sum of the three sections, shape (2N, H, W).
  VoxelGrid section_sum() const;
};

EgerTensor build_eger(const EventStream& stream, const TimeInterval& target, int n_bins);

VoxelGrid voxel_grid(const EventStream& stream, int n_bins);

// Global bin of a timestamp inside span: floor(N*(t-t_s)/(t_e-t_s)),
// clamped to N-1 at t == t_e.
int bin_index(double t, const TimeInterval& span, int n_bins);

}  // namespace evd

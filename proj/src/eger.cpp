#include "evdeblur/eger.hpp"

#include <cmath>

namespace evd {

int bin_index(double t, const TimeInterval& span, int n_bins) {
  if (span.degenerate()) return 0;
  const int bin = static_cast<int>(std::floor(n_bins * (t - span.start) / span.length()));
  return std::clamp(bin, 0, n_bins - 1);
}

VoxelGrid voxel_grid(const EventStream& stream, int n_bins) {
  if (n_bins < 1) throw Error(Errc::zero_bins, "need at least one temporal bin");
  VoxelGrid grid;
  grid.n_bins = n_bins;
  grid.width = stream.width;
  grid.height = stream.height;
  grid.data.assign(static_cast<std::size_t>(2 * n_bins) * stream.height * stream.width, 0.0);
  const std::size_t plane = static_cast<std::size_t>(stream.height) * stream.width;
  for (const Event& e : stream.events) {
    const int bin = bin_index(e.t, stream.span, n_bins);
    const int ch = (e.p > 0 ? 0 : n_bins) + bin;
    grid.data[ch * plane + static_cast<std::size_t>(e.y) * stream.width + e.x] += 1.0;
  }
  return grid;
}

EgerTensor build_eger(const EventStream& stream, const TimeInterval& target, int n_bins) {
  if (n_bins < 1) throw Error(Errc::zero_bins, "need at least one temporal bin");
  if (!stream.span.contains(target)) {
    throw Error(Errc::target_out_of_span, "target interval outside the stream span");
  }
  EgerTensor tensor;
  tensor.n_bins = n_bins;
  tensor.width = stream.width;
  tensor.height = stream.height;
  tensor.parent = stream.span;
  tensor.target = target;
  tensor.data.assign(static_cast<std::size_t>(6 * n_bins) * stream.height * stream.width, 0.0);

  const std::size_t plane = static_cast<std::size_t>(stream.height) * stream.width;
  for (const Event& e : stream.events) {
    // three-way partition [t_s, ts_hat) | [ts_hat, te_hat] | (te_hat, t_e]
    int section;
    if (e.t < target.start) {
      section = 0;
    } else if (e.t <= target.end) {
      section = 1;
    } else {
      section = 2;
    }
    const int bin = bin_index(e.t, stream.span, n_bins);
    const int ch = section * 2 * n_bins + (e.p > 0 ? 0 : n_bins) + bin;
    tensor.data[ch * plane + static_cast<std::size_t>(e.y) * stream.width + e.x] += 1.0;
  }
  return tensor;
}

VoxelGrid EgerTensor::section_sum() const {
  VoxelGrid grid;
  grid.n_bins = n_bins;
  grid.width = width;
  grid.height = height;
  const std::size_t section_size = static_cast<std::size_t>(2 * n_bins) * height * width;
  grid.data.assign(section_size, 0.0);
  for (int s = 0; s < 3; ++s) {
    for (std::size_t i = 0; i < section_size; ++i) {
      grid.data[i] += data[s * section_size + i];
    }
  }
  return grid;
}

}  // namespace evd

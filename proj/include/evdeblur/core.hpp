#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace evd {

enum class Errc {
  unsorted,
  out_of_bounds,
  bad_polarity,
  out_of_span,
  interval_out_of_span,
  degenerate_video,
  interval_not_on_grid,
  too_few_frames,
  non_contiguous_exposures,
  size_mismatch,
  not_divisible,
  anchor_out_of_span,
  resolution_mismatch,
  anchor_out_of_exposure,
  downscale,
  target_not_nested,
  anchor_out_of_target,
  too_few_latents,
  target_out_of_span,
  zero_bins,
  length_mismatch,
  too_small,
  video_too_short,
  missing_file,
  parse_error,
  invariant_violation,
  aspect_mismatch,
  bad_argument,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

// Closed interval [start, end] of seconds. A degenerate interval
// (start == end) is legal and denotes a single instant.
struct TimeInterval {
  double start = 0.0;
  double end = 0.0;

  double length() const { return end - start; }
  bool degenerate() const { return start == end; }
  bool contains(double t) const { return t >= start && t <= end; }
  bool contains(const TimeInterval& other) const {
    return other.start >= start && other.end <= end;
  }
  double midpoint() const { return 0.5 * (start + end); }
  bool operator==(const TimeInterval&) const = default;
};

struct Event {
  double t = 0.0;  // seconds
  int x = 0;       // column
  int y = 0;       // row
  int p = 0;       // polarity, +1 or -1
};

// Time-sorted events on a fixed sensor grid. All timestamps lie in span.
struct EventStream {
  std::vector<Event> events;
  int width = 0;
  int height = 0;
  TimeInterval span;

  std::size_t size() const { return events.size(); }
  bool empty() const { return events.empty(); }
};

// Row-major intensity raster, samples in [0,1], interleaved channels.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<double> data;

  Image() = default;
  Image(int w, int h, int c = 1, double fill = 0.0)
      : width(w), height(h), channels(c),
        data(static_cast<std::size_t>(w) * h * c, fill) {}

  double& at(int y, int x, int c = 0) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  double at(int y, int x, int c = 0) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::size_t sample_count() const { return data.size(); }
  bool same_shape(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }
};

struct BlurryFrame {
  Image image;
  TimeInterval exposure;
};

struct ValidationIssue {
  Errc kind = Errc::invariant_violation;
  std::size_t index = 0;
  std::string message;
};

// nullopt when every EventStream invariant holds, otherwise the first
// violation in event order (unsorted, out-of-bounds, zero polarity,
// timestamp outside span).
std::optional<ValidationIssue> validate_stream(const EventStream& stream);

// Sub-stream of events with timestamps in [interval.start, interval.end],
// both ends closed. Order and event fields are preserved; the result span
// is the interval itself. Throws interval_out_of_span when the interval is
// not nested in stream.span.
EventStream slice(const EventStream& stream, const TimeInterval& interval);

// Per-pixel sum of polarities over the closed interval, height*width
// row-major. Empty interval or no events gives an all-zero raster.
std::vector<int> signed_count_map(const EventStream& stream, const TimeInterval& interval);

// BT.601 luminance (0.299, 0.587, 0.114); single-channel images pass through.
Image luminance(const Image& img);

double mean_abs_diff(const Image& a, const Image& b);
double mean_value(const Image& img);

}  // namespace evd

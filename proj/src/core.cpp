#include "evdeblur/core.hpp"

#include <cmath>
#include <sstream>

namespace evd {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::unsorted: return "Unsorted";
    case Errc::out_of_bounds: return "OutOfBounds";
    case Errc::bad_polarity: return "BadPolarity";
    case Errc::out_of_span: return "OutOfSpan";
    case Errc::interval_out_of_span: return "IntervalOutOfSpan";
    case Errc::degenerate_video: return "DegenerateVideo";
    case Errc::interval_not_on_grid: return "IntervalNotOnGrid";
    case Errc::too_few_frames: return "TooFewFrames";
    case Errc::non_contiguous_exposures: return "NonContiguousExposures";
    case Errc::size_mismatch: return "SizeMismatch";
    case Errc::not_divisible: return "NotDivisible";
    case Errc::anchor_out_of_span: return "AnchorOutOfSpan";
    case Errc::resolution_mismatch: return "ResolutionMismatch";
    case Errc::anchor_out_of_exposure: return "AnchorOutOfExposure";
    case Errc::downscale: return "Downscale";
    case Errc::target_not_nested: return "TargetNotNested";
    case Errc::anchor_out_of_target: return "AnchorOutOfTarget";
    case Errc::too_few_latents: return "TooFewLatents";
    case Errc::target_out_of_span: return "TargetOutOfSpan";
    case Errc::zero_bins: return "ZeroBins";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::too_small: return "TooSmall";
    case Errc::video_too_short: return "VideoTooShort";
    case Errc::missing_file: return "MissingFile";
    case Errc::parse_error: return "ParseError";
    case Errc::invariant_violation: return "InvariantViolation";
    case Errc::aspect_mismatch: return "AspectMismatch";
    case Errc::bad_argument: return "BadArgument";
  }
  return "UnknownError";
}

std::optional<ValidationIssue> validate_stream(const EventStream& stream) {
  double prev_t = stream.span.start;
  for (std::size_t i = 0; i < stream.events.size(); ++i) {
    const Event& e = stream.events[i];
    std::ostringstream msg;
    if (e.p != 1 && e.p != -1) {
      msg << "event " << i << " has polarity " << e.p;
      return ValidationIssue{Errc::bad_polarity, i, msg.str()};
    }
    if (e.x < 0 || e.x >= stream.width || e.y < 0 || e.y >= stream.height) {
      msg << "event " << i << " at (" << e.x << "," << e.y << ") outside "
          << stream.width << "x" << stream.height;
      return ValidationIssue{Errc::out_of_bounds, i, msg.str()};
    }
    if (i > 0 && e.t < prev_t) {
      msg << "event " << i << " at t=" << e.t << " precedes t=" << prev_t;
      return ValidationIssue{Errc::unsorted, i, msg.str()};
    }
    if (!stream.span.contains(e.t)) {
      msg << "event " << i << " at t=" << e.t << " outside span ["
          << stream.span.start << "," << stream.span.end << "]";
      return ValidationIssue{Errc::out_of_span, i, msg.str()};
    }
    prev_t = e.t;
  }
  return std::nullopt;
}

EventStream slice(const EventStream& stream, const TimeInterval& interval) {
  if (!stream.span.contains(interval)) {
    throw Error(Errc::interval_out_of_span, "slice interval not inside stream span");
  }
  EventStream out;
  out.width = stream.width;
  out.height = stream.height;
  out.span = interval;
  for (const Event& e : stream.events) {
    if (e.t > interval.end) break;
    if (e.t >= interval.start) out.events.push_back(e);
  }
  return out;
}

std::vector<int> signed_count_map(const EventStream& stream, const TimeInterval& interval) {
  if (!stream.span.contains(interval)) {
    throw Error(Errc::interval_out_of_span, "count interval not inside stream span");
  }
  std::vector<int> counts(static_cast<std::size_t>(stream.width) * stream.height, 0);
  for (const Event& e : stream.events) {
    if (e.t > interval.end) break;
    if (e.t >= interval.start) {
      counts[static_cast<std::size_t>(e.y) * stream.width + e.x] += e.p;
    }
  }
  return counts;
}

Image luminance(const Image& img) {
  if (img.channels == 1) return img;
  Image out(img.width, img.height, 1);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      out.at(y, x) = 0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) +
                     0.114 * img.at(y, x, 2);
    }
  }
  return out;
}

double mean_abs_diff(const Image& a, const Image& b) {
  if (!a.same_shape(b)) {
    throw Error(Errc::size_mismatch, "mean_abs_diff over images of different shape");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) acc += std::abs(a.data[i] - b.data[i]);
  return a.data.empty() ? 0.0 : acc / static_cast<double>(a.data.size());
}

double mean_value(const Image& img) {
  double acc = 0.0;
  for (double v : img.data) acc += v;
  return img.data.empty() ? 0.0 : acc / static_cast<double>(img.data.size());
}

}  // namespace evd

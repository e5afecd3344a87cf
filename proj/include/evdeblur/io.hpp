#pragma once

#include <filesystem>

#include "evdeblur/core.hpp"
#include "evdeblur/eger.hpp"
#include "evdeblur/simulator.hpp"

namespace evd {

// Event file, little-endian binary: 16-byte header (magic "EVT1", width u32,
// height u32, record count u32) followed by 13-byte records
// (t f64, x u16, y u16, p s8 holding +1/-1).
void write_events(const std::filesystem::path& path, const EventStream& stream);

// Reads the binary format, or a plain-text CSV "t,x,y,p" with a one-line
// header (sensor dims then taken from the coordinate extent unless given).
EventStream read_events(const std::filesystem::path& path);
EventStream read_events_csv(const std::filesystem::path& path, int width = 0, int height = 0);

// Binary portable anymap, P5 gray / P6 color, maxval 255. Loading maps
// v/255 into [0,1]; saving rounds v*255 and clamps to [0,255].
Image read_pnm(const std::filesystem::path& path);
void write_pnm(const std::filesystem::path& path, const Image& img);

// Directory of anymap frames plus timestamps.txt (one float per line,
// matching the lexicographically sorted frame filenames).
SharpVideo read_video_dir(const std::filesystem::path& dir);
void write_video_dir(const std::filesystem::path& dir, const SharpVideo& video);

// EGER tensor: header (magic "EGR1", N u32, H u32, W u32, parent start/end
// f64, target start/end f64) then 6N*H*W float32 channel-major samples.
void write_eger(const std::filesystem::path& path, const EgerTensor& tensor);
EgerTensor read_eger(const std::filesystem::path& path);

// Peek at an event file header without loading the records.
struct EventFileInfo {
  int width = 0;
  int height = 0;
  std::uint32_t count = 0;
};
EventFileInfo read_event_header(const std::filesystem::path& path);

}  // namespace evd

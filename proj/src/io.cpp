#include "evdeblur/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace evd {

namespace {

namespace fs = std::filesystem;

void put_u32(std::ostream& os, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  os.write(b, 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_u16(std::ostream& os, std::uint16_t v) {
  const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
  os.write(b, 2);
}

std::uint16_t get_u16(std::istream& is) {
  unsigned char b[2];
  is.read(reinterpret_cast<char*>(b), 2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  os.write(b, 8);
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

void put_f32(std::ostream& os, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(os, bits);
}

float get_f32(std::istream& is) {
  const std::uint32_t bits = get_u32(is);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

std::ifstream open_input(const fs::path& path, std::ios::openmode mode = std::ios::binary) {
  if (!fs::exists(path)) {
    throw Error(Errc::missing_file, path.string());
  }
  std::ifstream is(path, mode);
  if (!is) throw Error(Errc::missing_file, "cannot open " + path.string());
  return is;
}

std::ofstream open_output(const fs::path& path, std::ios::openmode mode = std::ios::binary) {
  std::ofstream os(path, mode);
  if (!os) throw Error(Errc::missing_file, "cannot create " + path.string());
  return os;
}

// PNM token reader skipping whitespace and '#' comments.
int pnm_int(std::istream& is) {
  int ch = is.get();
  while (ch != EOF && (std::isspace(ch) || ch == '#')) {
    if (ch == '#') {
      while (ch != EOF && ch != '\n') ch = is.get();
    }
    ch = is.get();
  }
  int value = 0;
  bool any = false;
  while (ch != EOF && std::isdigit(ch)) {
    value = value * 10 + (ch - '0');
    any = true;
    ch = is.get();
  }
  if (!any) throw Error(Errc::parse_error, "malformed pnm header");
  return value;
}

}  // namespace

void write_events(const std::filesystem::path& path, const EventStream& stream) {
  std::ofstream os = open_output(path);
  os.write("EVT1", 4);
  put_u32(os, static_cast<std::uint32_t>(stream.width));
  put_u32(os, static_cast<std::uint32_t>(stream.height));
  put_u32(os, static_cast<std::uint32_t>(stream.events.size()));
  for (const Event& e : stream.events) {
    put_f64(os, e.t);
    put_u16(os, static_cast<std::uint16_t>(e.x));
    put_u16(os, static_cast<std::uint16_t>(e.y));
    os.put(static_cast<char>(static_cast<signed char>(e.p)));
  }
  if (!os) throw Error(Errc::parse_error, "short write to " + path.string());
}

EventFileInfo read_event_header(const std::filesystem::path& path) {
  std::ifstream is = open_input(path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "EVT1", 4) != 0) {
    throw Error(Errc::parse_error, "not an EVT1 file: " + path.string());
  }
  EventFileInfo info;
  info.width = static_cast<int>(get_u32(is));
  info.height = static_cast<int>(get_u32(is));
  info.count = get_u32(is);
  return info;
}

EventStream read_events(const std::filesystem::path& path) {
  std::ifstream is = open_input(path);
  char magic[4] = {0, 0, 0, 0};
  is.read(magic, 4);
  if (is && std::memcmp(magic, "EVT1", 4) == 0) {
    EventStream stream;
    stream.width = static_cast<int>(get_u32(is));
    stream.height = static_cast<int>(get_u32(is));
    const std::uint32_t count = get_u32(is);
    stream.events.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      Event e;
      e.t = get_f64(is);
      e.x = get_u16(is);
      e.y = get_u16(is);
      e.p = static_cast<signed char>(is.get());
      if (!is) throw Error(Errc::parse_error, "truncated event file " + path.string());
      stream.events.push_back(e);
    }
    if (!stream.events.empty()) {
      stream.span = {stream.events.front().t, stream.events.back().t};
    }
    return stream;
  }
  return read_events_csv(path);
}

EventStream read_events_csv(const std::filesystem::path& path, int width, int height) {
  std::ifstream is = open_input(path, std::ios::in);
  EventStream stream;
  std::string line;
  if (!std::getline(is, line)) throw Error(Errc::parse_error, "empty csv " + path.string());
  // one-line header "t,x,y,p"
  int max_x = -1, max_y = -1;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    Event e;
    char sep1, sep2, sep3;
    std::istringstream row(line);
    if (!(row >> e.t >> sep1 >> e.x >> sep2 >> e.y >> sep3 >> e.p) || sep1 != ',' ||
        sep2 != ',' || sep3 != ',') {
      std::ostringstream msg;
      msg << path.string() << " line " << lineno;
      throw Error(Errc::parse_error, msg.str());
    }
    max_x = std::max(max_x, e.x);
    max_y = std::max(max_y, e.y);
    stream.events.push_back(e);
  }
  stream.width = width > 0 ? width : max_x + 1;
  stream.height = height > 0 ? height : max_y + 1;
  if (!stream.events.empty()) {
    double lo = stream.events.front().t, hi = stream.events.front().t;
    for (const Event& e : stream.events) {
      lo = std::min(lo, e.t);
      hi = std::max(hi, e.t);
    }
    stream.span = {lo, hi};
  }
  return stream;
}

Image read_pnm(const std::filesystem::path& path) {
  std::ifstream is = open_input(path);
  char p = 0, kind = 0;
  is.get(p);
  is.get(kind);
  if (p != 'P' || (kind != '5' && kind != '6')) {
    throw Error(Errc::parse_error, "expected binary P5/P6 anymap: " + path.string());
  }
  const int channels = kind == '5' ? 1 : 3;
  const int w = pnm_int(is);
  const int h = pnm_int(is);
  const int maxval = pnm_int(is);
  if (maxval != 255) {
    throw Error(Errc::parse_error, "only maxval 255 anymaps are supported");
  }
  Image img(w, h, channels);
  std::vector<unsigned char> raw(img.data.size());
  is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!is) throw Error(Errc::parse_error, "truncated anymap " + path.string());
  for (std::size_t i = 0; i < raw.size(); ++i) img.data[i] = raw[i] / 255.0;
  return img;
}

void write_pnm(const std::filesystem::path& path, const Image& img) {
  if (img.channels != 1 && img.channels != 3) {
    throw Error(Errc::bad_argument, "anymap supports 1 or 3 channels");
  }
  std::ofstream os = open_output(path);
  os << (img.channels == 1 ? "P5" : "P6") << "\n"
     << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> raw(img.data.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double v = std::lround(img.data[i] * 255.0);
    raw[i] = static_cast<unsigned char>(std::clamp(v, 0.0, 255.0));
  }
  os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!os) throw Error(Errc::parse_error, "short write to " + path.string());
}

SharpVideo read_video_dir(const std::filesystem::path& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(Errc::missing_file, dir.string() + " is not a directory");
  }
  std::vector<fs::path> frames;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string ext = entry.path().extension().string();
    if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") frames.push_back(entry.path());
  }
  std::sort(frames.begin(), frames.end());
  if (frames.empty()) throw Error(Errc::missing_file, "no anymap frames in " + dir.string());

  std::ifstream ts = open_input(dir / "timestamps.txt", std::ios::in);
  SharpVideo video;
  double t;
  while (ts >> t) video.timestamps.push_back(t);
  if (video.timestamps.size() != frames.size()) {
    throw Error(Errc::parse_error, "timestamps.txt count differs from frame count");
  }
  for (const fs::path& f : frames) video.frames.push_back(read_pnm(f));
  video.width = video.frames.front().width;
  video.height = video.frames.front().height;
  return video;
}

void write_video_dir(const std::filesystem::path& dir, const SharpVideo& video) {
  fs::create_directories(dir);
  std::ofstream ts = open_output(dir / "timestamps.txt", std::ios::out);
  char name[32];
  for (std::size_t k = 0; k < video.frames.size(); ++k) {
    const char* ext = video.frames[k].channels == 1 ? "pgm" : "ppm";
    std::snprintf(name, sizeof(name), "frame_%05zu.%s", k, ext);
    write_pnm(dir / name, video.frames[k]);
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g\n", video.timestamps[k]);
    ts << buf;
  }
}

void write_eger(const std::filesystem::path& path, const EgerTensor& tensor) {
  std::ofstream os = open_output(path);
  os.write("EGR1", 4);
  put_u32(os, static_cast<std::uint32_t>(tensor.n_bins));
  put_u32(os, static_cast<std::uint32_t>(tensor.height));
  put_u32(os, static_cast<std::uint32_t>(tensor.width));
  put_f64(os, tensor.parent.start);
  put_f64(os, tensor.parent.end);
  put_f64(os, tensor.target.start);
  put_f64(os, tensor.target.end);
  for (double v : tensor.data) put_f32(os, static_cast<float>(v));
  if (!os) throw Error(Errc::parse_error, "short write to " + path.string());
}

EgerTensor read_eger(const std::filesystem::path& path) {
  std::ifstream is = open_input(path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "EGR1", 4) != 0) {
    throw Error(Errc::parse_error, "not an EGR1 file: " + path.string());
  }
  EgerTensor tensor;
  tensor.n_bins = static_cast<int>(get_u32(is));
  tensor.height = static_cast<int>(get_u32(is));
  tensor.width = static_cast<int>(get_u32(is));
  tensor.parent.start = get_f64(is);
  tensor.parent.end = get_f64(is);
  tensor.target.start = get_f64(is);
  tensor.target.end = get_f64(is);
  const std::size_t n =
      static_cast<std::size_t>(6 * tensor.n_bins) * tensor.height * tensor.width;
  tensor.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) tensor.data[i] = get_f32(is);
  if (!is) throw Error(Errc::parse_error, "truncated tensor file " + path.string());
  return tensor;
}

}  // namespace evd

#pragma once

// Frame sources (numbered raster directories, headerless raw streams),
// PGM/PPM/PNG codecs and region-of-interest extraction.

#include <png.h>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <tuple>
#include <string>
#include <vector>

#include "parkwatch/core.hpp"

namespace parkwatch {

namespace fs = std::filesystem;

// ----------------------------------------------------------------------------
// Luminance
// ----------------------------------------------------------------------------

/// Rec. 601 luma, rounded to nearest.
constexpr std::uint8_t luminance(std::uint8_t r, std::uint8_t g,
                                 std::uint8_t b) noexcept {
  const double y = 0.299 * r + 0.587 * g + 0.114 * b;
  const auto v = static_cast<int>(y + 0.5);
  return static_cast<std::uint8_t>(v > 255 ? 255 : v);
}

// ----------------------------------------------------------------------------
// Codecs
// ----------------------------------------------------------------------------

namespace detail {

inline std::string io_message(const fs::path& p, const std::string& what) {
  return p.string() + ": " + what;
}

// Reads the next whitespace-delimited header token, skipping '#' comments.
inline std::string pnm_token(std::istream& in) {
  std::string tok;
  char c = 0;
  while (in.get(c)) {
    if (c == '#') {
      std::string discard;
      std::getline(in, discard);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(c);
  }
  return tok;
}

struct PnmHeader {
  int channels = 1;
  int width = 0;
  int height = 0;
};

inline PnmHeader read_pnm_header(std::istream& in, const fs::path& p) {
  PnmHeader h;
  const auto magic = pnm_token(in);
  if (magic == "P5")
    h.channels = 1;
  else if (magic == "P6")
    h.channels = 3;
  else
    throw IoError(io_message(p, "unsupported PNM magic '" + magic + "'"));
  try {
    h.width = std::stoi(pnm_token(in));
    h.height = std::stoi(pnm_token(in));
    const int maxval = std::stoi(pnm_token(in));
    if (maxval != 255)
      throw IoError(io_message(p, "only maxval 255 is supported"));
  } catch (const std::logic_error&) {
    throw IoError(io_message(p, "malformed PNM header"));
  }
  if (h.width <= 0 || h.height <= 0)
    throw IoError(io_message(p, "non-positive PNM dimensions"));
  return h;
}

}  // namespace detail

inline Image8 read_pnm(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError(detail::io_message(p, "cannot open"));
  const auto h = detail::read_pnm_header(in, p);
  const auto n = static_cast<std::size_t>(h.width) * h.height;
  std::vector<std::uint8_t> raw(n * h.channels);
  in.read(reinterpret_cast<char*>(raw.data()),
          static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size())
    throw IoError(detail::io_message(p, "truncated pixel data"));
  if (h.channels == 1) return Image8(h.width, h.height, std::move(raw));
  std::vector<std::uint8_t> gray(n);
  for (std::size_t i = 0; i < n; ++i)
    gray[i] = luminance(raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]);
  return Image8(h.width, h.height, std::move(gray));
}

inline void write_pgm(const fs::path& p, const Image8& img) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError(detail::io_message(p, "cannot open for writing"));
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels().data()),
            static_cast<std::streamsize>(img.size()));
  if (!out) throw IoError(detail::io_message(p, "write failed"));
}

inline Image8 read_png(const fs::path& p) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, p.string().c_str()))
    throw IoError(detail::io_message(p, std::string("png decode failed: ") +
                                            image.message));
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const int w = static_cast<int>(image.width);
  const int h = static_cast<int>(image.height);
  std::vector<std::uint8_t> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw IoError(detail::io_message(p, "png decode failed: " + msg));
  }
  if (!color) return Image8(w, h, std::move(buf));
  std::vector<std::uint8_t> gray(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < gray.size(); ++i)
    gray[i] = luminance(buf[3 * i], buf[3 * i + 1], buf[3 * i + 2]);
  return Image8(w, h, std::move(gray));
}

inline std::pair<int, int> read_raster_size(const fs::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".png") {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, p.string().c_str()))
      throw IoError(detail::io_message(p, std::string("png decode failed: ") +
                                              image.message));
    const std::pair<int, int> wh{static_cast<int>(image.width),
                                 static_cast<int>(image.height)};
    png_image_free(&image);
    return wh;
  }
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError(detail::io_message(p, "cannot open"));
  const auto h = detail::read_pnm_header(in, p);
  return {h.width, h.height};
}

inline Image8 read_raster(const fs::path& p) {
  return p.extension() == ".png" ? read_png(p) : read_pnm(p);
}

// ----------------------------------------------------------------------------
// FrameSource
// ----------------------------------------------------------------------------

/// Ordered frame sequence read from disk. Frames are decoded lazily.
class FrameSource {
 public:
  /// Directory of `frame_%06d.{pgm,ppm,png}` files, indices contiguous from 0.
  static FrameSource open_directory(const fs::path& dir, double fps) {
    check_fps(fps);
    if (!fs::exists(dir)) throw IoError(detail::io_message(dir, "no such path"));
    if (!fs::is_directory(dir))
      throw IoError(detail::io_message(dir, "not a directory"));

    static const std::regex pattern(R"(frame_(\d{6})\.(pgm|ppm|png))");
    std::map<long, fs::path> found;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      std::smatch m;
      const auto name = entry.path().filename().string();
      if (!std::regex_match(name, m, pattern)) continue;
      const long idx = std::stol(m[1].str());
      if (!found.emplace(idx, entry.path()).second)
        throw IoError(detail::io_message(
            dir, "duplicate frame index " + std::to_string(idx)));
    }
    if (found.empty()) throw IoError(detail::io_message(dir, "no frames"));

    FrameSource src;
    src.fps_ = fps;
    long expected = 0;
    for (auto& [idx, path] : found) {
      if (idx != expected)
        throw IoError(detail::io_message(
            dir, "non-contiguous frame indices: missing frame_" +
                     std::to_string(expected)));
      src.files_.push_back(path);
      ++expected;
    }
    std::tie(src.width_, src.height_) = read_raster_size(src.files_.front());
    for (const auto& f : src.files_) {
      const auto [w, h] = read_raster_size(f);
      if (w != src.width_ || h != src.height_)
        throw DimensionError(detail::io_message(
            f, "inconsistent frame dimensions " + std::to_string(w) + "x" +
                   std::to_string(h)));
    }
    src.count_ = static_cast<std::int64_t>(src.files_.size());
    return src;
  }

  /// Headerless 8-bit planar stream of width*height frames.
  static FrameSource open_raw(const fs::path& file, int width, int height,
                              double fps) {
    check_fps(fps);
    if (!fs::exists(file))
      throw IoError(detail::io_message(file, "no such path"));
    if (width <= 0 || height <= 0)
      throw DimensionError("raw frame dimensions must be positive");
    const auto bytes = fs::file_size(file);
    const auto frame_bytes = static_cast<std::uintmax_t>(width) * height;
    if (bytes % frame_bytes != 0)
      throw DimensionError(detail::io_message(
          file, "length " + std::to_string(bytes) +
                    " is not a multiple of the frame size"));
    if (bytes == 0) throw IoError(detail::io_message(file, "no frames"));
    FrameSource src;
    src.fps_ = fps;
    src.raw_ = file;
    src.width_ = width;
    src.height_ = height;
    src.count_ = static_cast<std::int64_t>(bytes / frame_bytes);
    return src;
  }

  /// Next frame, or std::nullopt once the source is exhausted.
  std::optional<GrayFrame> next() {
    if (cursor_ >= count_) return std::nullopt;
    const auto idx = cursor_;
    Image8 img;
    if (raw_) {
      std::ifstream in(*raw_, std::ios::binary);
      if (!in) throw IoError(detail::io_message(*raw_, "cannot open"));
      const auto n = static_cast<std::size_t>(width_) * height_;
      std::vector<std::uint8_t> buf(n);
      in.seekg(static_cast<std::streamoff>(n * static_cast<std::size_t>(idx)));
      in.read(reinterpret_cast<char*>(buf.data()),
              static_cast<std::streamsize>(n));
      if (static_cast<std::size_t>(in.gcount()) != n)
        throw IoError(detail::io_message(*raw_, "short read"));
      img = Image8(width_, height_, std::move(buf));
    } else {
      const auto& f = files_[static_cast<std::size_t>(idx)];
      img = read_raster(f);
      if (img.width() != width_ || img.height() != height_)
        throw DimensionError(
            detail::io_message(f, "inconsistent frame dimensions"));
    }
    ++cursor_;
    return GrayFrame{std::move(img), idx, static_cast<double>(idx) / fps_};
  }

  std::int64_t frame_count() const noexcept { return count_; }
  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double fps() const noexcept { return fps_; }

 private:
  FrameSource() = default;

  static void check_fps(double fps) {
    if (!(fps > 0.0) || !std::isfinite(fps))
      throw ConfigError("fps must be positive");
  }

  std::vector<fs::path> files_;
  std::optional<fs::path> raw_;
  int width_ = 0;
  int height_ = 0;
  std::int64_t count_ = 0;
  std::int64_t cursor_ = 0;
  double fps_ = 30.0;
};

inline std::vector<GrayFrame> load_all(FrameSource& src) {
  std::vector<GrayFrame> frames;
  frames.reserve(static_cast<std::size_t>(src.frame_count()));
  while (auto f = src.next()) frames.push_back(std::move(*f));
  return frames;
}

// ----------------------------------------------------------------------------
// Regions of interest
// ----------------------------------------------------------------------------

/// Rectangles concatenated left-to-right; all share one height.
struct RoiSpec {
  std::vector<Rect> rects;

  bool empty() const noexcept { return rects.empty(); }

  int output_width() const noexcept {
    int w = 0;
    for (const auto& r : rects) w += r.w;
    return w;
  }
  int output_height() const noexcept {
    return rects.empty() ? 0 : rects.front().h;
  }

  void validate(int frame_width, int frame_height) const {
    if (rects.empty()) throw DimensionError("roi: no rectangles");
    for (std::size_t i = 0; i < rects.size(); ++i) {
      const auto& r = rects[i];
      if (!r.inside(frame_width, frame_height)) {
        std::ostringstream os;
        os << "roi[" << i << "] (" << r.x << ',' << r.y << ',' << r.w << ','
           << r.h << ") is outside the " << frame_width << 'x' << frame_height
           << " frame";
        throw DimensionError(os.str());
      }
      if (r.h != rects.front().h)
        throw DimensionError("roi[" + std::to_string(i) +
                             "]: height differs from roi[0]");
    }
  }
};

inline GrayFrame extract_roi(const GrayFrame& frame, const RoiSpec& spec) {
  spec.validate(frame.width(), frame.height());
  Image8 out(spec.output_width(), spec.output_height());
  int x0 = 0;
  for (const auto& r : spec.rects) {
    for (int y = 0; y < r.h; ++y) {
      auto src = frame.image.row(r.y + y).subspan(
          static_cast<std::size_t>(r.x), static_cast<std::size_t>(r.w));
      std::copy(src.begin(), src.end(),
                out.row(y).begin() + static_cast<std::ptrdiff_t>(x0));
    }
    x0 += r.w;
  }
  return GrayFrame{std::move(out), frame.frame_index, frame.timestamp_s};
}

}  // namespace parkwatch

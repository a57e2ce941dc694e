#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace parkwatch {

// ----------------------------------------------------------------------------
// Errors
// ----------------------------------------------------------------------------

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A patch or region whose luminance has zero variance.
struct ZeroVarianceError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ----------------------------------------------------------------------------
// Rect
// ----------------------------------------------------------------------------

struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  constexpr int right() const noexcept { return x + w; }
  constexpr int bottom() const noexcept { return y + h; }
  constexpr std::int64_t area() const noexcept {
    return static_cast<std::int64_t>(w) * h;
  }
  constexpr bool empty() const noexcept { return w <= 0 || h <= 0; }

  constexpr bool inside(int width, int height) const noexcept {
    return x >= 0 && y >= 0 && w > 0 && h > 0 && right() <= width &&
           bottom() <= height;
  }

  constexpr Rect expanded(int by) const noexcept {
    return {x - by, y - by, w + 2 * by, h + 2 * by};
  }

  friend constexpr bool operator==(const Rect&, const Rect&) = default;
};

constexpr Rect intersect(const Rect& a, const Rect& b) noexcept {
  const int x0 = std::max(a.x, b.x);
  const int y0 = std::max(a.y, b.y);
  const int x1 = std::min(a.right(), b.right());
  const int y1 = std::min(a.bottom(), b.bottom());
  if (x1 <= x0 || y1 <= y0) return {x0, y0, 0, 0};
  return {x0, y0, x1 - x0, y1 - y0};
}

constexpr Rect clip(const Rect& r, int width, int height) noexcept {
  return intersect(r, Rect{0, 0, width, height});
}

// ----------------------------------------------------------------------------
// Raster
// ----------------------------------------------------------------------------

/// Dense row-major 2-D array.
template <typename T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  Raster(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    if (width < 0 || height < 0)
      throw DimensionError("raster dimensions must be non-negative");
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }
  Raster(int width, int height, std::vector<T> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width < 0 || height < 0 ||
        data_.size() != static_cast<std::size_t>(width) * height)
      throw DimensionError("pixel count does not match width x height");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int x, int y) noexcept {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  const T& operator()(int x, int y) const noexcept {
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }

  std::span<T> row(int y) noexcept {
    return {data_.data() + static_cast<std::size_t>(y) * width_,
            static_cast<std::size_t>(width_)};
  }
  std::span<const T> row(int y) const noexcept {
    return {data_.data() + static_cast<std::size_t>(y) * width_,
            static_cast<std::size_t>(width_)};
  }

  std::span<T> pixels() noexcept { return data_; }
  std::span<const T> pixels() const noexcept { return data_; }

  bool same_shape(const Raster& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  /// Copy of the pixels under `r`, which must lie inside the raster.
  Raster crop(const Rect& r) const {
    if (!r.inside(width_, height_))
      throw DimensionError("crop rectangle outside raster");
    Raster out(r.w, r.h);
    for (int y = 0; y < r.h; ++y) {
      auto src = row(r.y + y).subspan(static_cast<std::size_t>(r.x),
                                      static_cast<std::size_t>(r.w));
      std::copy(src.begin(), src.end(), out.row(y).begin());
    }
    return out;
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using Image8 = Raster<std::uint8_t>;

/// One grayscale frame of a sequence.
struct GrayFrame {
  Image8 image;
  std::int64_t frame_index = 0;
  double timestamp_s = 0.0;

  int width() const noexcept { return image.width(); }
  int height() const noexcept { return image.height(); }
};

inline void require_same_shape(int w0, int h0, int w1, int h1,
                               const char* what) {
  if (w0 != w1 || h0 != h1)
    throw DimensionError(std::string(what) + ": dimension mismatch (" +
                         std::to_string(w0) + "x" + std::to_string(h0) +
                         " vs " + std::to_string(w1) + "x" +
                         std::to_string(h1) + ")");
}

inline std::uint8_t clamp_u8(double v) noexcept {
  if (v <= 0.0) return 0;
  if (v >= 255.0) return 255;
  return static_cast<std::uint8_t>(v + 0.5);
}

}  // namespace parkwatch

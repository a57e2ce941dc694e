#pragma once

// Binary masks: thresholded differencing, square-element morphology,
// moving-pixel removal and 8-connected component labeling.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <vector>

#include "parkwatch/core.hpp"

namespace parkwatch {

/// One byte per pixel, 0 or 1.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height) : raster_(width, height, 0) {}

  int width() const noexcept { return raster_.width(); }
  int height() const noexcept { return raster_.height(); }

  bool test(int x, int y) const noexcept { return raster_(x, y) != 0; }
  void set(int x, int y, bool v = true) noexcept {
    raster_(x, y) = v ? 1 : 0;
  }

  std::span<std::uint8_t> bits() noexcept { return raster_.pixels(); }
  std::span<const std::uint8_t> bits() const noexcept {
    return raster_.pixels();
  }

  std::int64_t count() const noexcept {
    std::int64_t n = 0;
    for (auto b : raster_.pixels()) n += b;
    return n;
  }
  std::int64_t count_in(const Rect& r) const noexcept {
    const auto c = clip(r, width(), height());
    std::int64_t n = 0;
    for (int y = c.y; y < c.bottom(); ++y)
      for (int x = c.x; x < c.right(); ++x) n += raster_(x, y);
    return n;
  }
  bool none() const noexcept { return count() == 0; }

  void clear_rect(const Rect& r) noexcept {
    const auto c = clip(r, width(), height());
    for (int y = c.y; y < c.bottom(); ++y)
      for (int x = c.x; x < c.right(); ++x) raster_(x, y) = 0;
  }

  BinaryMask complement() const {
    BinaryMask out = *this;
    for (auto& b : out.bits()) b = b ? 0 : 1;
    return out;
  }

  /// Grayscale rendering (0 / 255) for debug dumps.
  Image8 to_image() const {
    Image8 img(width(), height());
    auto src = bits();
    auto dst = img.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 255 : 0;
    return img;
  }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  Raster<std::uint8_t> raster_;
};

struct StructuringElement {
  int radius = 1;  // square of side 2r+1
};

struct Blob {
  int label = 0;
  Rect bbox;
  std::int64_t area = 0;
  friend bool operator==(const Blob&, const Blob&) = default;
};

// ----------------------------------------------------------------------------
// Differencing
// ----------------------------------------------------------------------------

/// Bit set iff |a - b| > tau.
inline BinaryMask threshold_absdiff(const Image8& a, const Image8& b, int tau) {
  require_same_shape(a.width(), a.height(), b.width(), b.height(),
                     "threshold_absdiff");
  BinaryMask out(a.width(), a.height());
  auto pa = a.pixels();
  auto pb = b.pixels();
  auto dst = out.bits();
  for (std::size_t i = 0; i < dst.size(); ++i)
    dst[i] = std::abs(int{pa[i]} - int{pb[i]}) > tau ? 1 : 0;
  return out;
}

inline BinaryMask threshold_absdiff(const GrayFrame& a, const GrayFrame& b,
                                    int tau) {
  return threshold_absdiff(a.image, b.image, tau);
}

/// Motion mask between consecutive frames.
inline BinaryMask frame_difference(const GrayFrame& curr,
                                   const GrayFrame& prev, int tau_motion) {
  return threshold_absdiff(curr.image, prev.image, tau_motion);
}

// ----------------------------------------------------------------------------
// Morphology
// ----------------------------------------------------------------------------
//
// The square element is separable, so both operations run as a horizontal
// pass followed by a vertical pass. Erosion treats out-of-bounds pixels as 0;
// dilation ignores them.

namespace detail {

// out[i] = AND (erode) or OR (dilate) of in[i-r .. i+r] along one axis,
// using a running count of set bits in the window.
template <bool Erode>
void morph_line(const std::uint8_t* in, std::uint8_t* out, int n,
                std::ptrdiff_t stride, int r) {
  int ones = 0;
  for (int i = 0; i < std::min(r, n); ++i) ones += in[i * stride];
  for (int i = 0; i < n; ++i) {
    if (i + r < n) ones += in[(i + r) * stride];
    if (i - r - 1 >= 0) ones -= in[(i - r - 1) * stride];
    if constexpr (Erode)
      out[i * stride] = (ones == 2 * r + 1) ? 1 : 0;
    else
      out[i * stride] = ones > 0 ? 1 : 0;
  }
}

template <bool Erode>
BinaryMask morph(const BinaryMask& mask, StructuringElement se) {
  if (se.radius < 1)
    throw std::invalid_argument("structuring element radius must be >= 1");
  const int w = mask.width(), h = mask.height();
  BinaryMask tmp(w, h), out(w, h);
  const auto* src = mask.bits().data();
  auto* mid = tmp.bits().data();
  auto* dst = out.bits().data();
  for (int y = 0; y < h; ++y)
    morph_line<Erode>(src + static_cast<std::ptrdiff_t>(y) * w,
                      mid + static_cast<std::ptrdiff_t>(y) * w, w, 1,
                      se.radius);
  for (int x = 0; x < w; ++x)
    morph_line<Erode>(mid + x, dst + x, h, w, se.radius);
  return out;
}

}  // namespace detail

inline BinaryMask erode(const BinaryMask& mask, StructuringElement se = {}) {
  return detail::morph<true>(mask, se);
}

inline BinaryMask dilate(const BinaryMask& mask, StructuringElement se = {}) {
  return detail::morph<false>(mask, se);
}

/// Foreground bits with no motion bit within `guard_radius` (Chebyshev).
inline BinaryMask remove_moving_pixels(const BinaryMask& foreground,
                                       const BinaryMask& motion,
                                       int guard_radius) {
  require_same_shape(foreground.width(), foreground.height(), motion.width(),
                     motion.height(), "remove_moving_pixels");
  const BinaryMask halo =
      guard_radius > 0 ? dilate(motion, {guard_radius}) : motion;
  BinaryMask out(foreground.width(), foreground.height());
  auto f = foreground.bits();
  auto m = halo.bits();
  auto dst = out.bits();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = f[i] && !m[i];
  return out;
}

// ----------------------------------------------------------------------------
// Connected components
// ----------------------------------------------------------------------------

struct Labeling {
  Raster<int> labels;  // 0 = background, else index into blobs + 1
  std::vector<Blob> blobs;
};

/// All 8-connected components, labeled in raster order of first pixel.
inline Labeling label_all(const BinaryMask& mask) {
  const int w = mask.width(), h = mask.height();
  Labeling out{Raster<int>(w, h, 0), {}};
  std::vector<std::pair<int, int>> stack;
  for (int y0 = 0; y0 < h; ++y0)
    for (int x0 = 0; x0 < w; ++x0) {
      if (!mask.test(x0, y0) || out.labels(x0, y0) != 0) continue;
      const int label = static_cast<int>(out.blobs.size()) + 1;
      int minx = x0, maxx = x0, miny = y0, maxy = y0;
      std::int64_t area = 0;
      out.labels(x0, y0) = label;
      stack.assign(1, {x0, y0});
      while (!stack.empty()) {
        const auto [x, y] = stack.back();
        stack.pop_back();
        ++area;
        minx = std::min(minx, x);
        maxx = std::max(maxx, x);
        miny = std::min(miny, y);
        maxy = std::max(maxy, y);
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx, ny = y + dy;
            if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
            if (!mask.test(nx, ny) || out.labels(nx, ny) != 0) continue;
            out.labels(nx, ny) = label;
            stack.emplace_back(nx, ny);
          }
      }
      out.blobs.push_back(
          {label, Rect{minx, miny, maxx - minx + 1, maxy - miny + 1}, area});
    }
  return out;
}

/// Components with area >= min_area, ordered by (bbox.y, bbox.x) and
/// relabeled densely from 1.
inline std::vector<Blob> label_components(const BinaryMask& mask,
                                          std::int64_t min_area) {
  auto blobs = label_all(mask).blobs;
  std::erase_if(blobs, [&](const Blob& b) { return b.area < min_area; });
  std::stable_sort(blobs.begin(), blobs.end(),
                   [](const Blob& a, const Blob& b) {
                     return a.bbox.y != b.bbox.y ? a.bbox.y < b.bbox.y
                                                 : a.bbox.x < b.bbox.x;
                   });
  for (std::size_t i = 0; i < blobs.size(); ++i)
    blobs[i].label = static_cast<int>(i) + 1;
  return blobs;
}

}  // namespace parkwatch

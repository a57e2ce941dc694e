#pragma once

// Per-pixel adaptive Gaussian mixture background model.
//
// Each pixel keeps up to K components (weight, mean, variance). An
// observation matches the component with the smallest normalized distance
// among those within `match_sigmas` standard deviations. With learning
// rate a:
//   w_k   <- (1 - a) w_k + a [k matched]
//   mu_m  <- mu_m + a (x - mu_m)
//   var_m <- max(floor, (1 - a) var_m + a (x - mu_m_old)^2)
// An unmatched observation adds a component (a, x, initial_variance), or
// replaces the lowest-weight one when K are in use; weights are then
// renormalized. The background set is the highest-weight components whose
// cumulative weight first exceeds `background_ratio`.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "parkwatch/binary_ops.hpp"
#include "parkwatch/core.hpp"

namespace parkwatch {

struct GmmParams {
  int components = 3;
  double match_sigmas = 2.5;
  double background_ratio = 0.7;
  double initial_variance = 225.0;
  double variance_floor = 4.0;

  static constexpr int kMaxComponents = 8;

  friend bool operator==(const GmmParams&, const GmmParams&) = default;

  void validate() const {
    if (components < 1 || components > kMaxComponents)
      throw ConfigError("gmm.components must be in [1, " +
                        std::to_string(kMaxComponents) + "]");
    if (!(match_sigmas > 0.0)) throw ConfigError("gmm.match_sigmas must be > 0");
    if (!(background_ratio > 0.0 && background_ratio <= 1.0))
      throw ConfigError("gmm.background_ratio must be in (0, 1]");
    if (!(variance_floor > 0.0))
      throw ConfigError("gmm.variance_floor must be > 0");
    if (!(initial_variance >= variance_floor))
      throw ConfigError("gmm.initial_variance must be >= gmm.variance_floor");
  }
};

struct LearningRate {
  double alpha = 0.02;
  int update_stride = 1;

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0))
      throw ConfigError("learning rate alpha must be in [0, 1]");
    if (update_stride < 1) throw ConfigError("update stride must be >= 1");
  }

  bool updates_on(std::int64_t frame_index) const noexcept {
    return alpha > 0.0 && frame_index % update_stride == 0;
  }
};

class GmmBackground {
 public:
  struct Component {
    double weight = 0.0;
    double mean = 0.0;
    double variance = 0.0;
    friend bool operator==(const Component&, const Component&) = default;
  };

  GmmBackground(int width, int height, GmmParams params = {})
      : width_(width), height_(height), params_(params) {
    params_.validate();
    if (width <= 0 || height <= 0)
      throw DimensionError("background model dimensions must be positive");
    const auto n = static_cast<std::size_t>(width) * height;
    comps_.assign(n * static_cast<std::size_t>(params_.components), {});
    counts_.assign(n, 0);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  const GmmParams& params() const noexcept { return params_; }
  bool initialized() const noexcept { return initialized_; }

  /// Updates the model with `frame` (unless the rate freezes it on this
  /// frame) and returns the foreground mask computed against the model
  /// state before the update.
  BinaryMask update(const GrayFrame& frame, const LearningRate& rate) {
    require_same_shape(width_, height_, frame.width(), frame.height(),
                       "gmm_update");
    rate.validate();
    BinaryMask fg(width_, height_);
    auto px = frame.image.pixels();
    auto bits = fg.bits();
    const bool learn = rate.updates_on(frame.frame_index);
    for (std::size_t i = 0; i < px.size(); ++i) {
      const double x = px[i];
      if (counts_[i] == 0) {
        // An uninitialized pixel adopts the observation as its background.
        comp(i, 0) = {1.0, x, params_.initial_variance};
        counts_[i] = 1;
        continue;
      }
      bits[i] = learn ? update_pixel(i, x, rate.alpha) : classify(i, x);
    }
    initialized_ = true;
    return fg;
  }

  /// Mean of the highest-weight component at each pixel, rounded.
  Image8 background_image() const {
    if (!initialized_)
      throw std::logic_error("background_image: model has no observations");
    Image8 out(width_, height_);
    auto dst = out.pixels();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      const int n = counts_[i];
      int best = 0;
      for (int k = 1; k < n; ++k)
        if (comp(i, k).weight > comp(i, best).weight) best = k;
      dst[i] = clamp_u8(comp(i, best).mean);
    }
    return out;
  }

  /// Re-seeds every pixel under `r` from `frame` as a single component.
  void reset_region(const GrayFrame& frame, const Rect& r) {
    require_same_shape(width_, height_, frame.width(), frame.height(),
                       "reset_region");
    const auto c = clip(r, width_, height_);
    for (int y = c.y; y < c.bottom(); ++y)
      for (int x = c.x; x < c.right(); ++x) {
        const auto i = static_cast<std::size_t>(y) * width_ + x;
        for (int k = 0; k < params_.components; ++k) comp(i, k) = {};
        comp(i, 0) = {1.0, static_cast<double>(frame.image(x, y)),
                      params_.initial_variance};
        counts_[i] = 1;
      }
  }

  std::span<const Component> components_at(int x, int y) const noexcept {
    const auto i = static_cast<std::size_t>(y) * width_ + x;
    return {comps_.data() + i * params_.components,
            static_cast<std::size_t>(counts_[i])};
  }

  friend bool operator==(const GmmBackground&, const GmmBackground&) = default;

 private:
  Component& comp(std::size_t i, int k) noexcept {
    return comps_[i * static_cast<std::size_t>(params_.components) + k];
  }
  const Component& comp(std::size_t i, int k) const noexcept {
    return comps_[i * static_cast<std::size_t>(params_.components) + k];
  }

  int best_match(std::size_t i, double x) const noexcept {
    const double limit = params_.match_sigmas * params_.match_sigmas;
    int best = -1;
    double best_d = 0.0;
    for (int k = 0; k < counts_[i]; ++k) {
      const auto& c = comp(i, k);
      const double diff = x - c.mean;
      const double d = diff * diff / c.variance;  // squared sigmas
      if (d > limit) continue;
      if (best < 0 || d < best_d ||
          (d == best_d && c.weight > comp(i, best).weight)) {
        best = k;
        best_d = d;
      }
    }
    return best;
  }

  // Components rank by weight (descending, ties by index); k is background
  // when the components ranked above it carry no more than the ratio.
  bool in_background_set(std::size_t i, int k) const noexcept {
    const double wk = comp(i, k).weight;
    double above = 0.0;
    for (int j = 0; j < counts_[i]; ++j) {
      const double wj = comp(i, j).weight;
      if (wj > wk || (wj == wk && j < k)) above += wj;
    }
    return above <= params_.background_ratio;
  }

  std::uint8_t classify(std::size_t i, double x) const noexcept {
    const int m = best_match(i, x);
    return (m >= 0 && in_background_set(i, m)) ? 0 : 1;
  }

  std::uint8_t update_pixel(std::size_t i, double x, double alpha) noexcept {
    const int m = best_match(i, x);
    const std::uint8_t fg = (m >= 0 && in_background_set(i, m)) ? 0 : 1;
    const int n = counts_[i];
    for (int k = 0; k < n; ++k) comp(i, k).weight *= (1.0 - alpha);
    if (m >= 0) {
      auto& c = comp(i, m);
      c.weight += alpha;
      const double d = x - c.mean;
      c.mean += alpha * d;
      c.variance = std::max(params_.variance_floor,
                            (1.0 - alpha) * c.variance + alpha * d * d);
      // Matched update preserves the weight sum up to rounding.
      normalize(i);
      return fg;
    }
    int slot = n;
    if (n < params_.components) {
      counts_[i] = static_cast<std::uint8_t>(n + 1);
    } else {
      slot = 0;
      for (int k = 1; k < n; ++k)
        if (comp(i, k).weight < comp(i, slot).weight) slot = k;
    }
    comp(i, slot) = {alpha, x, params_.initial_variance};
    normalize(i);
    return fg;
  }

  void normalize(std::size_t i) noexcept {
    double sum = 0.0;
    for (int k = 0; k < counts_[i]; ++k) sum += comp(i, k).weight;
    if (sum <= 0.0) return;
    for (int k = 0; k < counts_[i]; ++k) comp(i, k).weight /= sum;
  }

  int width_ = 0;
  int height_ = 0;
  GmmParams params_;
  std::vector<Component> comps_;
  std::vector<std::uint8_t> counts_;
  bool initialized_ = false;
};

}  // namespace parkwatch

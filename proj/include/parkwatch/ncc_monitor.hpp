#pragma once

// Normalized cross-correlation monitoring of stationary objects.
//
//   gamma = sum (r - mean_r)(c - mean_c)
//           / ( sqrt(sum (r - mean_r)^2) * sqrt(sum (c - mean_c)^2) )
//
// Each monitored object keeps a reference patch captured when it was handed
// over. Checks run on a fixed cadence of frames; a check is postponed to the
// next frame while too many moving pixels surround the object.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "parkwatch/binary_ops.hpp"
#include "parkwatch/core.hpp"
#include "parkwatch/tracking.hpp"

namespace parkwatch {

// ----------------------------------------------------------------------------
// ncc
// ----------------------------------------------------------------------------

/// NCC of two equally-sized patches. Integer patches use exact integer
/// moments; floating-point patches are mean-centered in double precision.
/// Throws ZeroVarianceError if either patch is constant.
template <typename T>
double ncc(const Raster<T>& reference, const Raster<T>& current) {
  require_same_shape(reference.width(), reference.height(), current.width(),
                     current.height(), "ncc");
  const auto r = reference.pixels();
  const auto c = current.pixels();
  const auto n = r.size();
  if (n == 0) throw DimensionError("ncc: empty patch");

  if constexpr (std::integral<T>) {
    static_assert(sizeof(T) <= 2, "integer ncc path assumes <= 16-bit pixels");
    std::int64_t sr = 0, sc = 0, srr = 0, scc = 0, src = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::int64_t a = r[i], b = c[i];
      sr += a;
      sc += b;
      srr += a * a;
      scc += b * b;
      src += a * b;
    }
    const auto nn = static_cast<std::int64_t>(n);
    // n * sum(x^2) - (sum x)^2 = n * sum (x - mean)^2, exact in int64 for
    // patches up to ~2^20 pixels of 8-bit data.
    const std::int64_t vr = nn * srr - sr * sr;
    const std::int64_t vc = nn * scc - sc * sc;
    const std::int64_t cov = nn * src - sr * sc;
    if (vr == 0 || vc == 0)
      throw ZeroVarianceError("ncc: constant patch has zero variance");
    const double gamma =
        static_cast<double>(cov) /
        std::sqrt(static_cast<double>(vr) * static_cast<double>(vc));
    return std::clamp(gamma, -1.0, 1.0);
  } else {
    double mr = 0.0, mc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mr += static_cast<double>(r[i]);
      mc += static_cast<double>(c[i]);
    }
    mr /= static_cast<double>(n);
    mc /= static_cast<double>(n);
    double num = 0.0, dr = 0.0, dc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = static_cast<double>(r[i]) - mr;
      const double b = static_cast<double>(c[i]) - mc;
      num += a * b;
      dr += a * a;
      dc += b * b;
    }
    if (dr == 0.0 || dc == 0.0)
      throw ZeroVarianceError("ncc: constant patch has zero variance");
    return num / (std::sqrt(dr) * std::sqrt(dc));
  }
}

// ----------------------------------------------------------------------------
// References and occlusion
// ----------------------------------------------------------------------------

struct ReferencePatch {
  int object_id = 0;
  Rect bbox;
  Image8 pixels;
  std::int64_t registered_frame = 0;
  std::int64_t last_refresh_frame = 0;
  std::optional<double> last_ncc;
  bool postponed = false;  // retry on the next frame
  int consecutive_postponements = 0;
};

inline bool is_constant(const Image8& img) {
  const auto px = img.pixels();
  return std::adjacent_find(px.begin(), px.end(), std::not_equal_to<>{}) ==
         px.end();
}

/// Captures the patch under the object's box as its reference.
inline ReferencePatch register_reference(const GrayFrame& frame,
                                         const TrackedObject& object) {
  const auto& b = object.bbox;
  if (b.empty()) throw DimensionError("register: degenerate bbox");
  if (!b.inside(frame.width(), frame.height()))
    throw DimensionError("register: bbox outside frame");
  auto patch = frame.image.crop(b);
  if (is_constant(patch))
    throw ZeroVarianceError("register: object " + std::to_string(object.id) +
                            " patch is constant");
  return {object.id, b, std::move(patch), frame.frame_index,
          frame.frame_index, std::nullopt, false, 0};
}

/// True iff the motion pixels in `bbox` grown by `halo` (clipped to the
/// frame) exceed `occlusion_fraction` of the bbox area.
inline bool occlusion_guard(const BinaryMask& motion, const Rect& bbox,
                            int halo, double occlusion_fraction) {
  const auto region = clip(bbox.expanded(halo), motion.width(), motion.height());
  const auto moving = motion.count_in(region);
  return static_cast<double>(moving) >
         occlusion_fraction * static_cast<double>(bbox.area());
}

// ----------------------------------------------------------------------------
// Monitor
// ----------------------------------------------------------------------------

struct MonitorParams {
  double ncc_threshold = 0.90;
  int halo = 4;
  double occlusion_fraction = 0.10;
  double refresh_interval_s = 30.0;
  double refresh_min_ncc = 0.95;
  bool refresh_enabled = true;

  void validate() const {
    if (!(ncc_threshold >= -1.0 && ncc_threshold <= 1.0))
      throw ConfigError("monitor.ncc_threshold must be in [-1, 1]");
    if (halo < 0) throw ConfigError("monitor.halo must be >= 0");
    if (!(occlusion_fraction >= 0.0))
      throw ConfigError("monitor.occlusion_fraction must be >= 0");
    if (!(refresh_interval_s > 0.0))
      throw ConfigError("monitor.refresh_interval_s must be > 0");
    if (!(refresh_min_ncc >= -1.0 && refresh_min_ncc <= 1.0))
      throw ConfigError("monitor.refresh_min_ncc must be in [-1, 1]");
  }
};

enum class MonitorVerdict { Present, Moved, Postponed, Skipped };

inline const char* to_string(MonitorVerdict v) noexcept {
  switch (v) {
    case MonitorVerdict::Present: return "present";
    case MonitorVerdict::Moved: return "moved";
    case MonitorVerdict::Postponed: return "postponed";
    case MonitorVerdict::Skipped: return "skipped";
  }
  return "?";
}

struct MonitorOutcome {
  int object_id = 0;
  MonitorVerdict verdict = MonitorVerdict::Skipped;
  std::optional<double> gamma;
};

/// Frames between scheduled checks: about two checks per second.
inline std::int64_t check_cadence(double fps) {
  return std::max<std::int64_t>(1, std::llround(fps / 2.0));
}

class NccMonitor {
 public:
  explicit NccMonitor(MonitorParams params = {}) : params_(params) {
    params_.validate();
  }

  void add(ReferencePatch ref) {
    const int id = ref.object_id;
    refs_.insert_or_assign(id, std::move(ref));
  }
  void remove(int object_id) { refs_.erase(object_id); }
  bool contains(int object_id) const { return refs_.contains(object_id); }
  const std::map<int, ReferencePatch>& references() const noexcept {
    return refs_;
  }

  /// One outcome per reference, ordered by object id. A current patch with
  /// zero variance cannot match a registered (textured) reference and is
  /// reported as moved with gamma 0.
  std::vector<MonitorOutcome> step(const GrayFrame& frame,
                                   const BinaryMask& motion, double fps) {
    require_same_shape(frame.width(), frame.height(), motion.width(),
                       motion.height(), "monitor_step");
    const auto cadence = check_cadence(fps);
    const auto refresh_frames =
        std::llround(params_.refresh_interval_s * fps);
    std::vector<MonitorOutcome> out;
    out.reserve(refs_.size());
    for (auto& [id, ref] : refs_) {
      const bool scheduled = frame.frame_index % cadence == 0 || ref.postponed;
      if (!scheduled) {
        out.push_back({id, MonitorVerdict::Skipped, std::nullopt});
        continue;
      }
      if (occlusion_guard(motion, ref.bbox, params_.halo,
                          params_.occlusion_fraction)) {
        ref.postponed = true;
        ++ref.consecutive_postponements;
        out.push_back({id, MonitorVerdict::Postponed, std::nullopt});
        continue;
      }
      ref.postponed = false;
      ref.consecutive_postponements = 0;
      const auto current = frame.image.crop(ref.bbox);
      double gamma = 0.0;
      try {
        gamma = ncc(ref.pixels, current);
      } catch (const ZeroVarianceError&) {
        gamma = 0.0;
      }
      ref.last_ncc = gamma;
      if (gamma >= params_.ncc_threshold) {
        if (params_.refresh_enabled &&
            frame.frame_index - ref.last_refresh_frame >= refresh_frames &&
            gamma >= params_.refresh_min_ncc) {
          ref.pixels = current;
          ref.last_refresh_frame = frame.frame_index;
        }
        out.push_back({id, MonitorVerdict::Present, gamma});
      } else {
        out.push_back({id, MonitorVerdict::Moved, gamma});
      }
    }
    return out;
  }

  const MonitorParams& params() const noexcept { return params_; }

 private:
  MonitorParams params_;
  std::map<int, ReferencePatch> refs_;
};

}  // namespace parkwatch

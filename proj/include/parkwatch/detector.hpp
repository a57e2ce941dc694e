#pragma once

// Shared pieces of the two stationary-object detectors.

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "parkwatch/background.hpp"
#include "parkwatch/binary_ops.hpp"
#include "parkwatch/tracking.hpp"

namespace parkwatch {

struct BlobParams {
  int morph_radius = 1;
  /// Smallest blob kept; unset means 0.1% of the frame area.
  std::optional<std::int64_t> min_area;

  std::int64_t resolve_min_area(int width, int height) const {
    if (min_area) return *min_area;
    const auto a = static_cast<double>(width) * height * 0.001;
    return std::max<std::int64_t>(1, std::llround(a));
  }
};

/// Common interface used by the run loop and the benchmark.
class StationaryDetector {
 public:
  virtual ~StationaryDetector() = default;

  /// Processes one ROI frame; returns the current stationary candidates
  /// ordered by id.
  virtual std::vector<TrackedObject> step(const GrayFrame& frame) = 0;

  /// Regions cleared from the blob mask before labeling (objects already
  /// handed over to monitoring).
  void set_suppressed(std::vector<Rect> regions) {
    suppressed_ = std::move(regions);
  }
  const std::vector<Rect>& suppressed() const noexcept { return suppressed_; }

  /// Forgets everything the detector knows about `r`: background models are
  /// re-seeded from `frame` and overlapping tracks dropped.
  virtual void reset_region(const GrayFrame& frame, const Rect& r) = 0;

  /// Mask that was labeled on the last step.
  const BinaryMask& last_mask() const noexcept { return last_mask_; }

 protected:
  std::vector<Blob> blobs_from(BinaryMask cleaned, const BlobParams& p) {
    for (const auto& r : suppressed_) cleaned.clear_rect(r);
    const StructuringElement se{p.morph_radius};
    last_mask_ = dilate(erode(cleaned, se), se);
    return label_components(
        last_mask_, p.resolve_min_area(last_mask_.width(), last_mask_.height()));
  }

  std::vector<Rect> suppressed_;
  BinaryMask last_mask_;
};

}  // namespace parkwatch

#pragma once

// Rectangle-overlap blob tracking shared by both detectors.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "parkwatch/binary_ops.hpp"
#include "parkwatch/core.hpp"

namespace parkwatch {

enum class OverlapMetric { MinArea, IoU };

/// Intersection area over the smaller rectangle's area (or over the union
/// for IoU). Degenerate rectangles overlap nothing.
inline double rect_overlap(const Rect& a, const Rect& b,
                           OverlapMetric metric = OverlapMetric::MinArea) {
  if (a.empty() || b.empty()) return 0.0;
  const auto inter = intersect(a, b).area();
  if (inter == 0) return 0.0;
  const auto denom = metric == OverlapMetric::MinArea
                         ? std::min(a.area(), b.area())
                         : a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(denom);
}

struct TrackedObject {
  int id = 0;
  Rect bbox;
  int consecutive_frames = 1;  // frames in which a blob matched
  std::int64_t first_seen_frame = 0;
  std::int64_t last_seen_frame = 0;
  int missed_frames = 0;
};

struct TrackerParams {
  double overlap_threshold = 0.80;
  OverlapMetric metric = OverlapMetric::MinArea;
  int miss_limit = 5;
};

/// Greedy matcher: blobs in label order each claim the unmatched object of
/// largest overlap strictly above the threshold. Ids are never reused.
class BlobTracker {
 public:
  explicit BlobTracker(TrackerParams params = {}) : params_(params) {}

  void update(const std::vector<Blob>& blobs, std::int64_t frame_index) {
    std::vector<bool> matched(objects_.size(), false);
    for (const auto& blob : blobs) {
      int best = -1;
      double best_overlap = params_.overlap_threshold;
      for (std::size_t i = 0; i < objects_.size(); ++i) {
        if (matched[i]) continue;
        const double ov = rect_overlap(objects_[i].bbox, blob.bbox,
                                       params_.metric);
        if (ov > best_overlap) {
          best_overlap = ov;
          best = static_cast<int>(i);
        }
      }
      if (best >= 0) {
        auto& obj = objects_[static_cast<std::size_t>(best)];
        matched[static_cast<std::size_t>(best)] = true;
        obj.bbox = blob.bbox;
        ++obj.consecutive_frames;
        obj.last_seen_frame = frame_index;
        obj.missed_frames = 0;
      } else {
        objects_.push_back(
            {next_id_++, blob.bbox, 1, frame_index, frame_index, 0});
        matched.push_back(true);
      }
    }
    for (std::size_t i = 0; i < objects_.size(); ++i)
      if (!matched[i]) ++objects_[i].missed_frames;
    std::erase_if(objects_, [&](const TrackedObject& o) {
      return o.missed_frames > params_.miss_limit;
    });
  }

  /// Tracked objects matched in at least `min_frames` frames, by id.
  std::vector<TrackedObject> persistent(int min_frames) const {
    std::vector<TrackedObject> out;
    for (const auto& o : objects_)
      if (o.consecutive_frames >= min_frames) out.push_back(o);
    return out;
  }

  /// Drops every object whose box overlaps `r` at all.
  void forget_overlapping(const Rect& r) {
    std::erase_if(objects_, [&](const TrackedObject& o) {
      return !intersect(o.bbox, r).empty();
    });
  }

  const std::vector<TrackedObject>& objects() const noexcept {
    return objects_;
  }
  int next_id() const noexcept { return next_id_; }

 private:
  TrackerParams params_;
  std::vector<TrackedObject> objects_;  // ascending id
  int next_id_ = 1;
};

}  // namespace parkwatch

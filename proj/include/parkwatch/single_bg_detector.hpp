#pragma once

// Stationary objects from one background model: background subtraction,
// moving-pixel removal by frame differencing, then rectangle-overlap
// tracking until a blob has persisted for the stop threshold.

#include <optional>
#include <vector>

#include "parkwatch/detector.hpp"

namespace parkwatch {

struct SingleDetectorParams {
  GmmParams gmm;
  LearningRate rate{0.002, 1};
  int tau = 25;
  int tau_motion = 15;
  int guard_radius = 2;
  int stop_threshold_frames = 50;
  TrackerParams tracker;
  BlobParams blobs;
};

class SingleBackgroundDetector final : public StationaryDetector {
 public:
  SingleBackgroundDetector(int width, int height,
                           SingleDetectorParams params = {})
      : params_(params),
        model_(width, height, params.gmm),
        tracker_(params.tracker) {
    params_.rate.validate();
  }

  std::vector<TrackedObject> step(const GrayFrame& frame,
                                  const GrayFrame& prev_frame) {
    model_.update(frame, params_.rate);
    const auto background = model_.background_image();
    const auto foreground =
        threshold_absdiff(frame.image, background, params_.tau);
    const auto motion = frame_difference(frame, prev_frame, params_.tau_motion);
    const auto blobs = blobs_from(
        remove_moving_pixels(foreground, motion, params_.guard_radius),
        params_.blobs);
    tracker_.update(blobs, frame.frame_index);
    return tracker_.persistent(params_.stop_threshold_frames);
  }

  /// Uses the previously stepped frame (or `frame` itself on the first call)
  /// as the differencing reference.
  std::vector<TrackedObject> step(const GrayFrame& frame) override {
    auto out = step(frame, prev_ ? *prev_ : frame);
    prev_ = frame;
    return out;
  }

  void reset_region(const GrayFrame& frame, const Rect& r) override {
    model_.reset_region(frame, r);
    tracker_.forget_overlapping(r);
  }

  const GmmBackground& model() const noexcept { return model_; }
  const BlobTracker& tracker() const noexcept { return tracker_; }

 private:
  SingleDetectorParams params_;
  GmmBackground model_;
  BlobTracker tracker_;
  std::optional<GrayFrame> prev_;
};

}  // namespace parkwatch

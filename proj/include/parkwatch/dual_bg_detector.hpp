#pragma once

// Stationary objects from two background models updated at different
// rates. A stopped object is absorbed by the fast model (BGF) well before
// the slow one (BGS); the thresholded |BGF - BGS| image (BGDIFF) therefore
// shows it for a window of frames, with no frame differencing needed.

#include <vector>

#include "parkwatch/detector.hpp"

namespace parkwatch {

struct DualDetectorParams {
  GmmParams gmm;
  LearningRate fast{0.02, 1};
  LearningRate slow{0.002, 1};
  int tau = 25;
  int confirm_frames = 10;
  TrackerParams tracker;
  BlobParams blobs;

  /// The fast model must adapt strictly faster, by rate or by stride.
  void validate() const {
    fast.validate();
    slow.validate();
    const bool faster_rate =
        fast.alpha > slow.alpha && fast.update_stride <= slow.update_stride;
    const bool faster_stride = fast.alpha >= slow.alpha &&
                               fast.update_stride < slow.update_stride;
    if (!(faster_rate || faster_stride))
      throw ConfigError(
          "dual: fast model must adapt faster than slow model "
          "(alpha_fast > alpha_slow or stride_fast < stride_slow)");
    if (confirm_frames < 1) throw ConfigError("dual.confirm_frames must be >= 1");
  }
};

class DualBackgroundDetector final : public StationaryDetector {
 public:
  DualBackgroundDetector(int width, int height, DualDetectorParams params = {})
      : params_(params),
        fast_(width, height, params.gmm),
        slow_(width, height, params.gmm),
        tracker_(params.tracker) {
    params_.validate();
  }

  std::vector<TrackedObject> step(const GrayFrame& frame) override {
    fast_.update(frame, params_.fast);
    slow_.update(frame, params_.slow);
    const auto blobs = blobs_from(bgdiff_raw(), params_.blobs);
    tracker_.update(blobs, frame.frame_index);
    return tracker_.persistent(params_.confirm_frames);
  }

  /// Thresholded background difference before morphology.
  BinaryMask bgdiff_raw() const {
    return threshold_absdiff(fast_.background_image(),
                             slow_.background_image(), params_.tau);
  }

  void reset_region(const GrayFrame& frame, const Rect& r) override {
    fast_.reset_region(frame, r);
    slow_.reset_region(frame, r);
    tracker_.forget_overlapping(r);
  }

  const GmmBackground& fast_model() const noexcept { return fast_; }
  const GmmBackground& slow_model() const noexcept { return slow_; }
  const BlobTracker& tracker() const noexcept { return tracker_; }

 private:
  DualDetectorParams params_;
  GmmBackground fast_;
  GmmBackground slow_;
  BlobTracker tracker_;
};

}  // namespace parkwatch

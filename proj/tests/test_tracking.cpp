#include <gtest/gtest.h>

#include "parkwatch/single_bg_detector.hpp"
#include "parkwatch/synthgen.hpp"
#include "test_util.hpp"

using namespace parkwatch;

namespace {

std::vector<Blob> one(const Rect& r) { return {Blob{1, r, r.area()}}; }

synth::SceneScript road(std::int64_t frames) {
  synth::SceneScript s;
  s.width = 160;
  s.height = 60;
  s.frames = frames;
  return s;
}

}  // namespace

TEST(RectOverlap, Basics) {
  const Rect a{0, 0, 10, 10};
  EXPECT_DOUBLE_EQ(rect_overlap(a, a), 1.0);
  EXPECT_DOUBLE_EQ(rect_overlap(a, Rect{10, 0, 10, 10}), 0.0);
  EXPECT_DOUBLE_EQ(rect_overlap(a, Rect{5, 0, 10, 10}), 0.5);
  EXPECT_DOUBLE_EQ(rect_overlap(a, Rect{2, 2, 4, 4}), 1.0);  // contained
  EXPECT_DOUBLE_EQ(rect_overlap(a, Rect{5, 0, 10, 10}, OverlapMetric::IoU),
                   50.0 / 150.0);
  EXPECT_DOUBLE_EQ(rect_overlap(a, Rect{3, 3, 0, 5}), 0.0);
}

TEST(RectOverlap, SymmetricAndBounded) {
  std::mt19937 rng(1);
  std::uniform_int_distribution<int> pos(0, 40), size(1, 30);
  for (int i = 0; i < 2000; ++i) {
    const Rect a{pos(rng), pos(rng), size(rng), size(rng)};
    const Rect b{pos(rng), pos(rng), size(rng), size(rng)};
    for (auto m : {OverlapMetric::MinArea, OverlapMetric::IoU}) {
      const double ab = rect_overlap(a, b, m);
      EXPECT_DOUBLE_EQ(ab, rect_overlap(b, a, m));
      EXPECT_GE(ab, 0.0);
      EXPECT_LE(ab, 1.0);
    }
    EXPECT_LE(rect_overlap(a, b, OverlapMetric::IoU), rect_overlap(a, b));
  }
}

TEST(BlobTracker, OverlapMustExceedThreshold) {
  BlobTracker t;
  t.update(one({0, 0, 10, 10}), 0);
  t.update(one({2, 0, 10, 10}), 1);  // overlap exactly 0.8
  ASSERT_EQ(t.objects().size(), 2u);
  EXPECT_EQ(t.objects()[1].id, 2);
  EXPECT_EQ(t.objects()[1].consecutive_frames, 1);

  BlobTracker u;
  u.update(one({0, 0, 100, 10}), 0);
  u.update(one({19, 0, 100, 10}), 1);  // 0.81
  ASSERT_EQ(u.objects().size(), 1u);
  EXPECT_EQ(u.objects()[0].consecutive_frames, 2);
  EXPECT_EQ(u.objects()[0].bbox, (Rect{19, 0, 100, 10}));
}

TEST(BlobTracker, PersistenceThreshold) {
  BlobTracker t;
  for (int f = 0; f < 49; ++f) t.update(one({5, 5, 8, 8}), f);
  EXPECT_TRUE(t.persistent(50).empty());
  t.update(one({5, 5, 8, 8}), 49);
  const auto c = t.persistent(50);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].first_seen_frame, 0);
  EXPECT_EQ(c[0].last_seen_frame, 49);
}

TEST(BlobTracker, MissLimitAndIdsNeverReused) {
  BlobTracker t;
  t.update(one({0, 0, 8, 8}), 0);
  for (int f = 1; f <= 5; ++f) {
    t.update({}, f);
    ASSERT_EQ(t.objects().size(), 1u) << f;
    EXPECT_EQ(t.objects()[0].missed_frames, f);
  }
  t.update({}, 6);
  EXPECT_TRUE(t.objects().empty());
  t.update(one({0, 0, 8, 8}), 7);
  ASSERT_EQ(t.objects().size(), 1u);
  EXPECT_EQ(t.objects()[0].id, 2);
  EXPECT_EQ(t.objects()[0].first_seen_frame, 7);
}

TEST(BlobTracker, GapWithinMissLimitKeepsCount) {
  BlobTracker t;
  for (int f = 0; f < 10; ++f) t.update(one({0, 0, 8, 8}), f);
  for (int f = 10; f < 13; ++f) t.update({}, f);
  t.update(one({0, 0, 8, 8}), 13);
  ASSERT_EQ(t.objects().size(), 1u);
  EXPECT_EQ(t.objects()[0].consecutive_frames, 11);
  EXPECT_EQ(t.objects()[0].missed_frames, 0);
}

TEST(BlobTracker, FastMoverNeverPersists) {
  // Moving more than 20% of its width per frame breaks every match.
  BlobTracker t;
  for (int f = 0; f < 200; ++f) t.update(one({(f * 9) % 400, 0, 40, 20}), f);
  EXPECT_TRUE(t.persistent(50).empty());
  EXPECT_EQ(t.next_id(), 201);
}

TEST(BlobTracker, EmptySequence) {
  BlobTracker t;
  for (int f = 0; f < 100; ++f) t.update({}, f);
  EXPECT_TRUE(t.persistent(1).empty());
}

TEST(BlobTracker, ForgetOverlapping) {
  BlobTracker t;
  t.update({Blob{1, {0, 0, 5, 5}, 25}, Blob{2, {20, 0, 5, 5}, 25}}, 0);
  t.forget_overlapping({3, 3, 4, 4});
  ASSERT_EQ(t.objects().size(), 1u);
  EXPECT_EQ(t.objects()[0].id, 2);
}

TEST(SingleDetector, StaticSceneHasNoCandidates) {
  SingleBackgroundDetector det(64, 48);
  for (int f = 0; f < 150; ++f)
    EXPECT_TRUE(det.step(testutil::flat_frame(64, 48, 90, f)).empty());
}

TEST(SingleDetector, StoppedActorBecomesCandidateAfterThreshold) {
  auto s = road(260);
  synth::Actor car;
  car.waypoints = {{10, 0, 20}, {30, 60, 20}, {200, 60, 20}};
  s.actors.push_back(car);
  SingleBackgroundDetector det(s.width, s.height);
  std::optional<std::int64_t> first;
  for (std::int64_t f = 0; f < s.frames; ++f) {
    const auto c = det.step(synth::render_frame(s, f));
    if (!c.empty() && !first) {
      first = f;
      ASSERT_EQ(c.size(), 1u);
      EXPECT_GT(rect_overlap(c[0].bbox, Rect{60, 20, 40, 20}), 0.9);
      EXPECT_EQ(f - c[0].first_seen_frame + 1, 50);
    }
  }
  ASSERT_TRUE(first);
  EXPECT_GE(*first, 30 + 49);
  EXPECT_LE(*first, 30 + 49 + 10);
}

TEST(SingleDetector, ContinuousTrafficNeverStops) {
  auto s = road(300);
  for (int k = 0; k < 4; ++k) {
    synth::Actor car;
    car.texture_seed = 10 + static_cast<std::uint64_t>(k);
    const std::int64_t t0 = 10 + k * 40;
    car.waypoints = {{t0, 0, 5 + 10 * (k % 3)}, {t0 + 15, 120, 5 + 10 * (k % 3)}};
    car.removal_frame = t0 + 16;
    s.actors.push_back(car);
  }
  SingleBackgroundDetector det(s.width, s.height);
  for (std::int64_t f = 0; f < s.frames; ++f)
    EXPECT_TRUE(det.step(synth::render_frame(s, f)).empty()) << f;
}

TEST(SingleDetector, ResetRegionClearsTrack) {
  auto s = road(120);
  synth::Actor car;
  car.waypoints = {{0, 60, 20}};
  s.actors.push_back(car);
  auto empty_road = s;
  empty_road.actors.clear();
  SingleBackgroundDetector det(s.width, s.height);
  for (std::int64_t f = 0; f < 10; ++f) det.step(synth::render_frame(empty_road, f));
  for (std::int64_t f = 10; f < 80; ++f) det.step(synth::render_frame(s, f));
  ASSERT_FALSE(det.tracker().objects().empty());
  const auto frame = synth::render_frame(s, 80);
  det.reset_region(frame, Rect{58, 18, 44, 24});
  EXPECT_TRUE(det.tracker().objects().empty());
  EXPECT_EQ(det.model().background_image()(70, 25), frame.image(70, 25));
}

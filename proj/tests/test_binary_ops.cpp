#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "parkwatch/binary_ops.hpp"
#include "test_util.hpp"

using namespace parkwatch;

TEST(ThresholdAbsdiff, IdenticalFramesGiveEmptyMask) {
  Image8 a(5, 5, 77);
  EXPECT_TRUE(threshold_absdiff(a, a, 0).none());
}

TEST(ThresholdAbsdiff, StrictInequalityAtTau) {
  Image8 a(3, 3, 100), b(3, 3, 100);
  b(1, 1) = 125;
  EXPECT_TRUE(threshold_absdiff(a, b, 25).none());
  b(1, 1) = 126;
  const auto m = threshold_absdiff(a, b, 25);
  EXPECT_EQ(m.count(), 1);
  EXPECT_TRUE(m.test(1, 1));
  b(1, 1) = 74;  // |100 - 74| = 26, symmetric
  EXPECT_TRUE(threshold_absdiff(a, b, 25).test(1, 1));
}

TEST(ThresholdAbsdiff, DimensionMismatch) {
  EXPECT_THROW(threshold_absdiff(Image8(3, 3), Image8(3, 4), 1), DimensionError);
}

TEST(FrameDifference, StaticAndUnreachable) {
  auto a = testutil::flat_frame(10, 10, 60);
  EXPECT_TRUE(frame_difference(a, a, 15).none());
  auto b = testutil::flat_frame(10, 10, 0);
  b.image(3, 3) = 255;
  auto c = testutil::flat_frame(10, 10, 255);
  c.image(3, 3) = 0;
  EXPECT_TRUE(frame_difference(b, c, 255).none());
}

TEST(FrameDifference, TranslatedRectangleMarksEdges) {
  // 10x6 bright rectangle moved 5 px right on a dark background: exactly the
  // uncovered columns [20,25) and newly covered [30,35) change.
  auto prev = testutil::flat_frame(60, 20, 40);
  auto curr = testutil::flat_frame(60, 20, 40);
  for (int y = 7; y < 13; ++y) {
    for (int x = 20; x < 30; ++x) prev.image(x, y) = 200;
    for (int x = 25; x < 35; ++x) curr.image(x, y) = 200;
  }
  const auto m = frame_difference(curr, prev, 15);
  EXPECT_EQ(m.count(), 2 * 5 * 6);
  for (int y = 7; y < 13; ++y) {
    EXPECT_TRUE(m.test(20, y));
    EXPECT_TRUE(m.test(34, y));
    EXPECT_FALSE(m.test(27, y));  // interior of a flat object is unchanged
  }
}

TEST(Morphology, SinglePixel) {
  BinaryMask m(7, 7);
  m.set(3, 3);
  EXPECT_TRUE(erode(m, {1}).none());
  const auto d = dilate(m, {1});
  EXPECT_EQ(d.count(), 9);
  for (int y = 2; y <= 4; ++y)
    for (int x = 2; x <= 4; ++x) EXPECT_TRUE(d.test(x, y));
}

TEST(Morphology, FullMaskErosionLosesBorder) {
  BinaryMask m(6, 5);
  for (auto& b : m.bits()) b = 1;
  const auto e = erode(m, {1});
  EXPECT_EQ(e.count(), 4 * 3);
  EXPECT_FALSE(e.test(0, 2));
  EXPECT_TRUE(e.test(1, 1));
  EXPECT_TRUE(e.test(4, 3));
  EXPECT_FALSE(e.test(5, 3));
}

TEST(Morphology, RejectsZeroRadius) {
  EXPECT_THROW(erode(BinaryMask(3, 3), {0}), std::invalid_argument);
}

namespace {

// Direct definition: every in-bounds neighbor within r (erode) / any
// neighbor within r (dilate).
BinaryMask morph_direct(const BinaryMask& m, int r, bool erode_op) {
  BinaryMask out(m.width(), m.height());
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      bool all = true, any = false;
      for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx) {
          const int u = x + dx, v = y + dy;
          const bool in = u >= 0 && v >= 0 && u < m.width() && v < m.height();
          const bool bit = in && m.test(u, v);
          all = all && bit;
          any = any || bit;
        }
      out.set(x, y, erode_op ? all : any);
    }
  return out;
}

}  // namespace

TEST(Morphology, SeparablePassesMatchDirectDefinition) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int w = 1 + static_cast<int>(rng() % 30), h = 1 + static_cast<int>(rng() % 30);
    const int r = 1 + static_cast<int>(rng() % 3);
    const auto m = testutil::random_mask(rng, w, h, 0.6);
    ASSERT_EQ(erode(m, {r}), morph_direct(m, r, true));
    ASSERT_EQ(dilate(m, {r}), morph_direct(m, r, false));
  }
}

// Under these border conventions the complement of a dilation is the
// erosion of the complement everywhere except the r-pixel frame border,
// where erosion sees out-of-bounds zeros.
TEST(Morphology, DualityOnInterior) {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = testutil::random_mask(rng, 24, 18, 0.3);
    const auto lhs = erode(m.complement(), {1});
    const auto rhs = dilate(m, {1}).complement();
    for (int y = 1; y < 17; ++y)
      for (int x = 1; x < 23; ++x) ASSERT_EQ(lhs.test(x, y), rhs.test(x, y));
  }
}

TEST(Morphology, OpeningIsIdempotent) {
  std::mt19937 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = testutil::random_mask(rng, 32, 32, 0.55);
    const auto once = dilate(erode(m));
    EXPECT_EQ(dilate(erode(once)), once);
  }
}

TEST(RemoveMovingPixels, IdentityAndFullRemoval) {
  std::mt19937 rng(10);
  const auto fg = testutil::random_mask(rng, 20, 20, 0.4);
  EXPECT_EQ(remove_moving_pixels(fg, BinaryMask(20, 20), 2), fg);
  EXPECT_TRUE(remove_moving_pixels(fg, fg, 2).none());
  EXPECT_TRUE(remove_moving_pixels(fg, fg, 0).none());
  EXPECT_THROW(remove_moving_pixels(fg, BinaryMask(20, 21), 2), DimensionError);
}

TEST(RemoveMovingPixels, OutputIsSubsetOfForeground) {
  std::mt19937 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const auto fg = testutil::random_mask(rng, 30, 20, 0.5);
    const auto motion = testutil::random_mask(rng, 30, 20, 0.05);
    const auto out = remove_moving_pixels(fg, motion, static_cast<int>(rng() % 3));
    for (std::size_t i = 0; i < out.bits().size(); ++i)
      ASSERT_LE(out.bits()[i], fg.bits()[i]);
  }
}

// Two-object scene: a textured vehicle moving 4 px/frame in the upper lane
// and a stationary vehicle in the lower lane. Both differ from the road, so
// both are foreground; only the mover shows up in the frame difference.
TEST(RemoveMovingPixels, MovingVehicleErasedStationaryKept) {
  std::mt19937 rng(13);
  Image8 texture(30, 12);
  for (auto& p : texture.pixels()) p = static_cast<std::uint8_t>(150 + rng() % 90);
  auto draw = [&](GrayFrame& f, int x0, int y0) {
    for (int y = 0; y < 12; ++y)
      for (int x = 0; x < 30; ++x) f.image(x0 + x, y0 + y) = texture(x, y);
  };
  auto prev = testutil::flat_frame(120, 50, 90);
  auto curr = testutil::flat_frame(120, 50, 90);
  draw(prev, 20, 4);
  draw(curr, 24, 4);   // mover
  draw(prev, 60, 32);
  draw(curr, 60, 32);  // stopper
  const Image8 road(120, 50, 90);
  const auto fg = threshold_absdiff(curr.image, road, 25);
  const auto motion = frame_difference(curr, prev, 15);
  const auto kept = dilate(erode(remove_moving_pixels(fg, motion, 2)));

  const Rect stopper{60, 32, 30, 12}, mover{24, 4, 30, 12};
  EXPECT_GE(kept.count_in(stopper), static_cast<std::int64_t>(0.9 * stopper.area()));
  EXPECT_LE(kept.count_in(mover), static_cast<std::int64_t>(0.1 * mover.area()));
}

TEST(LabelComponents, EmptyMask) {
  EXPECT_TRUE(label_components(BinaryMask(10, 10), 1).empty());
}

TEST(LabelComponents, TwoBlocks) {
  BinaryMask m(12, 8);
  for (int y = 1; y < 4; ++y)
    for (int x = 6; x < 9; ++x) m.set(x, y);
  for (int y = 4; y < 7; ++y)
    for (int x = 1; x < 4; ++x) m.set(x, y);
  const auto blobs = label_components(m, 1);
  ASSERT_EQ(blobs.size(), 2u);
  EXPECT_EQ(blobs[0], (Blob{1, Rect{6, 1, 3, 3}, 9}));
  EXPECT_EQ(blobs[1], (Blob{2, Rect{1, 4, 3, 3}, 9}));
}

TEST(LabelComponents, DiagonalNeighborsConnectAndMinAreaFilters) {
  BinaryMask m(6, 6);
  m.set(0, 0);
  m.set(1, 1);
  m.set(2, 2);
  m.set(5, 0);
  const auto all = label_components(m, 1);
  ASSERT_EQ(all.size(), 2u);
  EXPECT_EQ(all[0].area, 3);
  EXPECT_EQ(all[0].bbox, (Rect{0, 0, 3, 3}));
  const auto big = label_components(m, 2);
  ASSERT_EQ(big.size(), 1u);
  EXPECT_EQ(big[0].label, 1);
}

TEST(LabelComponents, OrderedByTopThenLeftWithDenseLabels) {
  std::mt19937 rng(14);
  for (int trial = 0; trial < 50; ++trial) {
    const auto blobs = label_components(testutil::random_mask(rng, 40, 40, 0.2), 2);
    for (std::size_t i = 0; i < blobs.size(); ++i) {
      EXPECT_EQ(blobs[i].label, static_cast<int>(i) + 1);
      EXPECT_GE(blobs[i].area, 2);
      EXPECT_LE(blobs[i].area, blobs[i].bbox.area());
      if (i > 0) {
        const auto& a = blobs[i - 1].bbox;
        const auto& b = blobs[i].bbox;
        EXPECT_TRUE(a.y < b.y || (a.y == b.y && a.x <= b.x));
      }
    }
  }
}

// Components are disjoint, their union is the mask, and each bbox is tight.
TEST(LabelComponents, PartitionProperty) {
  std::mt19937 rng(15);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = testutil::random_mask(rng, 32, 24, 0.45);
    const auto lab = label_all(m);
    std::vector<std::int64_t> area(lab.blobs.size() + 1, 0);
    std::vector<Rect> box(lab.blobs.size() + 1);
    for (int y = 0; y < 24; ++y)
      for (int x = 0; x < 32; ++x) {
        const int l = lab.labels(x, y);
        ASSERT_EQ(l != 0, m.test(x, y));
        if (!l) continue;
        ++area[l];
        auto& b = box[l];
        if (b.empty()) {
          b = Rect{x, y, 1, 1};
          continue;
        }
        const int x1 = std::max(b.right(), x + 1), y1 = std::max(b.bottom(), y + 1);
        b.x = std::min(b.x, x);
        b.y = std::min(b.y, y);
        b.w = x1 - b.x;
        b.h = y1 - b.y;
      }
    for (const auto& blob : lab.blobs) {
      EXPECT_EQ(blob.area, area[blob.label]);
      EXPECT_EQ(blob.bbox, box[blob.label]);
    }
  }
}

TEST(LabelComponents, MatchesFloodFillOracle) {
  std::mt19937 rng(16);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = testutil::random_mask(rng, 32, 32, 0.1 + 0.05 * (trial % 10));
    const std::vector<std::uint8_t> bits(m.bits().begin(), m.bits().end());
    const auto expected = oracle::flood_fill_components(bits, 32, 32);
    const auto lab = label_all(m);
    std::set<std::vector<int>> got;
    std::vector<std::vector<int>> members(lab.blobs.size());
    for (int i = 0; i < 32 * 32; ++i)
      if (int l = lab.labels.pixels()[static_cast<std::size_t>(i)]) members[l - 1].push_back(i);
    for (auto& v : members) got.insert(v);
    ASSERT_EQ(got, expected) << "trial " << trial;
    ASSERT_EQ(label_components(m, 1).size(), expected.size());
  }
}

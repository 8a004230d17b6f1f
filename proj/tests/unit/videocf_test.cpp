#include <filesystem>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "egocf/errors.hpp"
#include "egocf/numkit/rng.hpp"
#include "egocf/videocf/frame_grid.hpp"
#include "egocf/videocf/region.hpp"

namespace egocf::videocf {
namespace {

FrameGrid random_grid(numkit::Rng& rng, std::size_t n, std::size_t c, std::size_t h,
                      std::size_t w) {
  FrameGrid g(n, c, h, w);
  for (std::size_t i = 0; i < g.tensor().size(); ++i) g.tensor()[i] = rng.uniform();
  return g;
}

// Counts pixels by testing every coordinate against the documented geometry.
std::size_t oracle_count(VideoVariant v, std::size_t h, std::size_t w) {
  std::size_t count = 0;
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const bool cols = 4 * c >= w && 4 * c < 3 * w;
      bool rows = false;
      if (v == VideoVariant::kFv1) rows = 4 * r >= h && 4 * r < 3 * h;
      if (v == VideoVariant::kFv2) rows = 2 * r >= h;
      if (v == VideoVariant::kFv3) rows = 4 * r >= h;
      count += rows && cols;
    }
  }
  return count;
}

TEST(FrameGrid, RejectsBadTensors) {
  EXPECT_THROW(FrameGrid(numkit::Tensor({2, 3})), DimensionError);
  numkit::Tensor t({1, 1, 2, 2});
  t[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(FrameGrid{t}, NumericError);
}

TEST(SelectRegion, Fv1At224) {
  const auto r = select_region(VideoVariant::kFv1, 224, 224, 2);
  ASSERT_EQ(r.rects.size(), 2u);
  EXPECT_EQ(r.rects[0], (std::vector<Rect>{{56, 168, 56, 168}}));
  EXPECT_EQ(selected_pixels(r, 0), 12544u);
  EXPECT_EQ(r.rects[0], r.rects[1]);
}

TEST(SelectRegion, Fv3At224) {
  const auto r = select_region(VideoVariant::kFv3, 224, 224, 1);
  EXPECT_EQ(r.rects[0], (std::vector<Rect>{{56, 224, 56, 168}}));
  EXPECT_EQ(selected_pixels(r, 0), 18816u);
}

TEST(SelectRegion, AreaFractionsMatchOracle) {
  for (std::size_t hw : {64u, 224u}) {
    for (auto v : {VideoVariant::kFv1, VideoVariant::kFv2, VideoVariant::kFv3}) {
      const auto r = select_region(v, hw, hw, 3);
      const auto mask = region_mask(r, 1);
      std::size_t ones = 0;
      for (auto m : mask) ones += m;
      EXPECT_EQ(ones, oracle_count(v, hw, hw));
      const std::size_t num = v == VideoVariant::kFv3 ? 3 : 1;
      const std::size_t den = v == VideoVariant::kFv3 ? 8 : 4;
      EXPECT_EQ(ones * den, num * hw * hw);
    }
  }
}

TEST(SelectRegion, Fv1MirrorSymmetric) {
  const auto r = select_region(VideoVariant::kFv1, 64, 48, 1);
  const auto m = region_mask(r, 0);
  for (std::size_t row = 0; row < 64; ++row)
    for (std::size_t c = 0; c < 48; ++c) EXPECT_EQ(m[row * 48 + c], m[row * 48 + 47 - c]);
}

TEST(SelectRegion, Fv4Errors) {
  EXPECT_THROW(select_region(VideoVariant::kFv4, 64, 64, 2), ConfigError);
  const std::vector<BBoxRecord> bad{{"v", 0, {{0, 65, 0, 10}}}};
  EXPECT_THROW(select_region(VideoVariant::kFv4, 64, 64, 2, bad), DimensionError);
  EXPECT_THROW(parse_video_variant("f_v5"), ConfigError);
}

TEST(SelectRegion, Fv4BoxAreaAndUnion) {
  const std::vector<BBoxRecord> boxes{{"v", 0, {{10, 20, 5, 25}}},
                                      {"v", 1, {{0, 10, 0, 10}, {5, 15, 5, 15}}}};
  const auto r = select_region(VideoVariant::kFv4, 32, 32, 3, boxes);
  EXPECT_EQ(selected_pixels(r, 0), 200u);
  EXPECT_EQ(selected_pixels(r, 1), 100u + 100u - 25u);
  EXPECT_EQ(selected_pixels(r, 2), 0u);
  FrameGrid ones(3, 2, 32, 32, 1.0);
  const auto pair = make_video_pair(ones, VideoVariant::kFv4, boxes);
  EXPECT_DOUBLE_EQ(pair.positive.frame_sum(0), 2.0 * 200);
}

TEST(SelectRegion, Deterministic) {
  EXPECT_EQ(select_region(VideoVariant::kFv2, 64, 64, 4),
            select_region(VideoVariant::kFv2, 64, 64, 4));
}

TEST(RetainMask, ConstantFrameSums) {
  FrameGrid ones(2, 3, 64, 64, 1.0);
  const auto r1 = select_region(VideoVariant::kFv1, 64, 64, 2);
  EXPECT_DOUBLE_EQ(retain(ones, r1).frame_sum(1), 3.0 * 64 * 64 / 4);
  const auto r2 = select_region(VideoVariant::kFv2, 64, 64, 2);
  EXPECT_DOUBLE_EQ(mask(ones, r2).frame_sum(0), 3.0 * (64 * 64 - 64 * 64 / 4));
}

TEST(RetainMask, WholeFrameRegion) {
  numkit::Rng rng(1);
  const auto v = random_grid(rng, 2, 1, 8, 8);
  RegionSpec whole{VideoVariant::kFv4, 8, 8, {{{0, 8, 0, 8}}, {{0, 8, 0, 8}}}};
  EXPECT_EQ(retain(v, whole), v);
  const auto m = mask(v, whole, 0.5);
  for (std::size_t i = 0; i < m.tensor().size(); ++i) EXPECT_EQ(m.tensor()[i], 0.5);
}

TEST(RetainMask, OutOfBoundsIsDimensionError) {
  FrameGrid v(1, 1, 8, 8);
  RegionSpec bad{VideoVariant::kFv4, 8, 8, {{{0, 9, 0, 8}}}};
  EXPECT_THROW(retain(v, bad), DimensionError);
  EXPECT_THROW(mask(v, bad), DimensionError);
  const auto r = select_region(VideoVariant::kFv1, 16, 16, 1);
  EXPECT_THROW(retain(v, r), DimensionError);
}

TEST(RetainMask, ComplementarityProperty) {
  numkit::Rng rng(7);
  const VideoVariant variants[] = {VideoVariant::kFv1, VideoVariant::kFv2, VideoVariant::kFv3};
  for (int i = 0; i < 100; ++i) {
    const std::size_t h = 4 * (1 + rng.index(8)), w = 4 * (1 + rng.index(8));
    const auto v = random_grid(rng, 1 + rng.index(3), 1 + rng.index(3), h, w);
    const auto pair = make_video_pair(v, variants[rng.index(3)], std::nullopt, 0.0);
    for (std::size_t k = 0; k < v.tensor().size(); ++k) {
      EXPECT_EQ(pair.positive.tensor()[k] + pair.negative.tensor()[k], v.tensor()[k]);
      // Exactly one side copies the pixel, untouched.
      EXPECT_TRUE(pair.positive.tensor()[k] == 0.0 || pair.negative.tensor()[k] == 0.0);
    }
  }
}

TEST(RetainMask, MaskIsIdempotent) {
  numkit::Rng rng(8);
  const auto v = random_grid(rng, 2, 1, 16, 16);
  const auto r = select_region(VideoVariant::kFv3, 16, 16, 2);
  EXPECT_EQ(retain(retain(v, r), r), retain(v, r));
  EXPECT_EQ(mask(mask(v, r, 0.3), r, 0.3), mask(v, r, 0.3));
}

TEST(BBoxes, RoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "egocf_bbox_test.jsonl";
  BBoxIndex idx;
  idx["a"] = {{"a", 0, {{1, 2, 3, 4}}}, {"a", 1, {}}};
  idx["b"] = {{"b", 0, {{0, 8, 0, 8}, {2, 3, 2, 3}}}};
  write_bboxes(path, idx);
  const auto back = read_bboxes(path);
  ASSERT_EQ(back.size(), 2u);
  ASSERT_EQ(back.at("b").size(), 1u);
  EXPECT_EQ(back.at("b")[0].boxes, idx["b"][0].boxes);
  EXPECT_EQ(back.at("a")[0].boxes, idx["a"][0].boxes);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace egocf::videocf

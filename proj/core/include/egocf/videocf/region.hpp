#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "egocf/videocf/frame_grid.hpp"

namespace egocf::videocf {

// Interaction-region variants:
//   f_v1  centre quarter       rows [H/4, 3H/4) x cols [W/4, 3W/4)
//   f_v2  lower-middle quarter rows [H/2, H)    x cols [W/4, 3W/4)
//   f_v3  lower-middle 3/8     rows [H/4, H)    x cols [W/4, 3W/4)
//   f_v4  union of per-frame hand-object boxes read from a file
enum class VideoVariant { kFv1, kFv2, kFv3, kFv4 };

std::string_view to_string(VideoVariant v);
// Throws ConfigError for anything but "f_v1".."f_v4".
VideoVariant parse_video_variant(std::string_view name);

// Axis-aligned half-open pixel rectangle.
struct Rect {
  std::size_t row0 = 0;
  std::size_t row1 = 0;
  std::size_t col0 = 0;
  std::size_t col1 = 0;

  std::size_t area() const { return (row1 - row0) * (col1 - col0); }
  bool contains(std::size_t r, std::size_t c) const {
    return r >= row0 && r < row1 && c >= col0 && c < col1;
  }
  bool operator==(const Rect&) const = default;
};

struct BBoxRecord {
  std::string video_id;
  std::size_t frame_index = 0;
  std::vector<Rect> boxes;
};

struct RegionSpec {
  VideoVariant variant = VideoVariant::kFv1;
  std::size_t height = 0;
  std::size_t width = 0;
  // One rectangle list per frame; a pixel is selected if any rectangle
  // covers it.
  std::vector<std::vector<Rect>> rects;

  bool operator==(const RegionSpec&) const = default;
};

// Throws ConfigError for f_v4 without boxes and DimensionError for boxes
// outside the frame. Frames with no box record get an empty list.
RegionSpec select_region(VideoVariant variant, std::size_t height,
                         std::size_t width, std::size_t frames,
                         std::optional<std::span<const BBoxRecord>> bboxes = std::nullopt);

// Per-frame H x W selection mask (1 = inside the region).
std::vector<std::uint8_t> region_mask(const RegionSpec& region, std::size_t frame);
std::size_t selected_pixels(const RegionSpec& region, std::size_t frame);

// Copies pixels inside the region; everything else becomes `fill`.
FrameGrid retain(const FrameGrid& v, const RegionSpec& region, double fill = 0.0);
// Sets pixels inside the region to `fill`; everything else is copied.
FrameGrid mask(const FrameGrid& v, const RegionSpec& region, double fill = 0.0);

struct VideoPair {
  FrameGrid positive;
  FrameGrid negative;
  RegionSpec region;
};

VideoPair make_video_pair(const FrameGrid& v, VideoVariant variant,
                          std::optional<std::span<const BBoxRecord>> bboxes,
                          double fill = 0.0);
// Same, with a precomputed region.
VideoPair make_video_pair(const FrameGrid& v, const RegionSpec& region,
                          double fill = 0.0);

// BBox JSONL: {"video_id":..,"frame_index":..,"boxes":[[r0,r1,c0,c1],...]}
using BBoxIndex = std::map<std::string, std::vector<BBoxRecord>>;
BBoxIndex read_bboxes(const std::filesystem::path& path);
void write_bboxes(const std::filesystem::path& path, const BBoxIndex& index);

}  // namespace egocf::videocf

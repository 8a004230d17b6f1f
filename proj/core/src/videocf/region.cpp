#include "egocf/videocf/region.hpp"

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "egocf/errors.hpp"

namespace egocf::videocf {
namespace {

void check_rect(const Rect& r, std::size_t height, std::size_t width) {
  if (r.row0 >= r.row1 || r.col0 >= r.col1 || r.row1 > height || r.col1 > width) {
    throw DimensionError("rectangle rows [" + std::to_string(r.row0) + ", " +
                         std::to_string(r.row1) + ") cols [" + std::to_string(r.col0) +
                         ", " + std::to_string(r.col1) + ") is empty or outside a " +
                         std::to_string(height) + "x" + std::to_string(width) + " frame");
  }
}

void check_region(const FrameGrid& v, const RegionSpec& region) {
  if (region.height != v.height() || region.width != v.width() ||
      region.rects.size() != v.frames()) {
    throw DimensionError("region for " + std::to_string(region.rects.size()) + " frames of " +
                         std::to_string(region.height) + "x" + std::to_string(region.width) +
                         " does not match video " + v.tensor().shape_string());
  }
  for (const auto& frame : region.rects) {
    for (const auto& r : frame) check_rect(r, v.height(), v.width());
  }
}

// Writes `fill` wherever the selection mask equals `target`.
FrameGrid apply(const FrameGrid& v, const RegionSpec& region, double fill,
                std::uint8_t target) {
  check_region(v, region);
  FrameGrid out = v;
  for (std::size_t n = 0; n < v.frames(); ++n) {
    const auto sel = region_mask(region, n);
    for (std::size_t c = 0; c < v.channels(); ++c) {
      for (std::size_t r = 0; r < v.height(); ++r) {
        for (std::size_t col = 0; col < v.width(); ++col) {
          if (sel[r * v.width() + col] == target) out.at(n, c, r, col) = fill;
        }
      }
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(VideoVariant v) {
  switch (v) {
    case VideoVariant::kFv1: return "f_v1";
    case VideoVariant::kFv2: return "f_v2";
    case VideoVariant::kFv3: return "f_v3";
    case VideoVariant::kFv4: return "f_v4";
  }
  return "unknown";
}

VideoVariant parse_video_variant(std::string_view name) {
  for (auto v : {VideoVariant::kFv1, VideoVariant::kFv2, VideoVariant::kFv3,
                 VideoVariant::kFv4}) {
    if (to_string(v) == name) return v;
  }
  throw ConfigError("unknown video variant '" + std::string(name) +
                    "' (expected f_v1, f_v2, f_v3 or f_v4)");
}

RegionSpec select_region(VideoVariant variant, std::size_t height, std::size_t width,
                         std::size_t frames,
                         std::optional<std::span<const BBoxRecord>> bboxes) {
  if (height == 0 || width == 0 || frames == 0) {
    throw DimensionError("select_region: frame extents must be positive");
  }
  RegionSpec spec;
  spec.variant = variant;
  spec.height = height;
  spec.width = width;
  const std::size_t c0 = width / 4;
  const std::size_t c1 = 3 * width / 4;
  Rect fixed;
  switch (variant) {
    case VideoVariant::kFv1:
      fixed = {height / 4, 3 * height / 4, c0, c1};
      break;
    case VideoVariant::kFv2:
      fixed = {height / 2, height, c0, c1};
      break;
    case VideoVariant::kFv3:
      fixed = {height / 4, height, c0, c1};
      break;
    case VideoVariant::kFv4: {
      if (!bboxes) throw ConfigError("select_region: f_v4 requires bounding boxes");
      spec.rects.assign(frames, {});
      for (const auto& rec : *bboxes) {
        if (rec.frame_index >= frames) {
          throw DimensionError("bbox record for frame " + std::to_string(rec.frame_index) +
                               " but the clip has " + std::to_string(frames) + " frames");
        }
        for (const auto& box : rec.boxes) {
          check_rect(box, height, width);
          spec.rects[rec.frame_index].push_back(box);
        }
      }
      return spec;
    }
  }
  check_rect(fixed, height, width);
  spec.rects.assign(frames, {fixed});
  return spec;
}

std::vector<std::uint8_t> region_mask(const RegionSpec& region, std::size_t frame) {
  std::vector<std::uint8_t> sel(region.height * region.width, 0);
  for (const auto& r : region.rects.at(frame)) {
    for (std::size_t row = r.row0; row < r.row1; ++row) {
      for (std::size_t col = r.col0; col < r.col1; ++col) sel[row * region.width + col] = 1;
    }
  }
  return sel;
}

std::size_t selected_pixels(const RegionSpec& region, std::size_t frame) {
  std::size_t count = 0;
  for (auto s : region_mask(region, frame)) count += s;
  return count;
}

FrameGrid retain(const FrameGrid& v, const RegionSpec& region, double fill) {
  return apply(v, region, fill, 0);
}

FrameGrid mask(const FrameGrid& v, const RegionSpec& region, double fill) {
  return apply(v, region, fill, 1);
}

VideoPair make_video_pair(const FrameGrid& v, const RegionSpec& region, double fill) {
  return {retain(v, region, fill), mask(v, region, fill), region};
}

VideoPair make_video_pair(const FrameGrid& v, VideoVariant variant,
                          std::optional<std::span<const BBoxRecord>> bboxes, double fill) {
  return make_video_pair(v, select_region(variant, v.height(), v.width(), v.frames(), bboxes),
                         fill);
}

BBoxIndex read_bboxes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open bbox file " + path.string());
  BBoxIndex index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      BBoxRecord rec;
      rec.video_id = j.at("video_id").get<std::string>();
      rec.frame_index = j.at("frame_index").get<std::size_t>();
      for (const auto& b : j.at("boxes")) {
        if (b.size() != 4) throw FormatError("box needs [r0, r1, c0, c1]");
        rec.boxes.push_back({b[0].get<std::size_t>(), b[1].get<std::size_t>(),
                             b[2].get<std::size_t>(), b[3].get<std::size_t>()});
      }
      index[rec.video_id].push_back(std::move(rec));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return index;
}

void write_bboxes(const std::filesystem::path& path, const BBoxIndex& index) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  for (const auto& [video_id, records] : index) {
    for (const auto& rec : records) {
      nlohmann::json boxes = nlohmann::json::array();
      for (const auto& b : rec.boxes) boxes.push_back({b.row0, b.row1, b.col0, b.col1});
      out << nlohmann::json{{"video_id", video_id},
                            {"frame_index", rec.frame_index},
                            {"boxes", boxes}}
                 .dump()
          << '\n';
    }
  }
}

}  // namespace egocf::videocf

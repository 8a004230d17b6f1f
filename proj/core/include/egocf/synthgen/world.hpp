#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "egocf/videocf/region.hpp"

namespace egocf::synthgen {

struct WorldSpec {
  std::vector<std::string> verbs{"open", "close", "take", "put", "pour"};
  std::vector<std::string> objects{"milk", "microwave", "cup", "bowl", "drawer"};
  std::size_t height = 64;
  std::size_t width = 64;
  std::size_t channels = 1;
  std::size_t n_frames = 8;
  // Event glyphs are glyph_size x glyph_size and centred in the f_v1 region.
  std::size_t glyph_size = 24;
  // Distractors are square patterns drawn in the border outside f_v3.
  std::size_t distractor_size = 8;
  std::size_t distractors_per_frame = 1;
  double noise_level = 0.05;
  std::uint64_t glyph_seed = 7;

  // Throws ConfigError when glyphs or distractors cannot be placed.
  void validate() const;
  std::size_t pair_count() const { return verbs.size() * objects.size(); }
};

nlohmann::json to_json(const WorldSpec& w);
WorldSpec world_from_json(const nlohmann::json& j);

struct Event {
  std::size_t verb = 0;
  std::size_t object = 0;
  bool operator==(const Event&) const = default;
};

// Labels: every (verb, object) pair in verb-major order, then "yes", "no".
class AnswerSet {
 public:
  explicit AnswerSet(const WorldSpec& world);

  std::size_t size() const { return strings_.size(); }
  std::size_t label_of(const Event& e) const { return e.verb * objects_ + e.object; }
  std::size_t yes() const { return strings_.size() - 2; }
  std::size_t no() const { return strings_.size() - 1; }
  const std::string& text(std::size_t label) const { return strings_.at(label); }
  const std::vector<std::string>& strings() const { return strings_; }

 private:
  std::size_t objects_ = 0;
  std::vector<std::string> strings_;
};

// Binary glyph per (verb, object) pair, glyph_size^2 cells, row-major.
class GlyphTable {
 public:
  explicit GlyphTable(const WorldSpec& world);

  const std::vector<std::uint8_t>& glyph(const Event& e) const;
  std::size_t size() const { return glyphs_.size(); }
  std::size_t glyph_size() const { return glyph_size_; }
  const std::vector<std::uint8_t>& at(std::size_t pair) const { return glyphs_.at(pair); }

 private:
  std::size_t objects_ = 0;
  std::size_t glyph_size_ = 0;
  std::vector<std::vector<std::uint8_t>> glyphs_;
};

// Where the event glyph lands in every frame.
videocf::Rect glyph_rect(const WorldSpec& world);

}  // namespace egocf::synthgen

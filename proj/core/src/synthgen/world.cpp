#include "egocf/synthgen/world.hpp"

#include "egocf/errors.hpp"
#include "egocf/numkit/rng.hpp"

namespace egocf::synthgen {
namespace {

template <typename T>
void read_if_present(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void WorldSpec::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("WorldSpec: " + what); };
  if (verbs.empty() || objects.empty()) fail("verbs and objects must be nonempty");
  if (pair_count() < 2) fail("need at least two (verb, object) pairs");
  if (height < 4 || width < 4 || channels == 0 || n_frames == 0) {
    fail("frame extents too small");
  }
  if (glyph_size == 0 || glyph_size > std::min(height, width) / 2) {
    fail("glyph_size must be in [1, min(H, W)/2] so the glyph fits the centre region");
  }
  if (distractor_size == 0 || distractor_size > height / 4 || distractor_size > width / 4) {
    fail("distractor_size must fit inside the border outside the f_v3 region");
  }
  if (!(noise_level >= 0.0 && noise_level < 1.0)) fail("noise_level must be in [0, 1)");
  const auto g = glyph_rect(*this);
  if (g.row0 < height / 4 || g.row1 > 3 * height / 4 || g.col0 < width / 4 ||
      g.col1 > 3 * width / 4) {
    fail("glyph does not fit inside the centre region");
  }
}

nlohmann::json to_json(const WorldSpec& w) {
  return {{"verbs", w.verbs},
          {"objects", w.objects},
          {"height", w.height},
          {"width", w.width},
          {"channels", w.channels},
          {"n_frames", w.n_frames},
          {"glyph_size", w.glyph_size},
          {"distractor_size", w.distractor_size},
          {"distractors_per_frame", w.distractors_per_frame},
          {"noise_level", w.noise_level},
          {"glyph_seed", w.glyph_seed}};
}

WorldSpec world_from_json(const nlohmann::json& j) {
  WorldSpec w;
  read_if_present(j, "verbs", w.verbs);
  read_if_present(j, "objects", w.objects);
  read_if_present(j, "height", w.height);
  read_if_present(j, "width", w.width);
  read_if_present(j, "channels", w.channels);
  read_if_present(j, "n_frames", w.n_frames);
  read_if_present(j, "glyph_size", w.glyph_size);
  read_if_present(j, "distractor_size", w.distractor_size);
  read_if_present(j, "distractors_per_frame", w.distractors_per_frame);
  read_if_present(j, "noise_level", w.noise_level);
  read_if_present(j, "glyph_seed", w.glyph_seed);
  return w;
}

AnswerSet::AnswerSet(const WorldSpec& world) : objects_(world.objects.size()) {
  for (const auto& v : world.verbs) {
    for (const auto& o : world.objects) strings_.push_back(v + " " + o);
  }
  strings_.push_back("yes");
  strings_.push_back("no");
}

GlyphTable::GlyphTable(const WorldSpec& world)
    : objects_(world.objects.size()), glyph_size_(world.glyph_size) {
  const std::size_t cells = glyph_size_ * glyph_size_;
  glyphs_.reserve(world.pair_count());
  for (std::size_t pair = 0; pair < world.pair_count(); ++pair) {
    numkit::Rng rng(numkit::Rng::derive_seed(world.glyph_seed, {pair}));
    std::vector<std::uint8_t> g(cells);
    for (auto& cell : g) cell = static_cast<std::uint8_t>(rng.next_u64() >> 63);
    glyphs_.push_back(std::move(g));
  }
}

const std::vector<std::uint8_t>& GlyphTable::glyph(const Event& e) const {
  return glyphs_.at(e.verb * objects_ + e.object);
}

videocf::Rect glyph_rect(const WorldSpec& w) {
  const std::size_t r0 = w.height / 2 - w.glyph_size / 2;
  const std::size_t c0 = w.width / 2 - w.glyph_size / 2;
  return {r0, r0 + w.glyph_size, c0, c0 + w.glyph_size};
}

}  // namespace egocf::synthgen

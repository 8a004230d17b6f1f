#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "egocf/numkit/rng.hpp"
#include "egocf/synthgen/world.hpp"
#include "egocf/textcf/question.hpp"
#include "egocf/videocf/frame_grid.hpp"

namespace egocf::synthgen {

struct Episode {
  std::vector<Event> events;
  std::uint64_t seed = 0;
};

// K uniform (verb, object) draws with no two consecutive events equal.
// Throws InputError for K < 2.
Episode generate_episode(const WorldSpec& world, std::size_t k, numkit::Rng& rng);

// Event shown in each of n_frames frames: frame n shows event
// floor(n * K / n_frames), so every event gets at least one frame when
// K <= n_frames.
std::vector<std::size_t> frame_events(std::size_t n_frames, std::size_t k);

struct RenderLayers {
  bool glyphs = true;
  bool distractors = true;
  bool noise = true;
};

// Draws each frame's event glyph at glyph_rect(world), distractors in the
// border outside the f_v3 region, then additive noise in [0, noise_level);
// values are clamped to [0, 1]. Throws ConfigError if the episode has more
// events than frames.
videocf::FrameGrid render_episode(const Episode& ep, const WorldSpec& world,
                                  const GlyphTable& glyphs, numkit::Rng& rng,
                                  RenderLayers layers = {});

enum class Category { kAfter, kBefore, kFirst, kLast, kBinary };

std::string_view to_string(Category c);
Category parse_category(std::string_view name);
bool is_open(Category c);

struct QARecord {
  std::string video_id;
  textcf::Tokens question;
  std::size_t answer_label = 0;
  Category category = Category::kBinary;
};

// Every question the templates can ask about the episode:
//   after <e_i>  -> e_{i+1}     before <e_i> -> e_{i-1}
//   first action -> e_0         last action  -> e_{K-1}
//   did the person <e> -> yes (one event from the episode) / no (one absent pair)
// after/before are only asked about events that occur exactly once.
std::vector<QARecord> generate_qa(const Episode& ep, const WorldSpec& world,
                                  const AnswerSet& answers, numkit::Rng& rng);

textcf::Tokens event_phrase(const WorldSpec& world, const Event& e);

}  // namespace egocf::synthgen

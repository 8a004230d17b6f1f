#include "egocf/synthgen/generate.hpp"

#include <algorithm>

#include "egocf/errors.hpp"

namespace egocf::synthgen {

Episode generate_episode(const WorldSpec& world, std::size_t k, numkit::Rng& rng) {
  if (k < 2) throw InputError("generate_episode: an episode needs at least 2 events");
  const std::size_t pairs = world.pair_count();
  const std::size_t n_objects = world.objects.size();
  Episode ep;
  std::size_t prev = pairs;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t pick;
    if (prev == pairs) {
      pick = rng.index(pairs);
    } else {
      // Uniform over the pairs other than the previous one.
      pick = rng.index(pairs - 1);
      if (pick >= prev) ++pick;
    }
    ep.events.push_back({pick / n_objects, pick % n_objects});
    prev = pick;
  }
  return ep;
}

std::vector<std::size_t> frame_events(std::size_t n_frames, std::size_t k) {
  std::vector<std::size_t> out(n_frames);
  for (std::size_t n = 0; n < n_frames; ++n) out[n] = n * k / n_frames;
  return out;
}

videocf::FrameGrid render_episode(const Episode& ep, const WorldSpec& world,
                                  const GlyphTable& glyphs, numkit::Rng& rng,
                                  RenderLayers layers) {
  if (ep.events.empty() || ep.events.size() > world.n_frames) {
    throw ConfigError("render_episode: " + std::to_string(ep.events.size()) +
                      " events cannot be shown in " + std::to_string(world.n_frames) +
                      " frames");
  }
  const std::size_t H = world.height, W = world.width, C = world.channels;
  videocf::FrameGrid v(world.n_frames, C, H, W, 0.0);
  const auto rect = glyph_rect(world);
  const std::size_t G = world.glyph_size;
  const std::size_t D = world.distractor_size;
  const auto shown = frame_events(world.n_frames, ep.events.size());

  for (std::size_t n = 0; n < world.n_frames; ++n) {
    if (layers.glyphs) {
      const auto& g = glyphs.glyph(ep.events[shown[n]]);
      for (std::size_t r = 0; r < G; ++r) {
        for (std::size_t c = 0; c < G; ++c) {
          if (!g[r * G + c]) continue;
          for (std::size_t ch = 0; ch < C; ++ch) v.at(n, ch, rect.row0 + r, rect.col0 + c) = 1.0;
        }
      }
    }
    if (layers.distractors) {
      for (std::size_t k = 0; k < world.distractors_per_frame; ++k) {
        // Top band, left band or right band; all three avoid the f_v3 region
        // rows [H/4, H) x cols [W/4, 3W/4).
        std::size_t r0 = 0, c0 = 0;
        switch (rng.index(3)) {
          case 0:
            r0 = rng.index(H / 4 - D + 1);
            c0 = rng.index(W - D + 1);
            break;
          case 1:
            r0 = rng.index(H - D + 1);
            c0 = rng.index(W / 4 - D + 1);
            break;
          default:
            r0 = rng.index(H - D + 1);
            c0 = 3 * W / 4 + rng.index(W - 3 * W / 4 - D + 1);
            break;
        }
        for (std::size_t r = 0; r < D; ++r) {
          for (std::size_t c = 0; c < D; ++c) {
            const double value = 0.25 + 0.75 * rng.uniform();
            for (std::size_t ch = 0; ch < C; ++ch) {
              double& px = v.at(n, ch, r0 + r, c0 + c);
              px = std::max(px, value);
            }
          }
        }
      }
    }
  }
  if (layers.noise && world.noise_level > 0.0) {
    for (double& px : v.tensor().values()) {
      px = std::clamp(px + world.noise_level * rng.uniform(), 0.0, 1.0);
    }
  }
  return v;
}

std::string_view to_string(Category c) {
  switch (c) {
    case Category::kAfter: return "after";
    case Category::kBefore: return "before";
    case Category::kFirst: return "first";
    case Category::kLast: return "last";
    case Category::kBinary: return "binary";
  }
  return "unknown";
}

Category parse_category(std::string_view name) {
  for (auto c : {Category::kAfter, Category::kBefore, Category::kFirst, Category::kLast,
                 Category::kBinary}) {
    if (to_string(c) == name) return c;
  }
  throw FormatError("unknown question category '" + std::string(name) + "'");
}

bool is_open(Category c) { return c != Category::kBinary; }

textcf::Tokens event_phrase(const WorldSpec& world, const Event& e) {
  return {world.verbs.at(e.verb), "the", world.objects.at(e.object)};
}

std::vector<QARecord> generate_qa(const Episode& ep, const WorldSpec& world,
                                  const AnswerSet& answers, numkit::Rng& rng) {
  std::vector<QARecord> out;
  const auto& ev = ep.events;
  const std::size_t k = ev.size();
  auto occurrences = [&](const Event& e) {
    return static_cast<std::size_t>(std::count(ev.begin(), ev.end(), e));
  };
  auto ask = [&](std::vector<std::string> prefix, const Event& e, std::size_t label,
                 Category cat) {
    auto phrase = event_phrase(world, e);
    prefix.insert(prefix.end(), phrase.begin(), phrase.end());
    out.push_back({{}, std::move(prefix), label, cat});
  };

  for (std::size_t i = 0; i + 1 < k; ++i) {
    if (occurrences(ev[i]) == 1) {
      ask({"what", "did", "the", "person", "do", "after"}, ev[i],
          answers.label_of(ev[i + 1]), Category::kAfter);
    }
  }
  for (std::size_t i = 1; i < k; ++i) {
    if (occurrences(ev[i]) == 1) {
      ask({"what", "did", "the", "person", "do", "before"}, ev[i],
          answers.label_of(ev[i - 1]), Category::kBefore);
    }
  }
  out.push_back({{}, {"what", "was", "the", "first", "action"}, answers.label_of(ev.front()),
                 Category::kFirst});
  out.push_back({{}, {"what", "was", "the", "last", "action"}, answers.label_of(ev.back()),
                 Category::kLast});

  ask({"did", "the", "person"}, ev[rng.index(k)], answers.yes(), Category::kBinary);
  std::vector<Event> absent;
  for (std::size_t v = 0; v < world.verbs.size(); ++v) {
    for (std::size_t o = 0; o < world.objects.size(); ++o) {
      if (occurrences({v, o}) == 0) absent.push_back({v, o});
    }
  }
  if (!absent.empty()) {
    ask({"did", "the", "person"}, absent[rng.index(absent.size())], answers.no(),
        Category::kBinary);
  }
  return out;
}

}  // namespace egocf::synthgen

#include "egocf/textcf/transforms.hpp"

#include <algorithm>
#include <utility>

#include "egocf/errors.hpp"

namespace egocf::textcf {

std::string_view to_string(TextVariant v) {
  switch (v) {
    case TextVariant::kFq1: return "f_q1";
    case TextVariant::kFq2: return "f_q2";
    case TextVariant::kFq3: return "f_q3";
  }
  return "unknown";
}

TextVariant parse_text_variant(std::string_view name) {
  for (auto v : {TextVariant::kFq1, TextVariant::kFq2, TextVariant::kFq3}) {
    if (to_string(v) == name) return v;
  }
  throw ConfigError("unknown text variant '" + std::string(name) +
                    "' (expected f_q1, f_q2 or f_q3)");
}

Substitution synonym_substitute(const QuestionRecord& q,
                                std::span<const EventSpan> events,
                                const SynonymLexicon& lexicon, numkit::Rng& rng) {
  std::vector<std::size_t> slots;
  for (const auto& e : events) {
    slots.push_back(e.verb_index);
    slots.insert(slots.end(), e.object_indices.begin(), e.object_indices.end());
  }
  std::sort(slots.begin(), slots.end());
  slots.erase(std::unique(slots.begin(), slots.end()), slots.end());

  Substitution result;
  Tokens out;
  out.reserve(q.tokens.size() + 4);
  std::size_t next_slot = 0;
  for (std::size_t i = 0; i < q.tokens.size(); ++i) {
    const bool is_slot = next_slot < slots.size() && slots[next_slot] == i;
    if (is_slot) ++next_slot;
    const Tokens phrase{q.tokens[i]};
    const auto group = is_slot ? lexicon.group_of(phrase) : std::nullopt;
    if (!group) {
      out.push_back(q.tokens[i]);
      continue;
    }
    const auto& members = lexicon.group(*group);
    std::vector<const Tokens*> choices;
    for (const auto& m : members) {
      if (m != phrase) choices.push_back(&m);
    }
    const Tokens& replacement = *choices[rng.index(choices.size())];
    PhraseEdit edit;
    edit.source_begin = i;
    edit.source_end = i + 1;
    edit.target_begin = out.size();
    out.insert(out.end(), replacement.begin(), replacement.end());
    edit.target_end = out.size();
    edit.from = phrase;
    edit.to = replacement;
    edit.group = *group;
    result.edits.push_back(std::move(edit));
  }
  result.identity = result.edits.empty();
  result.record = with_tokens(q, std::move(out));
  return result;
}

QuestionRecord mask_events(const QuestionRecord& q,
                           std::span<const EventSpan> events) {
  std::vector<EventSpan> sorted(events.begin(), events.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const EventSpan& a, const EventSpan& b) { return a.start < b.start; });
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    if (sorted[k].start >= sorted[k].end || sorted[k].end > q.tokens.size()) {
      throw ConsistencyError("mask_events: span [" + std::to_string(sorted[k].start) +
                             ", " + std::to_string(sorted[k].end) +
                             ") is empty or outside the question");
    }
    if (k > 0 && sorted[k].start < sorted[k - 1].end) {
      throw ConsistencyError("mask_events: overlapping event spans at token " +
                             std::to_string(sorted[k].start));
    }
  }
  Tokens out;
  std::size_t i = 0;
  for (const auto& span : sorted) {
    out.insert(out.end(), q.tokens.begin() + static_cast<std::ptrdiff_t>(i),
               q.tokens.begin() + static_cast<std::ptrdiff_t>(span.start));
    out.emplace_back(kMaskToken);
    i = span.end;
  }
  out.insert(out.end(), q.tokens.begin() + static_cast<std::ptrdiff_t>(i), q.tokens.end());
  return with_tokens(q, std::move(out));
}

QuestionRecord swap_temporal(const QuestionRecord& q,
                             std::span<const TemporalMarker> markers,
                             const SwapTable& table) {
  Tokens out = q.tokens;
  for (const auto& m : markers) {
    if (m.token_index >= out.size()) {
      throw ConsistencyError("swap_temporal: marker index " +
                             std::to_string(m.token_index) + " out of range");
    }
    out[m.token_index] = table.image(q.tokens[m.token_index]);
  }
  return with_tokens(q, std::move(out));
}

QuestionTriple make_question_triple(const QuestionRecord& q, TextVariant variant,
                                    const TextResources& res, numkit::Rng& rng) {
  QuestionTriple triple;
  triple.original = q;
  const auto events = detect_events(q, res.vocabulary);

  auto positive = synonym_substitute(q, events, res.lexicon, rng);
  triple.positive = std::move(positive.record);
  triple.positive_edits = std::move(positive.edits);

  switch (variant) {
    case TextVariant::kFq1:
      triple.negative = mask_events(q, events);
      triple.masked_spans = events;
      break;
    case TextVariant::kFq2:
      triple.swapped_markers = detect_temporal_markers(q, res.swaps);
      triple.negative = swap_temporal(q, triple.swapped_markers, res.swaps);
      break;
    case TextVariant::kFq3: {
      // Temporal conversion runs on the masked question, so markers that sat
      // inside an event span are already gone.
      const auto masked = mask_events(q, events);
      triple.masked_spans = events;
      triple.swapped_markers = detect_temporal_markers(masked, res.swaps);
      triple.negative = swap_temporal(masked, triple.swapped_markers, res.swaps);
      break;
    }
  }
  triple.contrastive_usable =
      triple.negative.tokens != q.tokens && triple.negative.tokens != triple.positive.tokens;
  return triple;
}

nlohmann::json to_json(const QuestionRecord& q) {
  return {{"question", q.raw},
          {"tokens", q.tokens},
          {"answer_label", q.answer_label},
          {"category", q.category}};
}

nlohmann::json to_json(const QuestionTriple& t) {
  nlohmann::json edits = nlohmann::json::array();
  for (const auto& e : t.positive_edits) {
    edits.push_back({{"source", {e.source_begin, e.source_end}},
                     {"target", {e.target_begin, e.target_end}},
                     {"from", canonical(e.from)},
                     {"to", canonical(e.to)},
                     {"group", e.group}});
  }
  nlohmann::json masked = nlohmann::json::array();
  for (const auto& s : t.masked_spans) masked.push_back({s.start, s.end});
  nlohmann::json swapped = nlohmann::json::array();
  for (const auto& m : t.swapped_markers) {
    swapped.push_back({{"index", m.token_index}, {"kind", std::string(to_string(m.kind))}});
  }
  return {{"original", to_json(t.original)},
          {"positive", to_json(t.positive)},
          {"negative", to_json(t.negative)},
          {"contrastive_usable", t.contrastive_usable},
          {"provenance",
           {{"synonym_edits", std::move(edits)},
            {"masked_spans", std::move(masked)},
            {"swapped_markers", std::move(swapped)}}}};
}

}  // namespace egocf::textcf

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "egocf/numkit/rng.hpp"
#include "egocf/textcf/events.hpp"
#include "egocf/textcf/lexicon.hpp"
#include "egocf/textcf/question.hpp"

namespace egocf::textcf {

// Negative-sample constructions: f_q1 masks events, f_q2 swaps temporal
// words, f_q3 masks and then swaps. All three use synonym positives.
enum class TextVariant { kFq1, kFq2, kFq3 };

std::string_view to_string(TextVariant v);
// Accepts "f_q1" / "f_q2" / "f_q3"; throws ConfigError otherwise.
TextVariant parse_text_variant(std::string_view name);

// One synonym replacement. Source indices refer to the original question,
// target indices to the paraphrase.
struct PhraseEdit {
  std::size_t source_begin = 0;
  std::size_t source_end = 0;
  std::size_t target_begin = 0;
  std::size_t target_end = 0;
  Tokens from;
  Tokens to;
  std::size_t group = 0;
};

struct Substitution {
  QuestionRecord record;
  std::vector<PhraseEdit> edits;
  bool identity = true;
};

// Replaces the verb and every object noun of each event whose token is in
// the lexicon with a different member of its group, drawn uniformly.
// Tokens outside event spans are copied untouched.
Substitution synonym_substitute(const QuestionRecord& q,
                                std::span<const EventSpan> events,
                                const SynonymLexicon& lexicon, numkit::Rng& rng);

// Replaces each span with a single "[MASK]". Throws ConsistencyError for
// overlapping or out-of-range spans.
QuestionRecord mask_events(const QuestionRecord& q,
                           std::span<const EventSpan> events);

// Replaces each marker token with its swap-table image.
QuestionRecord swap_temporal(const QuestionRecord& q,
                             std::span<const TemporalMarker> markers,
                             const SwapTable& table);

struct QuestionTriple {
  QuestionRecord original;
  QuestionRecord positive;
  QuestionRecord negative;
  // False when the negative transformation changed nothing (or produced
  // the positive).
  bool contrastive_usable = false;

  // Provenance.
  std::vector<PhraseEdit> positive_edits;
  std::vector<EventSpan> masked_spans;           // on the original
  std::vector<TemporalMarker> swapped_markers;   // on the masked question for f_q3
};

struct TextResources {
  EventVocabulary vocabulary;
  SynonymLexicon lexicon;
  SwapTable swaps;
};

QuestionTriple make_question_triple(const QuestionRecord& q, TextVariant variant,
                                    const TextResources& resources,
                                    numkit::Rng& rng);

nlohmann::json to_json(const QuestionRecord& q);
nlohmann::json to_json(const QuestionTriple& triple);

}  // namespace egocf::textcf

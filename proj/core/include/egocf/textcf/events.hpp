#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "egocf/textcf/lexicon.hpp"
#include "egocf/textcf/question.hpp"

namespace egocf::textcf {

// Closed vocabularies driving the event pattern matcher.
struct EventVocabulary {
  std::set<std::string> verbs;
  std::set<std::string> objects;
  std::set<std::string> determiners{"the", "a", "an"};
  std::set<std::string> ordinals{"first", "last", "second", "third"};
  std::set<std::string> action_nouns{"action", "operation", "step"};
};

EventVocabulary make_event_vocabulary(const std::vector<std::string>& verbs,
                                      const std::vector<std::string>& objects);

enum class EventKind {
  kVerbObject,     // verb (determiner)? object
  kOrdinalAction,  // ordinal action-noun, e.g. "first action"
};

// Half-open token range [start, end). For ordinal spans verb_index points
// at the ordinal and object_indices at the action noun.
struct EventSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::size_t verb_index = 0;
  std::vector<std::size_t> object_indices;
  EventKind kind = EventKind::kVerbObject;

  std::size_t length() const { return end - start; }
  bool operator==(const EventSpan&) const = default;
};

struct TemporalMarker {
  std::size_t token_index = 0;
  TemporalKind kind = TemporalKind::kBefore;
  bool operator==(const TemporalMarker&) const = default;
};

// Left-to-right greedy scan for maximal non-overlapping event spans. Throws
// ConfigError when the verb or object vocabulary is empty.
std::vector<EventSpan> detect_events(const QuestionRecord& q,
                                     const EventVocabulary& vocab);

// One marker per token that is a key of the swap table, in index order.
std::vector<TemporalMarker> detect_temporal_markers(const QuestionRecord& q,
                                                    const SwapTable& table);

}  // namespace egocf::textcf

#include "egocf/textcf/events.hpp"

#include "egocf/errors.hpp"

namespace egocf::textcf {

EventVocabulary make_event_vocabulary(const std::vector<std::string>& verbs,
                                      const std::vector<std::string>& objects) {
  EventVocabulary vocab;
  vocab.verbs.insert(verbs.begin(), verbs.end());
  vocab.objects.insert(objects.begin(), objects.end());
  return vocab;
}

std::vector<EventSpan> detect_events(const QuestionRecord& q,
                                     const EventVocabulary& vocab) {
  if (vocab.verbs.empty() || vocab.objects.empty()) {
    throw ConfigError("detect_events: verb and object vocabularies must be nonempty");
  }
  const auto& t = q.tokens;
  const std::size_t n = t.size();
  std::vector<EventSpan> spans;
  std::size_t i = 0;
  while (i < n) {
    if (vocab.verbs.count(t[i])) {
      std::size_t j = i + 1;
      if (j < n && vocab.determiners.count(t[j])) ++j;
      if (j < n && vocab.objects.count(t[j])) {
        spans.push_back({i, j + 1, i, {j}, EventKind::kVerbObject});
        i = j + 1;
        continue;
      }
    }
    if (vocab.ordinals.count(t[i]) && i + 1 < n && vocab.action_nouns.count(t[i + 1])) {
      spans.push_back({i, i + 2, i, {i + 1}, EventKind::kOrdinalAction});
      i += 2;
      continue;
    }
    ++i;
  }
  return spans;
}

std::vector<TemporalMarker> detect_temporal_markers(const QuestionRecord& q,
                                                    const SwapTable& table) {
  std::vector<TemporalMarker> markers;
  for (std::size_t i = 0; i < q.tokens.size(); ++i) {
    if (!table.contains(q.tokens[i])) continue;
    // SwapTable only admits temporal words, so the kind always resolves.
    markers.push_back({i, *temporal_kind_of(q.tokens[i])});
  }
  return markers;
}

}  // namespace egocf::textcf

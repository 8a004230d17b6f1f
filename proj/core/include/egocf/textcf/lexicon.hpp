#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "egocf/textcf/question.hpp"

namespace egocf::textcf {

// Groups of interchangeable phrases; a phrase may span several tokens
// ("turn on"). Every phrase belongs to exactly one group and every group
// has at least two members.
class SynonymLexicon {
 public:
  SynonymLexicon() = default;
  // Throws FormatError when a group is too small or a phrase repeats.
  explicit SynonymLexicon(std::vector<std::vector<Tokens>> groups);

  // TSV: one group per line, phrases separated by tabs. Blank lines and
  // lines starting with '#' are ignored.
  static SynonymLexicon load_tsv(const std::filesystem::path& path);
  static SynonymLexicon parse_tsv(std::string_view text);
  // Kitchen-domain groups matching data/lexicon.tsv.
  static SynonymLexicon defaults();

  std::optional<std::size_t> group_of(const Tokens& phrase) const;
  const std::vector<Tokens>& group(std::size_t id) const { return groups_.at(id); }
  std::size_t group_count() const { return groups_.size(); }
  bool empty() const { return groups_.empty(); }

  // Every token appearing in any phrase.
  std::vector<std::string> vocabulary() const;

 private:
  std::vector<std::vector<Tokens>> groups_;
  std::map<std::string, std::size_t> index_;  // canonical phrase -> group
};

enum class TemporalKind { kBefore, kAfter, kFirst, kLast, kWhile, kThen };

std::string_view to_string(TemporalKind kind);
// Maps "before", "after", ... to their kind; nullopt for other words.
std::optional<TemporalKind> temporal_kind_of(std::string_view word);

// Involutive word map: swap(swap(w)) == w and swap(w) != w for every key.
// Keys are restricted to the six temporal words.
class SwapTable {
 public:
  SwapTable() = default;
  // Each pair is inserted in both directions. Throws FormatError when a word
  // appears in two pairs, is paired with itself, or is not a temporal word.
  explicit SwapTable(const std::vector<std::pair<std::string, std::string>>& pairs);

  // TSV: two tab-separated columns per line.
  static SwapTable load_tsv(const std::filesystem::path& path);
  static SwapTable parse_tsv(std::string_view text);
  // before<->after, first<->last, while<->then.
  static SwapTable defaults();

  bool contains(const std::string& word) const { return map_.count(word) > 0; }
  const std::string& image(const std::string& word) const;
  const std::map<std::string, std::string>& entries() const { return map_; }

 private:
  std::map<std::string, std::string> map_;
};

}  // namespace egocf::textcf

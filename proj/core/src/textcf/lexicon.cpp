#include "egocf/textcf/lexicon.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <utility>

#include "egocf/errors.hpp"

namespace egocf::textcf {
namespace {

constexpr std::string_view kDefaultLexicon =
    "open\tturn on\n"
    "close\tshut\n"
    "take\tpick up\tgrab\n"
    "put\tplace\tset down\n"
    "pour\ttip\n"
    "cup\tmug\n"
    "bowl\tdish\n"
    "drawer\tcabinet drawer\n"
    "action\toperation\tstep\n";

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Splits text into lines, dropping blanks and '#' comments. Returns
// (1-based line number, tab-separated fields).
std::vector<std::pair<std::size_t, std::vector<std::string>>> tsv_rows(
    std::string_view text) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const auto tab = line.find('\t', start);
      fields.emplace_back(line.substr(start, tab == std::string_view::npos
                                                 ? std::string_view::npos
                                                 : tab - start));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
    rows.emplace_back(line_no, std::move(fields));
    if (end == text.size()) break;
  }
  return rows;
}

}  // namespace

SynonymLexicon::SynonymLexicon(std::vector<std::vector<Tokens>> groups)
    : groups_(std::move(groups)) {
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    if (groups_[g].size() < 2) {
      throw FormatError("synonym group " + std::to_string(g) +
                        " has fewer than two members");
    }
    for (const auto& phrase : groups_[g]) {
      if (phrase.empty()) throw FormatError("empty phrase in synonym group " + std::to_string(g));
      const auto key = canonical(phrase);
      if (!index_.emplace(key, g).second) {
        throw FormatError("phrase '" + key + "' appears in more than one synonym slot");
      }
    }
  }
}

SynonymLexicon SynonymLexicon::parse_tsv(std::string_view text) {
  std::vector<std::vector<Tokens>> groups;
  for (auto& [line_no, fields] : tsv_rows(text)) {
    std::vector<Tokens> group;
    for (const auto& f : fields) {
      auto phrase = tokenize(f);
      if (!phrase.empty()) group.push_back(std::move(phrase));
    }
    if (group.size() < 2) {
      throw FormatError("lexicon line " + std::to_string(line_no) +
                        ": a synonym group needs at least two phrases");
    }
    groups.push_back(std::move(group));
  }
  return SynonymLexicon(std::move(groups));
}

SynonymLexicon SynonymLexicon::defaults() {
  return parse_tsv(kDefaultLexicon);
}

SynonymLexicon SynonymLexicon::load_tsv(const std::filesystem::path& path) {
  try {
    return parse_tsv(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::optional<std::size_t> SynonymLexicon::group_of(const Tokens& phrase) const {
  auto it = index_.find(canonical(phrase));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> SynonymLexicon::vocabulary() const {
  std::set<std::string> words;
  for (const auto& group : groups_) {
    for (const auto& phrase : group) words.insert(phrase.begin(), phrase.end());
  }
  return {words.begin(), words.end()};
}

std::string_view to_string(TemporalKind kind) {
  switch (kind) {
    case TemporalKind::kBefore: return "before";
    case TemporalKind::kAfter: return "after";
    case TemporalKind::kFirst: return "first";
    case TemporalKind::kLast: return "last";
    case TemporalKind::kWhile: return "while";
    case TemporalKind::kThen: return "then";
  }
  return "unknown";
}

std::optional<TemporalKind> temporal_kind_of(std::string_view word) {
  for (auto kind : {TemporalKind::kBefore, TemporalKind::kAfter, TemporalKind::kFirst,
                    TemporalKind::kLast, TemporalKind::kWhile, TemporalKind::kThen}) {
    if (to_string(kind) == word) return kind;
  }
  return std::nullopt;
}

SwapTable::SwapTable(const std::vector<std::pair<std::string, std::string>>& pairs) {
  for (const auto& [a, b] : pairs) {
    if (a == b) throw FormatError("swap table pairs '" + a + "' with itself");
    for (const auto& w : {a, b}) {
      if (!temporal_kind_of(w)) {
        throw FormatError("swap table word '" + w + "' is not a temporal marker");
      }
      if (map_.count(w)) {
        throw FormatError("swap table word '" + w + "' appears in two pairs");
      }
    }
    map_.emplace(a, b);
    map_.emplace(b, a);
  }
}

SwapTable SwapTable::parse_tsv(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& [line_no, fields] : tsv_rows(text)) {
    if (fields.size() != 2) {
      throw FormatError("swap table line " + std::to_string(line_no) +
                        ": expected two tab-separated columns");
    }
    auto a = tokenize(fields[0]);
    auto b = tokenize(fields[1]);
    if (a.size() != 1 || b.size() != 1) {
      throw FormatError("swap table line " + std::to_string(line_no) +
                        ": entries must be single words");
    }
    pairs.emplace_back(a[0], b[0]);
  }
  return SwapTable(pairs);
}

SwapTable SwapTable::load_tsv(const std::filesystem::path& path) {
  try {
    return parse_tsv(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

SwapTable SwapTable::defaults() {
  return SwapTable({{"before", "after"}, {"first", "last"}, {"while", "then"}});
}

const std::string& SwapTable::image(const std::string& word) const {
  auto it = map_.find(word);
  if (it == map_.end()) throw ConsistencyError("'" + word + "' is not in the swap table");
  return it->second;
}

}  // namespace egocf::textcf

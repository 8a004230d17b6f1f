#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace egocf::textcf {

inline constexpr std::string_view kMaskToken = "[MASK]";

using Tokens = std::vector<std::string>;

struct QuestionRecord {
  std::string raw;
  Tokens tokens;
  std::size_t answer_label = 0;
  std::string category;
};

// Lowercases, strips sentence punctuation and splits on whitespace.
// Bracketed specials such as "[MASK]" are kept verbatim.
Tokens tokenize(std::string_view text);

// Tokens joined by single spaces; tokenize(canonical(t)) == t.
std::string canonical(const Tokens& tokens);

// Builds a record from raw text. Throws InputError if no tokens remain.
QuestionRecord make_question(std::string raw, std::size_t answer_label = 0,
                             std::string category = {});

// Same record with new tokens; raw becomes their canonical string.
QuestionRecord with_tokens(const QuestionRecord& base, Tokens tokens);

}  // namespace egocf::textcf

#pragma once

#include "egocf/textcf/question.hpp"

namespace egocf::trainkit {

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Longest-common-subsequence length of two token sequences.
std::size_t lcs_length(const textcf::Tokens& a, const textcf::Tokens& b);

// P = LCS/|candidate|, R = LCS/|reference|, F1 = 2PR/(P+R) or 0.
// Throws InputError if either sequence is empty.
RougeScore rouge_l(const textcf::Tokens& candidate, const textcf::Tokens& reference);

}  // namespace egocf::trainkit

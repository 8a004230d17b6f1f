#include "egocf/trainkit/rouge.hpp"

#include <algorithm>
#include <vector>

#include "egocf/errors.hpp"

namespace egocf::trainkit {

std::size_t lcs_length(const textcf::Tokens& a, const textcf::Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

RougeScore rouge_l(const textcf::Tokens& candidate, const textcf::Tokens& reference) {
  if (candidate.empty() || reference.empty()) {
    throw InputError("rouge_l: candidate and reference must be nonempty");
  }
  const double lcs = static_cast<double>(lcs_length(candidate, reference));
  RougeScore s;
  s.precision = lcs / static_cast<double>(candidate.size());
  s.recall = lcs / static_cast<double>(reference.size());
  if (s.precision + s.recall > 0.0) {
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  }
  return s;
}

}  // namespace egocf::trainkit

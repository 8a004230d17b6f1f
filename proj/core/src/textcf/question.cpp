#include "egocf/textcf/question.hpp"

#include <cctype>
#include <utility>

#include "egocf/errors.hpp"

namespace egocf::textcf {
namespace {

bool is_dropped_punct(char c) {
  return c == '?' || c == '!' || c == '.' || c == ',' || c == ';' || c == ':';
}

}  // namespace

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '[') {
      const auto close = text.find(']', i);
      if (close != std::string_view::npos) {
        flush();
        out.emplace_back(text.substr(i, close - i + 1));
        i = close;
        continue;
      }
    }
    if (std::isspace(static_cast<unsigned char>(c)) || is_dropped_punct(c)) {
      flush();
    } else {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  flush();
  return out;
}

std::string canonical(const Tokens& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

QuestionRecord make_question(std::string raw, std::size_t answer_label,
                             std::string category) {
  QuestionRecord q;
  q.tokens = tokenize(raw);
  if (q.tokens.empty()) throw InputError("question has no tokens: '" + raw + "'");
  q.raw = std::move(raw);
  q.answer_label = answer_label;
  q.category = std::move(category);
  return q;
}

QuestionRecord with_tokens(const QuestionRecord& base, Tokens tokens) {
  QuestionRecord q = base;
  q.raw = canonical(tokens);
  q.tokens = std::move(tokens);
  return q;
}

}  // namespace egocf::textcf

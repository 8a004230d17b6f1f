#include "egocf/model/config.hpp"

#include <algorithm>

#include "egocf/errors.hpp"

namespace egocf::model {
namespace {

template <typename T>
void read_if_present(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void ModelConfig::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("ModelConfig: " + what); };
  if (d == 0 || heads == 0 || d % heads != 0) fail("d must be a positive multiple of heads");
  if (n_frames == 0) fail("n_frames must be >= 1");
  if (text_len == 0) fail("text_len must be >= 1");
  if (answer_set_size < 2) fail("answer_set_size must be >= 2");
  if (token_vocab_size < 3) fail("token_vocab_size must cover the reserved tokens");
  if (channels == 0 || height == 0 || width == 0) fail("frame extents must be positive");
  if (patch_size == 0 || height % patch_size != 0 || width % patch_size != 0) {
    fail("patch_size must divide height and width");
  }
  if (ff_hidden == 0) fail("ff_hidden must be positive");
}

nlohmann::json to_json(const ModelConfig& c) {
  return {{"d", c.d},
          {"heads", c.heads},
          {"n_video_layers", c.n_video_layers},
          {"n_text_layers", c.n_text_layers},
          {"n_frames", c.n_frames},
          {"channels", c.channels},
          {"height", c.height},
          {"width", c.width},
          {"patch_size", c.patch_size},
          {"text_len", c.text_len},
          {"token_vocab_size", c.token_vocab_size},
          {"answer_set_size", c.answer_set_size},
          {"ff_hidden", c.ff_hidden},
          {"seed", c.seed}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  read_if_present(j, "d", c.d);
  read_if_present(j, "heads", c.heads);
  read_if_present(j, "n_video_layers", c.n_video_layers);
  read_if_present(j, "n_text_layers", c.n_text_layers);
  read_if_present(j, "n_frames", c.n_frames);
  read_if_present(j, "channels", c.channels);
  read_if_present(j, "height", c.height);
  read_if_present(j, "width", c.width);
  read_if_present(j, "patch_size", c.patch_size);
  read_if_present(j, "text_len", c.text_len);
  read_if_present(j, "token_vocab_size", c.token_vocab_size);
  read_if_present(j, "answer_set_size", c.answer_set_size);
  read_if_present(j, "ff_hidden", c.ff_hidden);
  read_if_present(j, "seed", c.seed);
  return c;
}

Vocabulary::Vocabulary() : words_{"[PAD]", "[UNK]", "[MASK]"} {}

Vocabulary::Vocabulary(const std::vector<std::string>& words) : Vocabulary() {
  for (const auto& w : words) {
    if (std::find(words_.begin(), words_.end(), w) == words_.end()) words_.push_back(w);
  }
}

TokenId Vocabulary::id(const std::string& word) const {
  auto it = std::find(words_.begin(), words_.end(), word);
  return it == words_.end() ? kUnk : static_cast<TokenId>(it - words_.begin());
}

const std::string& Vocabulary::word(TokenId id) const {
  if (id >= words_.size()) {
    throw InputError("token id " + std::to_string(id) + " outside vocabulary of " +
                     std::to_string(words_.size()));
  }
  return words_[id];
}

std::vector<TokenId> Vocabulary::encode(std::span<const std::string> tokens,
                                        std::size_t length) const {
  std::vector<TokenId> ids(length, kPad);
  for (std::size_t i = 0; i < std::min(length, tokens.size()); ++i) ids[i] = id(tokens[i]);
  return ids;
}

}  // namespace egocf::model

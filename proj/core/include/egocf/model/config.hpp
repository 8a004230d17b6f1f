#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace egocf::model {

using TokenId = std::size_t;

struct ModelConfig {
  std::size_t d = 64;
  std::size_t heads = 4;
  std::size_t n_video_layers = 2;
  std::size_t n_text_layers = 2;
  std::size_t n_frames = 8;
  std::size_t channels = 1;
  std::size_t height = 64;
  std::size_t width = 64;
  std::size_t patch_size = 8;
  std::size_t text_len = 16;
  std::size_t token_vocab_size = 0;
  std::size_t answer_set_size = 0;
  std::size_t ff_hidden = 128;
  std::uint64_t seed = 0;

  // Throws ConfigError describing the first violated constraint.
  void validate() const;

  std::size_t patches_per_frame() const {
    return (height / patch_size) * (width / patch_size);
  }
  std::size_t patch_dim() const { return channels * patch_size * patch_size; }

  bool operator==(const ModelConfig&) const = default;
};

nlohmann::json to_json(const ModelConfig& config);
// Missing keys keep their defaults.
ModelConfig model_config_from_json(const nlohmann::json& j);

// Closed token vocabulary. Ids 0..2 are reserved for [PAD], [UNK], [MASK].
class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr TokenId kMask = 2;

  Vocabulary();
  // Reserved tokens first, then `words` in order with duplicates dropped.
  explicit Vocabulary(const std::vector<std::string>& words);

  std::size_t size() const { return words_.size(); }
  TokenId id(const std::string& word) const;  // kUnk when absent
  const std::string& word(TokenId id) const;
  const std::vector<std::string>& words() const { return words_; }

  // Maps tokens to ids, truncating or padding with kPad to `length`.
  std::vector<TokenId> encode(std::span<const std::string> tokens,
                              std::size_t length) const;

 private:
  std::vector<std::string> words_;
};

}  // namespace egocf::model

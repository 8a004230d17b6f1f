#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "egocf/losses/losses.hpp"
#include "egocf/model/config.hpp"
#include "egocf/textcf/transforms.hpp"
#include "egocf/videocf/region.hpp"

namespace egocf::trainkit {

inline constexpr std::size_t kStage1DefaultEpochs = 35;
inline constexpr std::size_t kStage2DefaultEpochs = 5;

struct TrainPaths {
  std::string dataset;
  std::string lexicon;     // empty: built-in lexicon
  std::string swap_table;  // empty: built-in swap table
  std::string bboxes;      // empty: the dataset's bboxes.jsonl, if any
  std::string checkpoint_in;
  std::string checkpoint_out;
  std::string metrics_out;
};

struct TrainConfig {
  int stage = 1;
  // 0 selects the stage default (35 / 5).
  std::size_t epochs = 0;
  std::size_t batch_size = 32;
  double lr = 1e-3;
  double weight_decay = 1e-4;
  std::uint64_t seed = 0;
  losses::LossWeights weights;
  textcf::TextVariant text_variant = textcf::TextVariant::kFq3;
  videocf::VideoVariant video_variant = videocf::VideoVariant::kFv1;
  double fill = 0.0;
  // Same augmentation draw for a sample in every epoch.
  bool freeze_augmentation = false;
  // Fresh Adam moments at the start of stage 2.
  bool reset_optimizer = true;
  // Train on the first max_samples records only; 0 means all.
  std::size_t max_samples = 0;
  // Architecture. Vocabulary and answer-set sizes come from the dataset.
  model::ModelConfig model;
  TrainPaths paths;

  std::size_t effective_epochs() const;
  // Throws ConfigError on the first violated constraint.
  void validate() const;
};

nlohmann::json to_json(const TrainConfig& cfg);
// Missing keys keep their defaults; unknown keys throw ConfigError.
TrainConfig train_config_from_json(const nlohmann::json& j);
TrainConfig load_train_config(const std::filesystem::path& path);

// Flag name -> JSON pointer into to_json(TrainConfig{}). Leaves under
// "weights" and "paths" use their bare names, model keys are "model.<key>".
struct OverrideKey {
  std::string flag;
  std::string pointer;
};
std::vector<OverrideKey> override_keys();

// Sets one key from its command-line text. Numbers and booleans are parsed
// as JSON; string-valued keys take the text verbatim. Throws ConfigError on
// unknown keys or values of the wrong type.
void apply_override(TrainConfig& cfg, const std::string& flag, const std::string& value);

}  // namespace egocf::trainkit

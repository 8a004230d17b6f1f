#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "egocf/losses/losses.hpp"
#include "egocf/model/model.hpp"
#include "egocf/numkit/adam.hpp"
#include "egocf/numkit/param_store.hpp"
#include "egocf/numkit/rng.hpp"
#include "egocf/synthgen/dataset.hpp"
#include "egocf/textcf/transforms.hpp"
#include "egocf/trainkit/config.hpp"
#include "egocf/videocf/region.hpp"

namespace egocf::trainkit {

struct Checkpoint {
  model::ModelConfig model_config;
  numkit::ParamStore params;
  numkit::AdamState adam;
  std::vector<std::string> answers;
  // Full token list including the reserved ids.
  std::vector<std::string> vocabulary;
  int stage = 0;
  std::size_t epochs_completed = 0;
};

// Written to a sibling temporary file and renamed into place, so a crash
// never leaves a half-written checkpoint at `path`.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
// Throws FormatError for archives that are not checkpoints.
Checkpoint load_checkpoint(const std::filesystem::path& path);

model::Model model_from_checkpoint(const Checkpoint& ckpt);

// Builds (original, positive, negative) in both modalities for one record.
class Augmenter {
 public:
  // Loads the lexicon, swap table and boxes named in cfg.paths. Throws
  // ConfigError for f_v4 when no box file is available.
  Augmenter(const TrainConfig& cfg, const synthgen::Dataset& dataset);

  struct Sample {
    textcf::QuestionTriple text;
    videocf::VideoPair video;
  };
  Sample make(const synthgen::QARecord& record, const videocf::FrameGrid& video,
              numkit::Rng& rng) const;

  const textcf::TextResources& text_resources() const { return text_; }

 private:
  textcf::TextVariant text_variant_;
  videocf::VideoVariant video_variant_;
  double fill_;
  textcf::TextResources text_;
  videocf::BBoxIndex bboxes_;
  std::optional<videocf::RegionSpec> shared_region_;
};

struct EpochSummary {
  int stage = 1;
  // Counted across stages: stage 2 continues after the stage-1 epochs.
  std::size_t epoch = 0;
  losses::LossBreakdown mean;
  double accuracy = 0.0;
  std::size_t samples = 0;
  std::size_t usable = 0;
  std::size_t steps = 0;
};
nlohmann::json to_json(const EpochSummary& e);

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochSummary> epochs;
};

// Untrained checkpoint sized for the dataset; parameters drawn from cfg.seed.
Checkpoint initial_checkpoint(const synthgen::Dataset& dataset, const TrainConfig& cfg);

// Cross-entropy only. Each epoch visits the records in an order drawn from
// (cfg.seed, epoch). Step and epoch rows go to `metrics` as JSON lines; the
// checkpoint is saved to cfg.paths.checkpoint_out after every epoch.
// Throws NumericError on a non-finite loss, leaving the previous epoch's
// checkpoint in place.
TrainResult train_stage1(const synthgen::Dataset& dataset, const TrainConfig& cfg,
                         std::ostream* metrics = nullptr);

// Composite objective over original, positive and negative forwards.
// Throws ConfigError when the checkpoint's answers differ from the dataset's.
TrainResult train_stage2(const synthgen::Dataset& dataset, const TrainConfig& cfg,
                         const Checkpoint& stage1, std::ostream* metrics = nullptr);

// Dispatches on cfg.stage; stage 2 loads cfg.paths.checkpoint_in.
TrainResult train(const synthgen::Dataset& dataset, const TrainConfig& cfg,
                  std::ostream* metrics = nullptr);

}  // namespace egocf::trainkit

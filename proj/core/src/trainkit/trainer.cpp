#include "egocf/trainkit/trainer.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include "egocf/errors.hpp"
#include "egocf/numkit/checkpoint.hpp"
#include "egocf/textcf/events.hpp"

namespace egocf::trainkit {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kAugmentStream = 2;

constexpr const char* kParamPrefix = "param/";
constexpr const char* kMomentPrefix = "adam.m/";
constexpr const char* kVariancePrefix = "adam.v/";

bool starts_with(const std::string& s, const char* prefix) {
  return s.rfind(prefix, 0) == 0;
}

void check_answers(const Checkpoint& ckpt, const synthgen::Dataset& ds) {
  if (ckpt.answers != ds.answers) {
    throw ConfigError("checkpoint answer set (" + std::to_string(ckpt.answers.size()) +
                      " answers) does not match the dataset's (" +
                      std::to_string(ds.answers.size()) + ")");
  }
}

std::vector<std::size_t> training_indices(const synthgen::Dataset& ds,
                                          const TrainConfig& cfg) {
  std::size_t n = ds.records.size();
  if (cfg.max_samples > 0) n = std::min(n, cfg.max_samples);
  if (n == 0) throw InputError("training set is empty");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

struct StepRow {
  losses::LossBreakdown loss;
  std::size_t correct = 0;
  std::size_t usable = 0;
  std::size_t size = 0;
};

class Loop {
 public:
  Loop(const synthgen::Dataset& ds, const TrainConfig& cfg, Checkpoint start, int stage,
       std::ostream* metrics)
      : ds_(ds),
        cfg_(cfg),
        stage_(stage),
        metrics_(metrics),
        ckpt_(std::move(start)),
        model_(model_from_checkpoint(ckpt_)),
        vocab_(ckpt_.vocabulary) {
    if (stage_ == 2) augmenter_.emplace(cfg, ds);
    weights_ = cfg.weights;
    if (stage_ == 1) weights_.alpha = weights_.beta = weights_.lambda = 0.0;
    adam_cfg_.lr = cfg.lr;
    adam_cfg_.weight_decay = cfg.weight_decay;
  }

  TrainResult run() {
    const auto indices = training_indices(ds_, cfg_);
    TrainResult result;
    const std::size_t first = ckpt_.epochs_completed + 1;
    for (std::size_t e = first; e < first + cfg_.effective_epochs(); ++e) {
      result.epochs.push_back(run_epoch(e, indices));
      ckpt_.params = model_.params();
      ckpt_.params.clear_grads();
      ckpt_.stage = stage_;
      ckpt_.epochs_completed = e;
      if (!cfg_.paths.checkpoint_out.empty()) save_checkpoint(cfg_.paths.checkpoint_out, ckpt_);
    }
    result.checkpoint = ckpt_;
    return result;
  }

 private:
  EpochSummary run_epoch(std::size_t epoch, std::vector<std::size_t> order) {
    numkit::Rng(numkit::Rng::derive_seed(cfg_.seed, {kShuffleStream, epoch})).shuffle(order);
    EpochSummary summary;
    summary.stage = stage_;
    summary.epoch = epoch;
    std::size_t correct = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg_.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg_.batch_size);
      const StepRow row = step(epoch, {order.begin() + begin, order.begin() + end});
      ++summary.steps;
      correct += row.correct;
      summary.usable += row.usable;
      summary.mean.l_qa += row.loss.l_qa;
      summary.mean.l_pos += row.loss.l_pos;
      summary.mean.l_neg += row.loss.l_neg;
      summary.mean.l_con += row.loss.l_con;
      if (metrics_) {
        json j = {{"kind", "step"}, {"stage", stage_}, {"epoch", epoch},
                  {"step", summary.steps}, {"batch", row.size}, {"usable", row.usable},
                  {"correct", row.correct}};
        j.update(losses::to_json(row.loss));
        *metrics_ << j.dump() << '\n';
      }
    }
    const double steps = static_cast<double>(summary.steps);
    summary.mean = losses::total_loss(summary.mean.l_qa / steps, summary.mean.l_pos / steps,
                                      summary.mean.l_neg / steps, summary.mean.l_con / steps,
                                      weights_);
    summary.samples = order.size();
    summary.accuracy = static_cast<double>(correct) / static_cast<double>(order.size());
    if (metrics_) {
      *metrics_ << to_json(summary).dump() << '\n';
      metrics_->flush();
    }
    return summary;
  }

  StepRow step(std::size_t epoch, std::vector<std::size_t> batch) {
    const std::size_t b = batch.size();
    const std::size_t len = model_.config().text_len;
    std::vector<model::ForwardTrace> orig(b), pos(b), neg(b);
    std::vector<losses::CounterfactualSample> samples(b);
    StepRow row;
    row.size = b;
    for (std::size_t i = 0; i < b; ++i) {
      const auto& rec = ds_.records[batch[i]];
      const auto& video = ds_.video(rec.video_id);
      orig[i] = model_.trace(video, vocab_.encode(rec.question, len));
      samples[i].original = &orig[i].output();
      samples[i].label = rec.answer_label;
      if (orig[i].output().argmax() == rec.answer_label) ++row.correct;
      if (!augmenter_) continue;
      numkit::Rng rng(numkit::Rng::derive_seed(
          cfg_.seed, {kAugmentStream, cfg_.freeze_augmentation ? 0 : epoch, batch[i]}));
      const auto cf = augmenter_->make(rec, video, rng);
      if (!cf.text.contrastive_usable) continue;
      pos[i] = model_.trace(cf.video.positive, vocab_.encode(cf.text.positive.tokens, len));
      neg[i] = model_.trace(cf.video.negative, vocab_.encode(cf.text.negative.tokens, len));
      samples[i].positive = &pos[i].output();
      samples[i].negative = &neg[i].output();
      samples[i].usable = true;
      ++row.usable;
    }
    const auto result = losses::composite_loss(samples, weights_);
    row.loss = result.breakdown;
    if (!std::isfinite(row.loss.total)) {
      throw NumericError("non-finite loss at stage " + std::to_string(stage_) + " epoch " +
                         std::to_string(epoch) + "; last good checkpoint kept");
    }
    model_.params().zero_grads();
    for (std::size_t i = 0; i < b; ++i) {
      model_.backward(orig[i], result.d_original[i]);
      if (samples[i].usable) {
        model_.backward(pos[i], result.d_positive[i]);
        model_.backward(neg[i], result.d_negative[i]);
      }
    }
    numkit::adam_step(model_.params(), ckpt_.adam, adam_cfg_);
    return row;
  }

  const synthgen::Dataset& ds_;
  const TrainConfig& cfg_;
  int stage_;
  std::ostream* metrics_;
  Checkpoint ckpt_;
  model::Model model_;
  model::Vocabulary vocab_;
  std::optional<Augmenter> augmenter_;
  losses::LossWeights weights_;
  numkit::AdamConfig adam_cfg_;
};

}  // namespace

void save_checkpoint(const fs::path& path, const Checkpoint& c) {
  numkit::TensorArchive archive;
  for (const auto& [name, t] : c.params.values()) archive.tensors.emplace(kParamPrefix + name, t);
  for (const auto& [name, t] : c.adam.m) archive.tensors.emplace(kMomentPrefix + name, t);
  for (const auto& [name, t] : c.adam.v) archive.tensors.emplace(kVariancePrefix + name, t);
  archive.meta = {{"kind", "egocf-checkpoint"},
                  {"model", model::to_json(c.model_config)},
                  {"answers", c.answers},
                  {"vocabulary", c.vocabulary},
                  {"stage", c.stage},
                  {"epochs_completed", c.epochs_completed},
                  {"adam_t", c.adam.t}};
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  numkit::write_archive(tmp, archive);
  fs::rename(tmp, path);
}

Checkpoint load_checkpoint(const fs::path& path) {
  auto archive = numkit::read_archive(path);
  if (archive.meta.value("kind", std::string()) != "egocf-checkpoint") {
    throw FormatError(path.string() + ": not a model checkpoint");
  }
  Checkpoint c;
  try {
    c.model_config = model::model_config_from_json(archive.meta.at("model"));
    c.answers = archive.meta.at("answers").get<std::vector<std::string>>();
    c.vocabulary = archive.meta.at("vocabulary").get<std::vector<std::string>>();
    c.stage = archive.meta.at("stage").get<int>();
    c.epochs_completed = archive.meta.at("epochs_completed").get<std::size_t>();
    c.adam.t = archive.meta.at("adam_t").get<std::int64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": bad checkpoint metadata: " + e.what());
  }
  for (auto& [name, t] : archive.tensors) {
    if (starts_with(name, kParamPrefix)) {
      c.params.add(name.substr(std::char_traits<char>::length(kParamPrefix)), std::move(t));
    } else if (starts_with(name, kMomentPrefix)) {
      c.adam.m.emplace(name.substr(std::char_traits<char>::length(kMomentPrefix)), std::move(t));
    } else if (starts_with(name, kVariancePrefix)) {
      c.adam.v.emplace(name.substr(std::char_traits<char>::length(kVariancePrefix)),
                       std::move(t));
    } else {
      throw FormatError(path.string() + ": unexpected tensor " + name);
    }
  }
  return c;
}

model::Model model_from_checkpoint(const Checkpoint& c) {
  return model::Model(c.model_config, c.params);
}

Augmenter::Augmenter(const TrainConfig& cfg, const synthgen::Dataset& ds)
    : text_variant_(cfg.text_variant), video_variant_(cfg.video_variant), fill_(cfg.fill) {
  text_.vocabulary = textcf::make_event_vocabulary(ds.world.verbs, ds.world.objects);
  text_.lexicon = cfg.paths.lexicon.empty() ? textcf::SynonymLexicon::defaults()
                                            : textcf::SynonymLexicon::load_tsv(cfg.paths.lexicon);
  text_.swaps = cfg.paths.swap_table.empty() ? textcf::SwapTable::defaults()
                                             : textcf::SwapTable::load_tsv(cfg.paths.swap_table);
  if (video_variant_ == videocf::VideoVariant::kFv4) {
    if (!cfg.paths.bboxes.empty()) {
      if (!fs::exists(cfg.paths.bboxes)) {
        throw ConfigError("f_v4 needs hand-object boxes; missing file " + cfg.paths.bboxes);
      }
      bboxes_ = videocf::read_bboxes(cfg.paths.bboxes);
    } else if (!ds.bboxes.empty()) {
      bboxes_ = ds.bboxes;
    } else {
      throw ConfigError("f_v4 needs hand-object boxes; set paths.bboxes");
    }
  } else {
    shared_region_ = videocf::select_region(video_variant_, ds.world.height, ds.world.width,
                                            ds.world.n_frames);
  }
}

Augmenter::Sample Augmenter::make(const synthgen::QARecord& record,
                                  const videocf::FrameGrid& video, numkit::Rng& rng) const {
  Sample s;
  auto q = textcf::with_tokens(textcf::QuestionRecord{}, record.question);
  q.answer_label = record.answer_label;
  q.category = std::string(synthgen::to_string(record.category));
  s.text = textcf::make_question_triple(q, text_variant_, text_, rng);
  if (shared_region_) {
    s.video = videocf::make_video_pair(video, *shared_region_, fill_);
  } else {
    static const std::vector<videocf::BBoxRecord> kNone;
    auto it = bboxes_.find(record.video_id);
    const auto& boxes = it == bboxes_.end() ? kNone : it->second;
    s.video = videocf::make_video_pair(video, video_variant_,
                                       std::span<const videocf::BBoxRecord>(boxes), fill_);
  }
  return s;
}

json to_json(const EpochSummary& e) {
  json j = {{"kind", "epoch"}, {"stage", e.stage}, {"epoch", e.epoch},
            {"accuracy", e.accuracy}, {"samples", e.samples}, {"usable", e.usable},
            {"steps", e.steps}};
  j.update(losses::to_json(e.mean));
  return j;
}

Checkpoint initial_checkpoint(const synthgen::Dataset& ds, const TrainConfig& cfg) {
  Checkpoint c;
  model::Vocabulary vocab(ds.vocabulary);
  c.model_config = cfg.model;
  c.model_config.n_frames = ds.world.n_frames;
  c.model_config.channels = ds.world.channels;
  c.model_config.height = ds.world.height;
  c.model_config.width = ds.world.width;
  c.model_config.token_vocab_size = vocab.size();
  c.model_config.answer_set_size = ds.answers.size();
  c.model_config.seed = cfg.seed;
  c.params = model::Model(c.model_config).params();
  c.answers = ds.answers;
  c.vocabulary = vocab.words();
  return c;
}

TrainResult train_stage1(const synthgen::Dataset& ds, const TrainConfig& cfg,
                         std::ostream* metrics) {
  TrainConfig c = cfg;
  c.stage = 1;
  c.validate();
  return Loop(ds, c, initial_checkpoint(ds, c), 1, metrics).run();
}

TrainResult train_stage2(const synthgen::Dataset& ds, const TrainConfig& cfg,
                         const Checkpoint& stage1, std::ostream* metrics) {
  TrainConfig c = cfg;
  c.stage = 2;
  if (c.paths.checkpoint_in.empty()) c.paths.checkpoint_in = "<memory>";
  c.validate();
  check_answers(stage1, ds);
  Checkpoint start = stage1;
  if (c.reset_optimizer) start.adam = {};
  return Loop(ds, c, std::move(start), 2, metrics).run();
}

TrainResult train(const synthgen::Dataset& ds, const TrainConfig& cfg, std::ostream* metrics) {
  cfg.validate();
  if (cfg.stage == 1) return train_stage1(ds, cfg, metrics);
  return train_stage2(ds, cfg, load_checkpoint(cfg.paths.checkpoint_in), metrics);
}

}  // namespace egocf::trainkit

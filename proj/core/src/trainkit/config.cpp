#include "egocf/trainkit/config.hpp"

#include <algorithm>
#include <fstream>

#include "egocf/errors.hpp"

namespace egocf::trainkit {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, const json& reference, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!reference.contains(key)) {
      throw ConfigError("unknown config key '" + where + key + "'");
    }
    if (value.is_object() && reference.at(key).is_object()) {
      reject_unknown(value, reference.at(key), where + key + ".");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config key '") + key + "': " + e.what());
  }
}

}  // namespace

std::size_t TrainConfig::effective_epochs() const {
  if (epochs > 0) return epochs;
  return stage == 2 ? kStage2DefaultEpochs : kStage1DefaultEpochs;
}

void TrainConfig::validate() const {
  if (stage != 1 && stage != 2) throw ConfigError("stage must be 1 or 2");
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  if (!(lr >= 0.0)) throw ConfigError("lr must be >= 0");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (!(fill >= 0.0 && fill <= 1.0)) throw ConfigError("fill must lie in [0, 1]");
  weights.validate();
  if (stage == 2 && paths.checkpoint_in.empty()) {
    throw ConfigError("stage 2 requires a stage-1 checkpoint (checkpoint_in)");
  }
}

json to_json(const TrainConfig& c) {
  json model = model::to_json(c.model);
  model.erase("token_vocab_size");
  model.erase("answer_set_size");
  model.erase("seed");
  return {{"stage", c.stage},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"lr", c.lr},
          {"weight_decay", c.weight_decay},
          {"seed", c.seed},
          {"weights",
           {{"alpha", c.weights.alpha},
            {"beta", c.weights.beta},
            {"lambda", c.weights.lambda},
            {"tau", c.weights.tau}}},
          {"text_variant", std::string(textcf::to_string(c.text_variant))},
          {"video_variant", std::string(videocf::to_string(c.video_variant))},
          {"fill", c.fill},
          {"freeze_augmentation", c.freeze_augmentation},
          {"reset_optimizer", c.reset_optimizer},
          {"max_samples", c.max_samples},
          {"model", model},
          {"paths",
           {{"dataset", c.paths.dataset},
            {"lexicon", c.paths.lexicon},
            {"swap_table", c.paths.swap_table},
            {"bboxes", c.paths.bboxes},
            {"checkpoint_in", c.paths.checkpoint_in},
            {"checkpoint_out", c.paths.checkpoint_out},
            {"metrics_out", c.paths.metrics_out}}}};
}

TrainConfig train_config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j, to_json(TrainConfig{}), "");
  TrainConfig c;
  read(j, "stage", c.stage);
  read(j, "epochs", c.epochs);
  read(j, "batch_size", c.batch_size);
  read(j, "lr", c.lr);
  read(j, "weight_decay", c.weight_decay);
  read(j, "seed", c.seed);
  read(j, "fill", c.fill);
  read(j, "freeze_augmentation", c.freeze_augmentation);
  read(j, "reset_optimizer", c.reset_optimizer);
  read(j, "max_samples", c.max_samples);
  if (j.contains("weights")) {
    const auto& w = j.at("weights");
    read(w, "alpha", c.weights.alpha);
    read(w, "beta", c.weights.beta);
    read(w, "lambda", c.weights.lambda);
    read(w, "tau", c.weights.tau);
  }
  std::string name;
  if (j.contains("text_variant")) {
    read(j, "text_variant", name);
    c.text_variant = textcf::parse_text_variant(name);
  }
  if (j.contains("video_variant")) {
    read(j, "video_variant", name);
    c.video_variant = videocf::parse_video_variant(name);
  }
  if (j.contains("model")) {
    try {
      c.model = model::model_config_from_json(j.at("model"));
    } catch (const json::exception& e) {
      throw ConfigError(std::string("config key 'model': ") + e.what());
    }
  }
  if (j.contains("paths")) {
    const auto& p = j.at("paths");
    read(p, "dataset", c.paths.dataset);
    read(p, "lexicon", c.paths.lexicon);
    read(p, "swap_table", c.paths.swap_table);
    read(p, "bboxes", c.paths.bboxes);
    read(p, "checkpoint_in", c.paths.checkpoint_in);
    read(p, "checkpoint_out", c.paths.checkpoint_out);
    read(p, "metrics_out", c.paths.metrics_out);
  }
  return c;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return train_config_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<OverrideKey> override_keys() {
  std::vector<OverrideKey> keys;
  const json defaults = to_json(TrainConfig{});
  for (const auto& [key, value] : defaults.items()) {
    if (!value.is_object()) {
      keys.push_back({key, "/" + key});
      continue;
    }
    for (const auto& [leaf, unused] : value.items()) {
      const std::string flag = key == "model" ? "model." + leaf : leaf;
      keys.push_back({flag, "/" + key + "/" + leaf});
    }
  }
  return keys;
}

void apply_override(TrainConfig& cfg, const std::string& flag, const std::string& value) {
  const auto keys = override_keys();
  auto it = std::find_if(keys.begin(), keys.end(),
                         [&](const OverrideKey& k) { return k.flag == flag; });
  if (it == keys.end()) throw ConfigError("unknown config key '" + flag + "'");
  json j = to_json(cfg);
  const json::json_pointer ptr(it->pointer);
  if (j.at(ptr).is_string()) {
    j[ptr] = value;
  } else {
    json parsed = json::parse(value, nullptr, /*allow_exceptions=*/false);
    if (parsed.is_discarded() || parsed.is_structured() || parsed.is_string()) {
      throw ConfigError("--" + flag + ": cannot parse '" + value + "'");
    }
    j[ptr] = parsed;
  }
  TrainConfig updated = train_config_from_json(j);
  updated.model.token_vocab_size = cfg.model.token_vocab_size;
  updated.model.answer_set_size = cfg.model.answer_set_size;
  updated.model.seed = cfg.model.seed;
  cfg = updated;
}

}  // namespace egocf::trainkit

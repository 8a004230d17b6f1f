#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "egocf/synthgen/dataset.hpp"
#include "egocf/trainkit/config.hpp"
#include "egocf/trainkit/trainer.hpp"

namespace egocf::trainkit {

struct CategoryStats {
  std::size_t count = 0;
  std::size_t correct = 0;
  double accuracy() const {
    return count == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(count);
  }
};

// s(P_A, P_A+) - s(P_A, P_A-) over contrastive-usable samples.
struct MarginStats {
  std::size_t total = 0;
  std::size_t usable = 0;
  double fraction_positive = 0.0;
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  // Equal-width bins over [-2, 2].
  std::vector<std::size_t> histogram;
  std::vector<double> margins;
};

struct Metrics {
  std::size_t count = 0;
  double accuracy_all = 0.0;
  double accuracy_open = 0.0;
  double accuracy_binary = 0.0;
  std::map<std::string, CategoryStats> per_category;
  double rouge_l_f1 = 0.0;
  std::optional<MarginStats> similarity_margin;
};

nlohmann::json to_json(const MarginStats& m, bool with_margins = false);
nlohmann::json to_json(const Metrics& m);

// Argmax accuracy overall, by open/binary and by category, plus mean token
// ROUGE-L F1 between predicted and reference answer strings. Throws
// ConfigError when the checkpoint's answer set differs from the dataset's.
Metrics evaluate(const synthgen::Dataset& dataset, const Checkpoint& ckpt);

inline constexpr std::size_t kMarginBins = 20;

// Augments every record with cfg's variants (seeded per record from
// cfg.seed) and measures the similarity margin of the checkpoint's answer
// distributions.
MarginStats similarity_audit(const synthgen::Dataset& dataset, const Checkpoint& ckpt,
                             const TrainConfig& cfg);

}  // namespace egocf::trainkit

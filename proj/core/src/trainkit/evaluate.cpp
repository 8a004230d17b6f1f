#include "egocf/trainkit/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "egocf/errors.hpp"
#include "egocf/numkit/ops.hpp"
#include "egocf/trainkit/rouge.hpp"

namespace egocf::trainkit {
namespace {

using nlohmann::json;

constexpr std::uint64_t kAuditStream = 3;

// Order-independent mean: sums in sorted order.
double stable_mean(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double ratio(std::size_t a, std::size_t b) {
  return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
}

}  // namespace

json to_json(const MarginStats& m, bool with_margins) {
  json j = {{"total", m.total},   {"usable", m.usable}, {"fraction_positive", m.fraction_positive},
            {"mean", m.mean},     {"min", m.min},       {"max", m.max},
            {"histogram_range", {-2.0, 2.0}},           {"histogram", m.histogram}};
  if (with_margins) j["margins"] = m.margins;
  return j;
}

json to_json(const Metrics& m) {
  json cats = json::object();
  for (const auto& [name, s] : m.per_category) {
    cats[name] = {{"count", s.count}, {"correct", s.correct}, {"accuracy", s.accuracy()}};
  }
  json j = {{"count", m.count},
            {"accuracy_all", m.accuracy_all},
            {"accuracy_open", m.accuracy_open},
            {"accuracy_binary", m.accuracy_binary},
            {"per_category", cats},
            {"rouge_l_f1", m.rouge_l_f1}};
  if (m.similarity_margin) j["similarity_margin"] = to_json(*m.similarity_margin);
  return j;
}

Metrics evaluate(const synthgen::Dataset& ds, const Checkpoint& ckpt) {
  if (ckpt.answers != ds.answers) {
    throw ConfigError("checkpoint answer set does not match the dataset's");
  }
  const auto model = model_from_checkpoint(ckpt);
  const model::Vocabulary vocab(ckpt.vocabulary);
  const std::size_t len = model.config().text_len;

  Metrics m;
  std::size_t correct = 0, open = 0, open_correct = 0, binary = 0, binary_correct = 0;
  std::vector<double> f1s;
  f1s.reserve(ds.records.size());
  for (const auto& rec : ds.records) {
    const auto pred = model.forward(ds.video(rec.video_id), vocab.encode(rec.question, len));
    const std::size_t label = pred.argmax();
    const bool hit = label == rec.answer_label;
    auto& cat = m.per_category[std::string(synthgen::to_string(rec.category))];
    ++cat.count;
    if (hit) {
      ++cat.correct;
      ++correct;
    }
    if (synthgen::is_open(rec.category)) {
      ++open;
      open_correct += hit;
    } else {
      ++binary;
      binary_correct += hit;
    }
    f1s.push_back(rouge_l(textcf::tokenize(ckpt.answers[label]),
                          textcf::tokenize(ds.answers[rec.answer_label]))
                      .f1);
  }
  m.count = ds.records.size();
  m.accuracy_all = ratio(correct, m.count);
  m.accuracy_open = ratio(open_correct, open);
  m.accuracy_binary = ratio(binary_correct, binary);
  m.rouge_l_f1 = stable_mean(std::move(f1s));
  return m;
}

MarginStats similarity_audit(const synthgen::Dataset& ds, const Checkpoint& ckpt,
                             const TrainConfig& cfg) {
  if (ckpt.answers != ds.answers) {
    throw ConfigError("checkpoint answer set does not match the dataset's");
  }
  const auto model = model_from_checkpoint(ckpt);
  const model::Vocabulary vocab(ckpt.vocabulary);
  const std::size_t len = model.config().text_len;
  const Augmenter augmenter(cfg, ds);

  std::size_t n = ds.records.size();
  if (cfg.max_samples > 0) n = std::min(n, cfg.max_samples);
  MarginStats s;
  s.total = n;
  s.histogram.assign(kMarginBins, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& rec = ds.records[i];
    const auto& video = ds.video(rec.video_id);
    numkit::Rng rng(numkit::Rng::derive_seed(cfg.seed, {kAuditStream, i}));
    const auto cf = augmenter.make(rec, video, rng);
    if (!cf.text.contrastive_usable) continue;
    const auto p = model.forward(video, vocab.encode(rec.question, len));
    const auto pp = model.forward(cf.video.positive, vocab.encode(cf.text.positive.tokens, len));
    const auto pn = model.forward(cf.video.negative, vocab.encode(cf.text.negative.tokens, len));
    s.margins.push_back(numkit::cosine_similarity(p.probs, pp.probs) -
                        numkit::cosine_similarity(p.probs, pn.probs));
  }
  s.usable = s.margins.size();
  if (s.usable == 0) return s;
  std::size_t positive = 0;
  for (double v : s.margins) {
    positive += v > 0.0;
    const double unit = (std::clamp(v, -2.0, 2.0) + 2.0) / 4.0;
    const auto bin = std::min(kMarginBins - 1, static_cast<std::size_t>(unit * kMarginBins));
    ++s.histogram[bin];
  }
  s.fraction_positive = ratio(positive, s.usable);
  s.mean = stable_mean(s.margins);
  s.min = *std::min_element(s.margins.begin(), s.margins.end());
  s.max = *std::max_element(s.margins.begin(), s.margins.end());
  return s;
}

}  // namespace egocf::trainkit

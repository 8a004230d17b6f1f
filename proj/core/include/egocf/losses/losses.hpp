#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "egocf/model/model.hpp"

namespace egocf::losses {

using model::AnswerDistribution;

struct LossWeights {
  double alpha = 0.8;   // L_pos
  double beta = 1.0;    // L_neg
  double lambda = 0.01; // L_con
  double tau = 0.1;     // contrastive temperature

  // Throws ConfigError unless alpha, beta, lambda >= 0 and tau > 0.
  void validate() const;
};

struct LossBreakdown {
  double l_qa = 0.0;
  double l_pos = 0.0;
  double l_neg = 0.0;
  double l_con = 0.0;
  double total = 0.0;
};

// Mean cross-entropy over the batch. Throws InputError on an empty batch and
// DimensionError when lengths disagree.
double loss_qa(std::span<const AnswerDistribution> preds,
               std::span<const std::size_t> labels);
double loss_qa(std::span<const AnswerDistribution> preds,
               std::span<const std::vector<double>> one_hot);

// Cross-entropy of counterfactual predictions against the original ground
// truth; same arithmetic as loss_qa.
double loss_pos(std::span<const AnswerDistribution> preds_pos,
                std::span<const std::size_t> labels);
double loss_neg(std::span<const AnswerDistribution> preds_neg,
                std::span<const std::size_t> labels);

struct ContrastiveTerm {
  double value = 0.0;
  double sim_pos = 0.0;
  double sim_neg = 0.0;
  std::vector<double> d_anchor;
  std::vector<double> d_positive;
  std::vector<double> d_negative;
};

// -log( e^{s(p,p+)/tau} / (e^{s(p,p+)/tau} + e^{s(p,p-)/tau}) ) with s the
// cosine similarity, evaluated as max(a,b) - a + log1p(e^{-|a-b|}).
double loss_con(std::span<const double> anchor, std::span<const double> positive,
                std::span<const double> negative, double tau);
ContrastiveTerm loss_con_grad(std::span<const double> anchor,
                              std::span<const double> positive,
                              std::span<const double> negative, double tau);

// total = l_qa + alpha*l_pos + beta*l_neg + lambda*l_con
LossBreakdown total_loss(double l_qa, double l_pos, double l_neg, double l_con,
                         const LossWeights& w);

// One sample of the second-stage objective. `positive` and `negative` may be
// null when `usable` is false.
struct CounterfactualSample {
  const AnswerDistribution* original = nullptr;
  const AnswerDistribution* positive = nullptr;
  const AnswerDistribution* negative = nullptr;
  std::size_t label = 0;
  bool usable = false;
};

struct CompositeResult {
  LossBreakdown breakdown;
  // d total / d probs, one vector per sample; empty for the counterfactual
  // slots of unusable samples.
  std::vector<std::vector<double>> d_original;
  std::vector<std::vector<double>> d_positive;
  std::vector<std::vector<double>> d_negative;
  std::size_t usable_count = 0;
};

// Batch objective: l_qa averages over every sample; l_pos, l_neg and l_con
// average over usable samples only (0 when there are none).
CompositeResult composite_loss(std::span<const CounterfactualSample> batch,
                               const LossWeights& w);

nlohmann::json to_json(const LossBreakdown& b);

}  // namespace egocf::losses

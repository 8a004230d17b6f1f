#include "egocf/losses/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "egocf/errors.hpp"
#include "egocf/numkit/ops.hpp"

namespace egocf::losses {
namespace {

void check_batch(std::size_t preds, std::size_t labels) {
  if (preds == 0) throw InputError("loss over an empty batch");
  if (preds != labels) {
    throw DimensionError("batch has " + std::to_string(preds) + " predictions but " +
                         std::to_string(labels) + " ground-truth labels");
  }
}

}  // namespace

void LossWeights::validate() const {
  if (!(alpha >= 0.0) || !(beta >= 0.0) || !(lambda >= 0.0)) {
    throw ConfigError("loss weights alpha, beta, lambda must be nonnegative");
  }
  if (!(tau > 0.0)) throw ConfigError("temperature tau must be positive");
}

double loss_qa(std::span<const AnswerDistribution> preds,
               std::span<const std::size_t> labels) {
  check_batch(preds.size(), labels.size());
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    total += numkit::cross_entropy(preds[i].probs, labels[i]);
  }
  return total / static_cast<double>(preds.size());
}

double loss_qa(std::span<const AnswerDistribution> preds,
               std::span<const std::vector<double>> one_hot) {
  check_batch(preds.size(), one_hot.size());
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    total += numkit::cross_entropy(preds[i].probs, one_hot[i]);
  }
  return total / static_cast<double>(preds.size());
}

double loss_pos(std::span<const AnswerDistribution> preds_pos,
                std::span<const std::size_t> labels) {
  return loss_qa(preds_pos, labels);
}

double loss_neg(std::span<const AnswerDistribution> preds_neg,
                std::span<const std::size_t> labels) {
  return loss_qa(preds_neg, labels);
}

ContrastiveTerm loss_con_grad(std::span<const double> anchor,
                              std::span<const double> positive,
                              std::span<const double> negative, double tau) {
  if (!(tau > 0.0)) throw ConfigError("loss_con: tau must be positive");
  const auto sp = numkit::cosine_similarity_grad(anchor, positive);
  const auto sn = numkit::cosine_similarity_grad(anchor, negative);
  const double a = sp.value / tau;
  const double b = sn.value / tau;

  ContrastiveTerm out;
  out.sim_pos = sp.value;
  out.sim_neg = sn.value;
  out.value = std::max(a, b) - a + std::log1p(std::exp(-std::abs(a - b)));
  // Weight of the negative inside the two-way softmax.
  const double w_neg = 1.0 / (1.0 + std::exp(a - b));
  const double dl_da = -w_neg;
  const double dl_db = w_neg;
  const std::size_t k = anchor.size();
  out.d_anchor.resize(k);
  out.d_positive.resize(k);
  out.d_negative.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.d_anchor[i] = (dl_da * sp.d_p[i] + dl_db * sn.d_p[i]) / tau;
    out.d_positive[i] = dl_da * sp.d_q[i] / tau;
    out.d_negative[i] = dl_db * sn.d_q[i] / tau;
  }
  return out;
}

double loss_con(std::span<const double> anchor, std::span<const double> positive,
                std::span<const double> negative, double tau) {
  return loss_con_grad(anchor, positive, negative, tau).value;
}

LossBreakdown total_loss(double l_qa, double l_pos, double l_neg, double l_con,
                         const LossWeights& w) {
  LossBreakdown b{l_qa, l_pos, l_neg, l_con, 0.0};
  b.total = l_qa + w.alpha * l_pos + w.beta * l_neg + w.lambda * l_con;
  return b;
}

CompositeResult composite_loss(std::span<const CounterfactualSample> batch,
                               const LossWeights& w) {
  if (batch.empty()) throw InputError("composite_loss over an empty batch");
  w.validate();
  CompositeResult r;
  const std::size_t n = batch.size();
  for (const auto& s : batch) {
    if (s.usable) {
      if (!s.positive || !s.negative) {
        throw ConsistencyError("usable sample without counterfactual predictions");
      }
      ++r.usable_count;
    }
  }
  r.d_original.resize(n);
  r.d_positive.resize(n);
  r.d_negative.resize(n);

  const double inv_n = 1.0 / static_cast<double>(n);
  const double inv_u = r.usable_count ? 1.0 / static_cast<double>(r.usable_count) : 0.0;
  double sum_qa = 0.0, sum_pos = 0.0, sum_neg = 0.0, sum_con = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = batch[i];
    const auto& p = s.original->probs;
    sum_qa += numkit::cross_entropy(p, s.label);
    r.d_original[i] = numkit::cross_entropy_grad(p, s.label);
    for (double& g : r.d_original[i]) g *= inv_n;
    if (!s.usable) continue;

    const auto& pp = s.positive->probs;
    const auto& pn = s.negative->probs;
    sum_pos += numkit::cross_entropy(pp, s.label);
    sum_neg += numkit::cross_entropy(pn, s.label);
    const auto con = loss_con_grad(p, pp, pn, w.tau);
    sum_con += con.value;

    r.d_positive[i] = numkit::cross_entropy_grad(pp, s.label);
    r.d_negative[i] = numkit::cross_entropy_grad(pn, s.label);
    for (std::size_t k = 0; k < p.size(); ++k) {
      r.d_original[i][k] += w.lambda * inv_u * con.d_anchor[k];
      r.d_positive[i][k] =
          w.alpha * inv_u * r.d_positive[i][k] + w.lambda * inv_u * con.d_positive[k];
      r.d_negative[i][k] =
          w.beta * inv_u * r.d_negative[i][k] + w.lambda * inv_u * con.d_negative[k];
    }
  }
  r.breakdown = total_loss(sum_qa * inv_n, sum_pos * inv_u, sum_neg * inv_u,
                           sum_con * inv_u, w);
  return r;
}

nlohmann::json to_json(const LossBreakdown& b) {
  return {{"l_qa", b.l_qa}, {"l_pos", b.l_pos}, {"l_neg", b.l_neg},
          {"l_con", b.l_con}, {"total", b.total}};
}

}  // namespace egocf::losses

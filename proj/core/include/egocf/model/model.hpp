#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "egocf/model/config.hpp"
#include "egocf/numkit/param_store.hpp"
#include "egocf/numkit/tensor.hpp"
#include "egocf/videocf/frame_grid.hpp"

namespace egocf::model {

// Probability vector over the fixed answer set.
struct AnswerDistribution {
  std::vector<double> probs;

  std::size_t argmax() const;
};

class ForwardTrace;

// Toy dual-stream VideoQA network:
//   video: patch embed -> tanh -> mean over patches -> + frame position
//          -> n_video_layers pre-LN self-attention blocks        (N x d)
//   text:  token + position embeddings -> n_text_layers blocks  (l x d)
//   fuse:  text rows query video rows (multi-head cross-attention) with a
//          residual on the text rows, then mean over the l rows   (d)
//   head:  linear -> GELU -> linear -> softmax                    (K)
// Gradients are hand-derived and accumulate into params().grad(name).
class Model {
 public:
  // Fresh parameters: weights ~ U(-1/sqrt(d), 1/sqrt(d)), biases 0,
  // layer-norm gains 1, drawn from config.seed.
  explicit Model(ModelConfig config);
  // Adopts existing parameters; throws ConsistencyError when any expected
  // tensor is missing, extra, or mis-shaped.
  Model(ModelConfig config, numkit::ParamStore params);

  // Parameter count implied by a configuration, without allocating it.
  static std::size_t parameter_count(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  numkit::ParamStore& params() { return params_; }
  const numkit::ParamStore& params() const { return params_; }

  numkit::Tensor encode_video(const videocf::FrameGrid& video) const;
  numkit::Tensor encode_text(std::span<const TokenId> tokens) const;
  numkit::Tensor fuse(const numkit::Tensor& video_feats,
                      const numkit::Tensor& text_feats) const;
  AnswerDistribution classify(const numkit::Tensor& fused) const;
  AnswerDistribution forward(const videocf::FrameGrid& video,
                             std::span<const TokenId> tokens) const;
  std::vector<AnswerDistribution> forward_batch(
      std::span<const videocf::FrameGrid> videos,
      std::span<const std::vector<TokenId>> tokens) const;

  // Forward pass that keeps every intermediate needed by backward().
  ForwardTrace trace(const videocf::FrameGrid& video,
                     std::span<const TokenId> tokens) const;
  // Adds d(loss)/d(params) to the gradient slots, given d(loss)/d(probs)
  // for the traced sample.
  void backward(const ForwardTrace& trace, std::span<const double> d_probs);

 private:
  void check_video(const videocf::FrameGrid& video) const;
  void check_tokens(std::span<const TokenId> tokens) const;

  ModelConfig config_;
  numkit::ParamStore params_;
};

class ForwardTrace {
 public:
  ForwardTrace();
  ForwardTrace(ForwardTrace&&) noexcept;
  ForwardTrace& operator=(ForwardTrace&&) noexcept;
  ~ForwardTrace();

  const AnswerDistribution& output() const;

 private:
  friend class Model;
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace egocf::model

#include "egocf/model/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "egocf/errors.hpp"
#include "egocf/numkit/ops.hpp"
#include "egocf/numkit/rng.hpp"

namespace egocf::model {
namespace {

using numkit::ParamStore;
using numkit::Shape;
using numkit::Tensor;

enum class Init { kWeight, kZero, kOne };

struct ParamSpec {
  std::string name;
  Shape shape;
  Init init;
};

void attention_specs(const std::string& pre, std::size_t d, std::vector<ParamSpec>& out) {
  for (const char* m : {"q", "k", "v", "o"}) {
    out.push_back({pre + ".w" + m, {d, d}, Init::kWeight});
    out.push_back({pre + ".b" + m, {d}, Init::kZero});
  }
}

void block_specs(const std::string& pre, const ModelConfig& c, std::vector<ParamSpec>& out) {
  out.push_back({pre + ".ln1.g", {c.d}, Init::kOne});
  out.push_back({pre + ".ln1.b", {c.d}, Init::kZero});
  attention_specs(pre + ".attn", c.d, out);
  out.push_back({pre + ".ln2.g", {c.d}, Init::kOne});
  out.push_back({pre + ".ln2.b", {c.d}, Init::kZero});
  out.push_back({pre + ".mlp.w1", {c.d, c.ff_hidden}, Init::kWeight});
  out.push_back({pre + ".mlp.b1", {c.ff_hidden}, Init::kZero});
  out.push_back({pre + ".mlp.w2", {c.ff_hidden, c.d}, Init::kWeight});
  out.push_back({pre + ".mlp.b2", {c.d}, Init::kZero});
}

std::string block_name(const char* stream, std::size_t i) {
  return std::string(stream) + ".block" + std::to_string(i);
}

std::vector<ParamSpec> param_specs(const ModelConfig& c) {
  std::vector<ParamSpec> s;
  s.push_back({"video.patch.w", {c.patch_dim(), c.d}, Init::kWeight});
  s.push_back({"video.patch.b", {c.d}, Init::kZero});
  s.push_back({"video.patch.pos", {c.patches_per_frame(), c.d}, Init::kWeight});
  s.push_back({"video.frame_pos", {c.n_frames, c.d}, Init::kWeight});
  for (std::size_t i = 0; i < c.n_video_layers; ++i) block_specs(block_name("video", i), c, s);
  s.push_back({"text.tok_emb", {c.token_vocab_size, c.d}, Init::kWeight});
  s.push_back({"text.pos", {c.text_len, c.d}, Init::kWeight});
  for (std::size_t i = 0; i < c.n_text_layers; ++i) block_specs(block_name("text", i), c, s);
  attention_specs("fuse.attn", c.d, s);
  s.push_back({"cls.w1", {c.d, c.d}, Init::kWeight});
  s.push_back({"cls.b1", {c.d}, Init::kZero});
  s.push_back({"cls.w2", {c.d, c.answer_set_size}, Init::kWeight});
  s.push_back({"cls.b2", {c.answer_set_size}, Init::kZero});
  std::sort(s.begin(), s.end(),
            [](const ParamSpec& a, const ParamSpec& b) { return a.name < b.name; });
  return s;
}

// ---- shared layers ---------------------------------------------------------

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  Tensor y = numkit::matmul(x, w);
  numkit::add_row_vector_inplace(y, b);
  return y;
}

// Accumulates dW and db; returns dx unless want_dx is false.
Tensor linear_backward(ParamStore& p, const std::string& w, const std::string& b,
                       const Tensor& x, const Tensor& dy, bool want_dx = true) {
  numkit::accumulate_matmul_transpose_a(x, dy, p.grad(w));
  numkit::add_inplace(p.grad(b), numkit::column_sums(dy));
  if (!want_dx) return {};
  return numkit::matmul_transpose_b(dy, p.value(w));
}

struct MhaCache {
  Tensor q_in, kv_in, q, k, v, concat;
  std::vector<Tensor> weights;
};

Tensor mha_forward(const ParamStore& p, const std::string& pre, const Tensor& q_in,
                   const Tensor& kv_in, std::size_t heads, MhaCache* cache) {
  Tensor q = linear(q_in, p.value(pre + ".wq"), p.value(pre + ".bq"));
  Tensor k = linear(kv_in, p.value(pre + ".wk"), p.value(pre + ".bk"));
  Tensor v = linear(kv_in, p.value(pre + ".wv"), p.value(pre + ".bv"));
  const std::size_t d = q.cols();
  const std::size_t dh = d / heads;
  Tensor concat({q.rows(), d});
  std::vector<Tensor> weights;
  for (std::size_t h = 0; h < heads; ++h) {
    auto r = numkit::attention(numkit::slice_cols(q, h * dh, (h + 1) * dh),
                               numkit::slice_cols(k, h * dh, (h + 1) * dh),
                               numkit::slice_cols(v, h * dh, (h + 1) * dh));
    numkit::set_cols(concat, h * dh, r.output);
    if (cache) weights.push_back(std::move(r.weights));
  }
  Tensor out = linear(concat, p.value(pre + ".wo"), p.value(pre + ".bo"));
  if (cache) {
    *cache = {q_in, kv_in, std::move(q), std::move(k), std::move(v), std::move(concat),
              std::move(weights)};
  }
  return out;
}

struct MhaGrads {
  Tensor d_q_in;
  Tensor d_kv_in;
};

MhaGrads mha_backward(ParamStore& p, const std::string& pre, const MhaCache& c,
                      std::size_t heads, const Tensor& d_out) {
  const Tensor d_concat = linear_backward(p, pre + ".wo", pre + ".bo", c.concat, d_out);
  const std::size_t d = c.q.cols();
  const std::size_t dh = d / heads;
  Tensor dq(c.q.shape()), dk(c.k.shape()), dv(c.v.shape());
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t lo = h * dh, hi = (h + 1) * dh;
    auto g = numkit::attention_backward(
        numkit::slice_cols(c.q, lo, hi), numkit::slice_cols(c.k, lo, hi),
        numkit::slice_cols(c.v, lo, hi), c.weights[h], numkit::slice_cols(d_concat, lo, hi));
    numkit::set_cols(dq, lo, g.d_queries);
    numkit::set_cols(dk, lo, g.d_keys);
    numkit::set_cols(dv, lo, g.d_values);
  }
  MhaGrads out;
  out.d_q_in = linear_backward(p, pre + ".wq", pre + ".bq", c.q_in, dq);
  out.d_kv_in = linear_backward(p, pre + ".wk", pre + ".bk", c.kv_in, dk);
  numkit::add_inplace(out.d_kv_in, linear_backward(p, pre + ".wv", pre + ".bv", c.kv_in, dv));
  return out;
}

void accumulate(ParamStore& p, const std::string& name, const Tensor& g) {
  numkit::add_inplace(p.grad(name), g);
}

// ---- transformer block -----------------------------------------------------

struct BlockCache {
  numkit::LayerNormResult ln1;
  MhaCache attn;
  numkit::LayerNormResult ln2;
  Tensor pre_act;
  Tensor act;
};

Tensor block_forward(const ParamStore& p, const std::string& pre, const Tensor& x,
                     std::size_t heads, BlockCache* cache) {
  auto ln1 = numkit::layer_norm(x, p.value(pre + ".ln1.g"), p.value(pre + ".ln1.b"));
  MhaCache mc;
  Tensor h1 = numkit::add(
      x, mha_forward(p, pre + ".attn", ln1.output, ln1.output, heads, cache ? &mc : nullptr));
  auto ln2 = numkit::layer_norm(h1, p.value(pre + ".ln2.g"), p.value(pre + ".ln2.b"));
  Tensor z = linear(ln2.output, p.value(pre + ".mlp.w1"), p.value(pre + ".mlp.b1"));
  Tensor a = numkit::gelu(z);
  Tensor y = numkit::add(h1, linear(a, p.value(pre + ".mlp.w2"), p.value(pre + ".mlp.b2")));
  if (cache) *cache = {std::move(ln1), std::move(mc), std::move(ln2), std::move(z), std::move(a)};
  return y;
}

Tensor block_backward(ParamStore& p, const std::string& pre, const BlockCache& c,
                      std::size_t heads, const Tensor& dy) {
  // y = h1 + mlp(ln2(h1))
  Tensor dh1 = dy;
  const Tensor da = linear_backward(p, pre + ".mlp.w2", pre + ".mlp.b2", c.act, dy);
  const Tensor dz = numkit::gelu_backward(c.pre_act, da);
  const Tensor dln2 = linear_backward(p, pre + ".mlp.w1", pre + ".mlp.b1", c.ln2.output, dz);
  auto g2 = numkit::layer_norm_backward(c.ln2, p.value(pre + ".ln2.g"), dln2);
  accumulate(p, pre + ".ln2.g", g2.d_gain);
  accumulate(p, pre + ".ln2.b", g2.d_bias);
  numkit::add_inplace(dh1, g2.d_x);
  // h1 = x + attn(ln1(x))
  Tensor dx = dh1;
  auto mg = mha_backward(p, pre + ".attn", c.attn, heads, dh1);
  numkit::add_inplace(mg.d_q_in, mg.d_kv_in);
  auto g1 = numkit::layer_norm_backward(c.ln1, p.value(pre + ".ln1.g"), mg.d_q_in);
  accumulate(p, pre + ".ln1.g", g1.d_gain);
  accumulate(p, pre + ".ln1.b", g1.d_bias);
  numkit::add_inplace(dx, g1.d_x);
  return dx;
}

// ---- streams ---------------------------------------------------------------

Tensor extract_patches(const videocf::FrameGrid& v, std::size_t ps) {
  const std::size_t pr = v.height() / ps, pc = v.width() / ps;
  const std::size_t per_frame = pr * pc;
  Tensor x({v.frames() * per_frame, v.channels() * ps * ps});
  for (std::size_t n = 0; n < v.frames(); ++n) {
    for (std::size_t a = 0; a < pr; ++a) {
      for (std::size_t b = 0; b < pc; ++b) {
        auto row = x.row(n * per_frame + a * pc + b);
        std::size_t k = 0;
        for (std::size_t c = 0; c < v.channels(); ++c) {
          for (std::size_t r = 0; r < ps; ++r) {
            for (std::size_t col = 0; col < ps; ++col) {
              row[k++] = v.at(n, c, a * ps + r, b * ps + col);
            }
          }
        }
      }
    }
  }
  return x;
}

struct VideoCache {
  Tensor patches;
  Tensor act;
  std::vector<BlockCache> blocks;
};

Tensor video_forward(const ParamStore& p, const ModelConfig& cfg,
                     const videocf::FrameGrid& video, VideoCache* cache) {
  Tensor x = extract_patches(video, cfg.patch_size);
  Tensor e = linear(x, p.value("video.patch.w"), p.value("video.patch.b"));
  const std::size_t P = cfg.patches_per_frame();
  const Tensor& pos = p.value("video.patch.pos");
  for (std::size_t r = 0; r < e.rows(); ++r) {
    auto row = e.row(r);
    auto prow = pos.row(r % P);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] = std::tanh(row[j] + prow[j]);
  }
  Tensor f({cfg.n_frames, cfg.d});
  const Tensor& fpos = p.value("video.frame_pos");
  const double inv_p = 1.0 / static_cast<double>(P);
  for (std::size_t n = 0; n < cfg.n_frames; ++n) {
    auto out = f.row(n);
    for (std::size_t q = 0; q < P; ++q) {
      auto a = e.row(n * P + q);
      for (std::size_t j = 0; j < cfg.d; ++j) out[j] += a[j];
    }
    auto fp = fpos.row(n);
    for (std::size_t j = 0; j < cfg.d; ++j) out[j] = out[j] * inv_p + fp[j];
  }
  if (cache) cache->blocks.resize(cfg.n_video_layers);
  for (std::size_t i = 0; i < cfg.n_video_layers; ++i) {
    f = block_forward(p, block_name("video", i), f, cfg.heads,
                      cache ? &cache->blocks[i] : nullptr);
  }
  if (cache) {
    cache->patches = std::move(x);
    cache->act = std::move(e);
  }
  return f;
}

void video_backward(ParamStore& p, const ModelConfig& cfg, const VideoCache& c, Tensor df) {
  for (std::size_t i = cfg.n_video_layers; i-- > 0;) {
    df = block_backward(p, block_name("video", i), c.blocks[i], cfg.heads, df);
  }
  accumulate(p, "video.frame_pos", df);
  const std::size_t P = cfg.patches_per_frame();
  const double inv_p = 1.0 / static_cast<double>(P);
  Tensor de(c.act.shape());
  Tensor& dpos = p.grad("video.patch.pos");
  for (std::size_t r = 0; r < de.rows(); ++r) {
    auto a = c.act.row(r);
    auto up = df.row(r / P);
    auto out = de.row(r);
    auto dp = dpos.row(r % P);
    for (std::size_t j = 0; j < cfg.d; ++j) {
      out[j] = up[j] * inv_p * (1.0 - a[j] * a[j]);
      dp[j] += out[j];
    }
  }
  linear_backward(p, "video.patch.w", "video.patch.b", c.patches, de, /*want_dx=*/false);
}

struct TextCache {
  std::vector<TokenId> ids;
  std::vector<BlockCache> blocks;
};

Tensor text_forward(const ParamStore& p, const ModelConfig& cfg,
                    std::span<const TokenId> ids, TextCache* cache) {
  const Tensor& emb = p.value("text.tok_emb");
  const Tensor& pos = p.value("text.pos");
  Tensor t({cfg.text_len, cfg.d});
  for (std::size_t i = 0; i < cfg.text_len; ++i) {
    auto out = t.row(i);
    auto e = emb.row(ids[i]);
    auto q = pos.row(i);
    for (std::size_t j = 0; j < cfg.d; ++j) out[j] = e[j] + q[j];
  }
  if (cache) {
    cache->ids.assign(ids.begin(), ids.end());
    cache->blocks.resize(cfg.n_text_layers);
  }
  for (std::size_t i = 0; i < cfg.n_text_layers; ++i) {
    t = block_forward(p, block_name("text", i), t, cfg.heads,
                      cache ? &cache->blocks[i] : nullptr);
  }
  return t;
}

void text_backward(ParamStore& p, const ModelConfig& cfg, const TextCache& c, Tensor dt) {
  for (std::size_t i = cfg.n_text_layers; i-- > 0;) {
    dt = block_backward(p, block_name("text", i), c.blocks[i], cfg.heads, dt);
  }
  accumulate(p, "text.pos", dt);
  Tensor& demb = p.grad("text.tok_emb");
  for (std::size_t i = 0; i < cfg.text_len; ++i) {
    auto src = dt.row(i);
    auto dst = demb.row(c.ids[i]);
    for (std::size_t j = 0; j < cfg.d; ++j) dst[j] += src[j];
  }
}

struct FuseCache {
  MhaCache attn;
};

Tensor fuse_forward(const ParamStore& p, const ModelConfig& cfg, const Tensor& video,
                    const Tensor& text, FuseCache* cache) {
  Tensor rows = numkit::add(
      text, mha_forward(p, "fuse.attn", text, video, cfg.heads, cache ? &cache->attn : nullptr));
  return numkit::mean_rows(rows);
}

struct ClassifierCache {
  Tensor fused;  // 1 x d
  Tensor pre_act;
  Tensor act;
};

AnswerDistribution classify_forward(const ParamStore& p, const Tensor& fused,
                                    ClassifierCache* cache) {
  Tensor x = fused.reshaped({1, fused.size()});
  Tensor z = linear(x, p.value("cls.w1"), p.value("cls.b1"));
  Tensor a = numkit::gelu(z);
  Tensor logits = linear(a, p.value("cls.w2"), p.value("cls.b2"));
  AnswerDistribution out{numkit::softmax(logits.values())};
  if (cache) *cache = {std::move(x), std::move(z), std::move(a)};
  return out;
}

}  // namespace

// ---- public API ------------------------------------------------------------

std::size_t AnswerDistribution::argmax() const {
  return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) -
                                  probs.begin());
}

struct ForwardTrace::Impl {
  VideoCache video;
  TextCache text;
  FuseCache fuse;
  ClassifierCache head;
  AnswerDistribution output;
};

ForwardTrace::ForwardTrace() : impl_(std::make_unique<Impl>()) {}
ForwardTrace::ForwardTrace(ForwardTrace&&) noexcept = default;
ForwardTrace& ForwardTrace::operator=(ForwardTrace&&) noexcept = default;
ForwardTrace::~ForwardTrace() = default;

const AnswerDistribution& ForwardTrace::output() const { return impl_->output; }

Model::Model(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  numkit::Rng rng(config_.seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(config_.d));
  for (const auto& spec : param_specs(config_)) {
    Tensor t(spec.shape);
    if (spec.init == Init::kOne) t.fill(1.0);
    if (spec.init == Init::kWeight) {
      for (double& v : t.values()) v = rng.uniform(-bound, bound);
    }
    params_.add(spec.name, std::move(t));
  }
}

Model::Model(ModelConfig config, numkit::ParamStore params)
    : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
  const auto specs = param_specs(config_);
  if (specs.size() != params_.tensor_count()) {
    throw ConsistencyError("parameter store has " + std::to_string(params_.tensor_count()) +
                           " tensors, configuration expects " + std::to_string(specs.size()));
  }
  for (const auto& spec : specs) {
    if (!params_.contains(spec.name)) {
      throw ConsistencyError("missing parameter tensor " + spec.name);
    }
    if (params_.value(spec.name).shape() != spec.shape) {
      throw ConsistencyError("parameter " + spec.name + " has shape " +
                             params_.value(spec.name).shape_string() + ", expected " +
                             numkit::shape_to_string(spec.shape));
    }
  }
}

std::size_t Model::parameter_count(const ModelConfig& config) {
  std::size_t total = 0;
  for (const auto& spec : param_specs(config)) total += numkit::shape_numel(spec.shape);
  return total;
}

void Model::check_video(const videocf::FrameGrid& v) const {
  if (v.frames() != config_.n_frames || v.channels() != config_.channels ||
      v.height() != config_.height || v.width() != config_.width) {
    throw DimensionError("video " + v.tensor().shape_string() + " does not match model input [" +
                         std::to_string(config_.n_frames) + "x" +
                         std::to_string(config_.channels) + "x" +
                         std::to_string(config_.height) + "x" +
                         std::to_string(config_.width) + "]");
  }
}

void Model::check_tokens(std::span<const TokenId> tokens) const {
  if (tokens.size() != config_.text_len) {
    throw DimensionError("expected " + std::to_string(config_.text_len) +
                         " token ids, got " + std::to_string(tokens.size()));
  }
  for (TokenId id : tokens) {
    if (id >= config_.token_vocab_size) {
      throw InputError("token id " + std::to_string(id) + " >= vocabulary size " +
                       std::to_string(config_.token_vocab_size));
    }
  }
}

Tensor Model::encode_video(const videocf::FrameGrid& video) const {
  check_video(video);
  return video_forward(params_, config_, video, nullptr);
}

Tensor Model::encode_text(std::span<const TokenId> tokens) const {
  check_tokens(tokens);
  return text_forward(params_, config_, tokens, nullptr);
}

Tensor Model::fuse(const Tensor& video_feats, const Tensor& text_feats) const {
  if (video_feats.rank() != 2 || text_feats.rank() != 2 || video_feats.cols() != config_.d ||
      text_feats.cols() != config_.d) {
    throw DimensionError("fuse: video " + video_feats.shape_string() + " and text " +
                         text_feats.shape_string() + " must both have width " +
                         std::to_string(config_.d));
  }
  return fuse_forward(params_, config_, video_feats, text_feats, nullptr);
}

AnswerDistribution Model::classify(const Tensor& fused) const {
  if (fused.size() != config_.d) {
    throw DimensionError("classify: expected a " + std::to_string(config_.d) +
                         "-vector, got " + fused.shape_string());
  }
  return classify_forward(params_, fused, nullptr);
}

AnswerDistribution Model::forward(const videocf::FrameGrid& video,
                                  std::span<const TokenId> tokens) const {
  return classify(fuse(encode_video(video), encode_text(tokens)));
}

std::vector<AnswerDistribution> Model::forward_batch(
    std::span<const videocf::FrameGrid> videos,
    std::span<const std::vector<TokenId>> tokens) const {
  if (videos.size() != tokens.size()) {
    throw DimensionError("forward_batch: " + std::to_string(videos.size()) + " videos but " +
                         std::to_string(tokens.size()) + " token sequences");
  }
  std::vector<AnswerDistribution> out;
  out.reserve(videos.size());
  for (std::size_t i = 0; i < videos.size(); ++i) out.push_back(forward(videos[i], tokens[i]));
  return out;
}

ForwardTrace Model::trace(const videocf::FrameGrid& video,
                          std::span<const TokenId> tokens) const {
  check_video(video);
  check_tokens(tokens);
  ForwardTrace t;
  auto& c = *t.impl_;
  const Tensor v = video_forward(params_, config_, video, &c.video);
  const Tensor q = text_forward(params_, config_, tokens, &c.text);
  const Tensor fused = fuse_forward(params_, config_, v, q, &c.fuse);
  c.output = classify_forward(params_, fused, &c.head);
  return t;
}

void Model::backward(const ForwardTrace& trace, std::span<const double> d_probs) {
  const auto& c = *trace.impl_;
  if (d_probs.size() != c.output.probs.size()) {
    throw DimensionError("backward: gradient of length " + std::to_string(d_probs.size()) +
                         " for " + std::to_string(c.output.probs.size()) + " answers");
  }
  auto& p = params_;
  const auto dl = numkit::softmax_backward(c.output.probs, d_probs);
  const Tensor d_logits({1, dl.size()}, dl);
  const Tensor d_act = linear_backward(p, "cls.w2", "cls.b2", c.head.act, d_logits);
  const Tensor d_pre = numkit::gelu_backward(c.head.pre_act, d_act);
  const Tensor d_fused = linear_backward(p, "cls.w1", "cls.b1", c.head.fused, d_pre);

  // fused = mean over text rows of (text + cross_attn(text, video))
  const std::size_t l = config_.text_len;
  Tensor d_rows({l, config_.d});
  for (std::size_t i = 0; i < l; ++i) {
    auto row = d_rows.row(i);
    for (std::size_t j = 0; j < config_.d; ++j) row[j] = d_fused[j] / static_cast<double>(l);
  }
  auto mg = mha_backward(p, "fuse.attn", c.fuse.attn, config_.heads, d_rows);
  numkit::add_inplace(d_rows, mg.d_q_in);

  text_backward(p, config_, c.text, std::move(d_rows));
  video_backward(p, config_, c.video, std::move(mg.d_kv_in));
}

}  // namespace egocf::model

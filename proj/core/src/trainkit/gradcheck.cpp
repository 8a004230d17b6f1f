#include "egocf/trainkit/gradcheck.hpp"

#include <vector>

#include "egocf/errors.hpp"
#include "egocf/model/model.hpp"
#include "egocf/synthgen/dataset.hpp"
#include "egocf/trainkit/trainer.hpp"

namespace egocf::trainkit {
namespace {

struct Inputs {
  videocf::FrameGrid video;
  std::vector<model::TokenId> tokens;
};

struct Item {
  Inputs original, positive, negative;
  std::size_t label = 0;
  bool usable = false;
};

synthgen::WorldSpec small_world() {
  synthgen::WorldSpec w;
  w.verbs = {"open", "take", "pour"};
  w.objects = {"cup", "milk", "bowl"};
  w.height = w.width = 16;
  w.n_frames = 4;
  w.glyph_size = 6;
  w.distractor_size = 2;
  return w;
}

losses::CompositeResult objective(const model::Model& m, const std::vector<Item>& items,
                                const losses::LossWeights& w,
                                std::vector<model::ForwardTrace>* traces) {
  std::vector<model::AnswerDistribution> out(3 * items.size());
  std::vector<losses::CounterfactualSample> batch(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    const Inputs* in[3] = {&items[i].original, &items[i].positive, &items[i].negative};
    for (std::size_t k = 0; k < (items[i].usable ? 3u : 1u); ++k) {
      if (traces) {
        (*traces)[3 * i + k] = m.trace(in[k]->video, in[k]->tokens);
        out[3 * i + k] = (*traces)[3 * i + k].output();
      } else {
        out[3 * i + k] = m.forward(in[k]->video, in[k]->tokens);
      }
    }
    batch[i] = {&out[3 * i], &out[3 * i + 1], &out[3 * i + 2], items[i].label, items[i].usable};
    if (!items[i].usable) batch[i].positive = batch[i].negative = nullptr;
  }
  return losses::composite_loss(batch, w);
}

}  // namespace

ObjectiveCheckResult check_objective_gradients(const ObjectiveCheckOptions& o) {
  if (o.samples == 0) throw ConfigError("gradient check needs at least one sample");
  synthgen::GenerationOptions gen;
  gen.num_records = o.samples;
  gen.questions_per_episode = 1;
  gen.min_events = 2;
  gen.max_events = 4;
  gen.seed = o.seed;
  const auto lexicon = textcf::SynonymLexicon::defaults();
  const auto ds = synthgen::generate_dataset(small_world(), gen, lexicon.vocabulary());

  TrainConfig cfg;
  cfg.seed = o.seed;
  cfg.weights = o.weights;
  cfg.model.d = 8;
  cfg.model.heads = 2;
  cfg.model.n_video_layers = 1;
  cfg.model.n_text_layers = 1;
  cfg.model.patch_size = 4;
  cfg.model.text_len = 12;
  cfg.model.ff_hidden = 16;
  const Checkpoint ckpt = initial_checkpoint(ds, cfg);
  model::Model m = model_from_checkpoint(ckpt);
  const model::Vocabulary vocab(ckpt.vocabulary);
  const Augmenter augmenter(cfg, ds);

  std::vector<Item> items;
  ObjectiveCheckResult result;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const auto& rec = ds.records[i];
    const auto& video = ds.video(rec.video_id);
    numkit::Rng rng(numkit::Rng::derive_seed(o.seed, {i}));
    const auto cf = augmenter.make(rec, video, rng);
    const std::size_t len = cfg.model.text_len;
    items.push_back({{video, vocab.encode(rec.question, len)},
                     {cf.video.positive, vocab.encode(cf.text.positive.tokens, len)},
                     {cf.video.negative, vocab.encode(cf.text.negative.tokens, len)},
                     rec.answer_label,
                     cf.text.contrastive_usable});
    result.usable += cf.text.contrastive_usable;
  }

  // Analytic gradients.
  std::vector<model::ForwardTrace> traces(3 * items.size());
  const auto grads = objective(m, items, o.weights, &traces);
  m.params().zero_grads();
  for (std::size_t i = 0; i < items.size(); ++i) {
    m.backward(traces[3 * i], grads.d_original[i]);
    if (items[i].usable) {
      m.backward(traces[3 * i + 1], grads.d_positive[i]);
      m.backward(traces[3 * i + 2], grads.d_negative[i]);
    }
  }

  const auto config = m.config();
  auto loss = [&](const numkit::ParamStore& p) {
    return objective(model::Model(config, p), items, o.weights, nullptr).breakdown.total;
  };
  numkit::GradCheckOptions gc;
  gc.eps = o.eps;
  gc.max_coords_per_tensor = o.coords_per_tensor;
  gc.full_sweep = o.full_sweep;
  gc.stencil = numkit::Stencil::kCentral4;
  gc.seed = o.seed;
  result.report = numkit::grad_check(loss, m.params(), gc);
  result.samples = items.size();
  result.tensors = m.params().tensor_count();
  return result;
}

}  // namespace egocf::trainkit

#include <vector>

#include <benchmark/benchmark.h>

#include "egocf/model/model.hpp"
#include "egocf/numkit/ops.hpp"
#include "egocf/numkit/rng.hpp"

namespace {

using namespace egocf;

model::ModelConfig default_config() {
  model::ModelConfig c;
  c.token_vocab_size = 64;
  c.answer_set_size = 27;
  return c;
}

struct Input {
  videocf::FrameGrid video;
  std::vector<model::TokenId> tokens;
};

Input random_input(const model::ModelConfig& c) {
  numkit::Rng rng(1);
  Input in{videocf::FrameGrid(c.n_frames, c.channels, c.height, c.width), {}};
  for (double& v : in.video.tensor().values()) v = rng.uniform();
  for (std::size_t i = 0; i < c.text_len; ++i) in.tokens.push_back(rng.index(c.token_vocab_size));
  return in;
}

void BM_ModelForward(benchmark::State& state) {
  const model::Model m(default_config());
  const auto in = random_input(m.config());
  for (auto _ : state) benchmark::DoNotOptimize(m.forward(in.video, in.tokens));
}
BENCHMARK(BM_ModelForward)->Unit(benchmark::kMillisecond);

void BM_ModelForwardBackward(benchmark::State& state) {
  model::Model m(default_config());
  const auto in = random_input(m.config());
  m.params().zero_grads();
  for (auto _ : state) {
    const auto tr = m.trace(in.video, in.tokens);
    const auto d = numkit::cross_entropy_grad(tr.output().probs, 3);
    m.backward(tr, d);
  }
}
BENCHMARK(BM_ModelForwardBackward)->Unit(benchmark::kMillisecond);

}  // namespace

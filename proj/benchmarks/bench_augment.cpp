#include <benchmark/benchmark.h>

#include "egocf/numkit/rng.hpp"
#include "egocf/synthgen/dataset.hpp"
#include "egocf/textcf/events.hpp"
#include "egocf/textcf/lexicon.hpp"
#include "egocf/textcf/transforms.hpp"
#include "egocf/videocf/region.hpp"

namespace {

using namespace egocf;

void BM_QuestionTriple(benchmark::State& state) {
  const synthgen::WorldSpec world;
  const textcf::TextResources res{textcf::make_event_vocabulary(world.verbs, world.objects),
                                  textcf::SynonymLexicon::defaults(),
                                  textcf::SwapTable::defaults()};
  const auto q = textcf::make_question("what did the person do after open the microwave");
  numkit::Rng rng(0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        textcf::make_question_triple(q, textcf::TextVariant::kFq3, res, rng));
  }
}
BENCHMARK(BM_QuestionTriple);

void BM_VideoPair(benchmark::State& state) {
  videocf::FrameGrid v(8, 1, 64, 64, 0.5);
  const auto region = videocf::select_region(videocf::VideoVariant::kFv1, 64, 64, 8);
  for (auto _ : state) benchmark::DoNotOptimize(videocf::make_video_pair(v, region));
}
BENCHMARK(BM_VideoPair);

void BM_GenerateDataset(benchmark::State& state) {
  synthgen::GenerationOptions o;
  o.num_records = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(synthgen::generate_dataset(synthgen::WorldSpec{}, o));
}
BENCHMARK(BM_GenerateDataset)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

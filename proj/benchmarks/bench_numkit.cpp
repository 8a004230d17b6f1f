#include <benchmark/benchmark.h>

#include "egocf/numkit/ops.hpp"
#include "egocf/numkit/rng.hpp"

namespace {

using egocf::numkit::Tensor;

Tensor random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  egocf::numkit::Rng rng(seed);
  Tensor t({r, c});
  for (double& v : t.values()) v = rng.uniform(-1, 1);
  return t;
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(n, n, 1), b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(egocf::numkit::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(16)->Arg(64)->Arg(128);

void BM_Attention(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const auto q = random_matrix(rows, 16, 3), k = random_matrix(rows, 16, 4),
             v = random_matrix(rows, 16, 5);
  for (auto _ : state) benchmark::DoNotOptimize(egocf::numkit::attention(q, k, v));
}
BENCHMARK(BM_Attention)->Arg(8)->Arg(16)->Arg(64);

void BM_Softmax(benchmark::State& state) {
  const auto x = random_matrix(64, static_cast<std::size_t>(state.range(0)), 6);
  for (auto _ : state) benchmark::DoNotOptimize(egocf::numkit::softmax(x, 1));
}
BENCHMARK(BM_Softmax)->Arg(27)->Arg(256);

}  // namespace

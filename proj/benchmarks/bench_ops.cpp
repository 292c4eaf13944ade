#include <benchmark/benchmark.h>

#include <random>

#include "hih/guidance.hpp"
#include "hih/model.hpp"
#include "hih/ops.hpp"
#include "hih/warp.hpp"

using namespace hih;

namespace {

Tensor random_tensor(Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(shape_numel(shape));
  for (auto& x : v) x = d(rng);
  return Tensor::from_data(std::move(shape), std::move(v));
}

void BM_Conv3d(benchmark::State& state) {
  NoGradGuard guard;
  const auto c = static_cast<std::size_t>(state.range(0));
  ConvSpec spec = ConvSpec::make(c, c, {3, 3, 3}, {1, 1, 1});
  std::mt19937_64 rng(1);
  spec.init_kaiming(rng);
  const Tensor x = random_tensor({c, 30, 32, 22}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(conv3d(x, spec));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c * c * 27 * 30 * 32 * 22));
}
BENCHMARK(BM_Conv3d)->Arg(8)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_Conv3dBackward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  ConvSpec spec = ConvSpec::make(c, c, {3, 3, 3}, {1, 1, 1});
  std::mt19937_64 rng(1);
  spec.init_kaiming(rng);
  Tensor x = random_tensor({c, 10, 32, 22}, 2);
  x.set_requires_grad(true);
  for (auto _ : state) {
    Tensor y = sum(conv3d(x, spec));
    y.backward();
  }
}
BENCHMARK(BM_Conv3dBackward)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_BilinearWarp(benchmark::State& state) {
  NoGradGuard guard;
  const Tensor x = random_tensor({32, 30, 32, 22}, 3);
  const Tensor off = random_tensor({2, 30, 32, 22}, 4, -2.0, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(bilinear_warp(x, off));
}
BENCHMARK(BM_BilinearWarp)->Unit(benchmark::kMillisecond);

void BM_TrilinearWarp(benchmark::State& state) {
  NoGradGuard guard;
  const Tensor x = random_tensor({32, 30, 32, 22}, 5);
  const Tensor off = random_tensor({3, 30, 32, 22}, 6, -2.0, 2.0);
  for (auto _ : state) benchmark::DoNotOptimize(trilinear_warp(x, off));
}
BENCHMARK(BM_TrilinearWarp)->Unit(benchmark::kMillisecond);

void BM_ModelForward(benchmark::State& state) {
  NoGradGuard guard;
  ModelConfig cfg;
  cfg.channels = {4, 4, 8, 8};
  cfg.embedding_dim = 16;
  cfg.num_classes = 8;
  HihModel m(cfg);
  m.init(7);
  const std::vector<Tensor> sils{random_tensor({1, 30, 64, 44}, 8, 0.0, 1.0)};
  const std::vector<Tensor> poses{random_tensor({1, 30, 64, 44}, 9, 0.0, 1.0)};
  for (auto _ : state) benchmark::DoNotOptimize(m.forward(sils, poses, false));
}
BENCHMARK(BM_ModelForward)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

#include <benchmark/benchmark.h>

#include "cnet/layers.hpp"
#include "cnet/loss.hpp"
#include "cnet/model.hpp"
#include "cnet/ops.hpp"
#include "cnet/rng.hpp"

using namespace cnet;

namespace {

Tensor<float> random(Shape shape, std::uint64_t seed) {
  RngStream rng(seed);
  std::vector<float> v(shape.numel());
  for (auto& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
  return Tensor<float>(std::move(shape), std::move(v));
}

void BM_Conv3x3Forward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto x = random({1, 56, 56, c}, 1);
  const Conv2D<float> layer{random({3, 3, c, c}, 2), random({c}, 3)};
  for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, layer));
  state.SetItemsProcessed(state.iterations() * 56 * 56 * 9 * static_cast<std::int64_t>(c * c));
}
BENCHMARK(BM_Conv3x3Forward)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Conv3x3Backward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  auto x = random({1, 56, 56, c}, 1);
  x.set_requires_grad(true);
  Conv2D<float> layer{random({3, 3, c, c}, 2), random({c}, 3)};
  layer.kernel.set_requires_grad(true);
  layer.bias.set_requires_grad(true);
  const auto w = random({1, 56, 56, c}, 4);
  for (auto _ : state) {
    Tape<float> tape;
    backward(weighted_sum(conv2d(x, layer, &tape), w, &tape), tape);
  }
}
BENCHMARK(BM_Conv3x3Backward)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_MaxPool(benchmark::State& state) {
  const auto x = random({4, 112, 112, 64}, 5);
  for (auto _ : state) benchmark::DoNotOptimize(maxpool2x2(x));
}
BENCHMARK(BM_MaxPool)->Unit(benchmark::kMillisecond);

void BM_CNetTrainStep(benchmark::State& state) {
  CNetConfig config;
  config.input_height = config.input_width = 64;
  config.width_scale = WidthScale{1, 8};
  auto model = build_cnet(config, 1);
  const auto batch = static_cast<std::size_t>(state.range(0));
  auto x = random({batch, 64, 64, 3}, 6);
  for (auto& v : x.mutable_data()) v = 0.5f * (v + 1.0f);
  std::vector<float> labels(2 * batch, 0.0f);
  for (std::size_t i = 0; i < batch; ++i) labels[2 * i + i % 2] = 1.0f;
  const Tensor<float> y({batch, 2}, labels);
  RngStream rng(7);
  for (auto _ : state) {
    Tape<float> tape;
    backward(bce_loss(model.forward(x, Mode::kTrain, rng, &tape), y, &tape), tape);
    for (auto& p : model.parameters()) p.value.clear_grad();
  }
}
BENCHMARK(BM_CNetTrainStep)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_CNetPredict224(benchmark::State& state) {
  CNetConfig config;
  config.width_scale = WidthScale{1, 8};
  const auto model = build_cnet(config, 1);
  auto x = random({1, 224, 224, 3}, 8);
  for (auto& v : x.mutable_data()) v = 0.5f * (v + 1.0f);
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(x));
}
BENCHMARK(BM_CNetPredict224)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();

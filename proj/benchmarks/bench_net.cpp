#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "lbvs/net.hpp"

namespace {

std::vector<lbvs::FlowSample> batch(int n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> px(0.0, 640.0), py(0.0, 480.0), f(-3.0, 3.0);
  std::vector<lbvs::FlowSample> out;
  for (int i = 0; i < n; ++i) {
    out.push_back({{px(rng), py(rng)}, {f(rng), f(rng)}, {0.01, 0.02}, i, i});
  }
  return out;
}

void BM_NetForward(benchmark::State& state) {
  const auto net = lbvs::InteractionNet::random(1);
  const lbvs::Vec2 u(300.0, 200.0);
  for (auto _ : state) benchmark::DoNotOptimize(lbvs::net_forward(net, u));
}
BENCHMARK(BM_NetForward);

void BM_NetBackward(benchmark::State& state) {
  const auto net = lbvs::InteractionNet::random(1);
  const auto b = batch(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(lbvs::net_backward(net, b, 0.1));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NetBackward)->Arg(64)->Arg(512);

}  // namespace

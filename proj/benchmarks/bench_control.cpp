#include <benchmark/benchmark.h>

#include "lbvs/controller.hpp"
#include "lbvs/sim.hpp"

namespace {

struct Fixture {
  lbvs::CameraModel cam = lbvs::CameraModel::desk_default();
  lbvs::DotPattern pattern = lbvs::DotPattern::random(80, 11, 0.04, 0.34, -0.1, 0.1);
  lbvs::TargetPattern target;
  lbvs::InteractionFn oracle;

  Fixture() {
    cam.pixel_noise_sigma = 0.0;
    for (const auto& m : lbvs::observe(lbvs::Pose2(), cam, pattern, 1, 0, 0.0).items) {
      target.desired.push_back(m);
    }
    oracle = [c = cam](const lbvs::Vec2& u) { return lbvs::analytic_interaction(c, u); };
  }
};

void BM_Observe(benchmark::State& state) {
  Fixture f;
  f.cam.pixel_noise_sigma = 0.5;
  std::int64_t frame = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lbvs::observe(lbvs::Pose2(0.01, 0.0, 0.05), f.cam, f.pattern, 3, frame++, 0.0));
  }
}
BENCHMARK(BM_Observe);

void BM_ControlStep(benchmark::State& state) {
  Fixture f;
  const auto m = lbvs::observe(lbvs::Pose2(0.01, 0.002, 0.05), f.cam, f.pattern, 3, 0, 0.0);
  const lbvs::ControllerConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lbvs::control_step(f.oracle, m, f.target, cfg, {}));
  }
}
BENCHMARK(BM_ControlStep);

}  // namespace
BENCHMARK_MAIN();

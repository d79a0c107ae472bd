#include <cmath>

#include <gtest/gtest.h>

#include "gradcheck.hpp"
#include "lbvs/calibration.hpp"
#include "lbvs/error.hpp"
#include "support.hpp"

using namespace lbvs;

namespace {

CalibrationWorld small_world() {
  CalibrationWorld w;
  w.camera = CameraModel::desk_default();
  w.pattern = DotPattern::random(120, 3, -0.05, 0.42, -0.3, 0.3);
  w.seed = 5;
  return w;
}

CalibrationDataset affine_dataset(int n, double dt) {
  CalibrationDataset d;
  d.frame_dt = dt;
  d.samples = test::synthetic_batch(n, 21, dt);
  return d;
}

}  // namespace

TEST(Schedule, StraightPhaseThenSpinPhase) {
  const auto s = CalibrationSchedule::straight_then_spin(101, 0.1, 0.025, 0.05, 7);
  ASSERT_EQ(s.commands.size(), 101u);
  int runs = 0;
  for (std::size_t i = 0; i < s.commands.size(); ++i) {
    const ControlCommand& c = s.commands[i];
    if (i < 50) {
      EXPECT_EQ(c.omega, 0.0);
      EXPECT_GE(std::abs(c.v), 0.2 * 0.025 - 1e-15);
      EXPECT_LE(std::abs(c.v), 0.025);
    } else {
      EXPECT_EQ(c.v, 0.0);
      EXPECT_GE(std::abs(c.omega), 0.2 * 0.05 - 1e-15);
      EXPECT_LE(std::abs(c.omega), 0.05);
    }
    if (i > 0 && (c.v != s.commands[i - 1].v || c.omega != s.commands[i - 1].omega)) ++runs;
  }
  // Segments hold 5 to 15 frames.
  EXPECT_GE(runs, 100 / 15);
  EXPECT_LE(runs, 100 / 5 + 2);
  EXPECT_THROW(CalibrationSchedule::straight_then_spin(1, 0.1, 0.025, 0.05, 1), Error);
}

TEST(Dataset, FlowIsTheProjectionDifference) {
  const CalibrationWorld world = small_world();
  const auto schedule = CalibrationSchedule::straight_then_spin(40, 0.1, 0.025, 0.05, 3);
  const CalibrationDataset data = collect_dataset(world, schedule);
  ASSERT_FALSE(data.empty());
  EXPECT_EQ(data.frame_count, 40);

  // Replay the drive independently.
  std::vector<Pose2> poses{world.start};
  for (const auto& c : schedule.commands) poses.push_back(step_unicycle(poses.back(), c, 0.1));
  for (const FlowSample& s : data.samples) {
    const Vec2 dot = world.pattern.dots[static_cast<std::size_t>(s.id)].position;
    const auto f = static_cast<std::size_t>(s.frame);
    const Vec2 before = project(world.camera, world_to_robot(poses[f], dot));
    const Vec2 after = project(world.camera, world_to_robot(poses[f + 1], dot));
    EXPECT_LT((s.pixel - before).norm(), 1e-9);
    EXPECT_LT((s.flow - (after - before)).norm(), 1e-9);
    EXPECT_EQ(s.cmd.v, schedule.commands[f].v);
  }
}

TEST(Dataset, FlowAgreesWithInteractionToFirstOrder) {
  const CalibrationWorld world = small_world();
  const auto schedule = CalibrationSchedule::straight_then_spin(60, 0.1, 0.025, 0.05, 4);
  const CalibrationDataset data = collect_dataset(world, schedule);
  for (const FlowSample& s : data.samples) {
    const Vec2 predicted = analytic_interaction(world.camera, s.pixel) * Vec2(s.cmd.v, s.cmd.omega) * 0.1;
    EXPECT_LT((predicted - s.flow).norm(), 0.02 * s.flow.norm() + 1e-3);
  }
}

TEST(Dataset, EmptyWhenNothingIsVisible) {
  CalibrationWorld world = small_world();
  world.pattern = DotPattern::random(20, 1, -2.0, -1.0, -0.1, 0.1);  // behind the robot
  const auto schedule = CalibrationSchedule::straight_then_spin(10, 0.1, 0.025, 0.05, 3);
  try {
    collect_dataset(world, schedule);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyDataset);
  }
}

TEST(CoverageHull, SquareAndContainment) {
  const CoverageHull hull = CoverageHull::of({{0, 0}, {10, 0}, {10, 10}, {0, 10}, {5, 5}, {3, 7}});
  EXPECT_EQ(hull.vertices.size(), 4u);
  EXPECT_DOUBLE_EQ(hull.area(), 100.0);
  EXPECT_TRUE(hull.contains({5, 5}));
  EXPECT_TRUE(hull.contains({10, 10}));
  EXPECT_FALSE(hull.contains({10.01, 5}));
}

TEST(CoverageHull, ContainsEveryInputPoint) {
  test::Gen gen(11);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Vec2> pts;
    const int n = gen.integer(3, 60);
    for (int i = 0; i < n; ++i) pts.push_back({gen.uniform(0, 640), gen.uniform(0, 480)});
    const CoverageHull hull = CoverageHull::of(pts);
    for (const Vec2& p : pts) {
      // Nudge towards the centroid so boundary points are strictly inside.
      Vec2 c = Vec2::Zero();
      for (const Vec2& v : hull.vertices) c += v;
      c /= static_cast<double>(hull.vertices.size());
      EXPECT_TRUE(hull.contains(p + 1e-9 * (c - p))) << "trial " << trial;
    }
  }
}

TEST(Train, ReducesLossOnAnAffineField) {
  const CalibrationDataset data = affine_dataset(800, 0.1);
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.learning_rate = 1e-3;
  cfg.outlier_factor = 1e9;
  const TrainResult r = train(data, cfg);
  ASSERT_EQ(r.curve.size(), 30u);
  EXPECT_LT(r.curve.back().train_loss, 0.1 * r.curve.front().train_loss);
  EXPECT_EQ(r.epochs_run, 30);
  EXPECT_EQ(r.holdout_loss, r.curve.back().holdout_loss);
  EXPECT_GE(r.hull.vertices.size(), 3u);
}

TEST(Train, DeterministicForASeed) {
  const CalibrationDataset data = affine_dataset(200, 0.1);
  TrainConfig cfg;
  cfg.epochs = 3;
  const TrainResult a = train(data, cfg);
  const TrainResult b = train(data, cfg);
  EXPECT_EQ(a.net.parameters(), b.net.parameters());
  cfg.seed = 2;
  EXPECT_NE(train(data, cfg).net.parameters(), a.net.parameters());
}

TEST(Train, EarlyStopAtTargetLoss) {
  const CalibrationDataset data = affine_dataset(400, 0.1);
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.learning_rate = 1e-3;
  cfg.target_loss = 1e9;
  EXPECT_EQ(train(data, cfg).epochs_run, 1);
}

TEST(Train, DivergenceNamesTheEpoch) {
  const CalibrationDataset data = affine_dataset(200, 0.1);
  TrainConfig cfg;
  cfg.optimizer = Optimizer::kSgd;
  cfg.learning_rate = 1e6;
  cfg.epochs = 50;
  try {
    train(data, cfg);
    FAIL() << "expected divergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kTrainingDiverged);
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(Train, RejectsEmptyDataAndBadConfig) {
  CalibrationDataset empty;
  EXPECT_THROW(train(empty, TrainConfig{}), Error);
  TrainConfig bad;
  bad.batch_size = 0;
  EXPECT_THROW(train(affine_dataset(10, 0.1), bad), Error);
}

TEST(Train, DropsFlowOutliers) {
  CalibrationDataset data = affine_dataset(300, 0.1);
  data.samples[7].flow *= 1000.0;
  data.samples[8].flow *= 1000.0;
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.outlier_factor = 50.0;
  EXPECT_EQ(train(data, cfg).outliers_removed, 2u);
}

#pragma once

#include <cstdint>
#include <vector>

#include "lbvs/net.hpp"
#include "lbvs/sim.hpp"

namespace lbvs {

struct CalibrationDataset {
  std::vector<FlowSample> samples;
  double frame_dt = 0.1;
  std::int64_t frame_count = 0;

  bool empty() const { return samples.empty(); }
  std::size_t size() const { return samples.size(); }
};

/// Per-frame commands for the self-calibration drive.
struct CalibrationSchedule {
  std::vector<ControlCommand> commands;
  double frame_dt = 0.1;

  /// Two phases of equal length: straight driving forward and backward with
  /// no rotation, then spinning in place. Each phase is made of segments of
  /// alternating sign with random magnitude in [0.2, 1] times the cap, held
  /// for 5 to 15 frames.
  static CalibrationSchedule straight_then_spin(int frames, double frame_dt, double v_max,
                                                double omega_max, std::uint64_t seed);
};

/// Static dot field, camera and start pose for the calibration drive.
struct CalibrationWorld {
  CameraModel camera;
  DotPattern pattern;  // world frame
  Pose2 start;
  std::uint64_t seed = 1;
};

/// Drives the schedule and pairs id-matched measurements of consecutive
/// frames. Frame pairs with fewer than 3 matches are skipped. Throws
/// kEmptyDataset when nothing matched.
CalibrationDataset collect_dataset(const CalibrationWorld& world,
                                   const CalibrationSchedule& schedule);

/// Convex hull of the training pixels (counter-clockwise, no repeated vertex).
struct CoverageHull {
  std::vector<Vec2> vertices;

  static CoverageHull of(const std::vector<Vec2>& points);
  bool contains(const Vec2& pixel) const;
  double area() const;
};

enum class Optimizer { kSgd, kMomentum, kAdam };

struct TrainConfig {
  double learning_rate = 1e-4;
  int epochs = 200;
  int batch_size = 64;
  std::uint64_t seed = 1;
  Optimizer optimizer = Optimizer::kAdam;
  double momentum = 0.9;
  double holdout_fraction = 0.1;
  /// Stop early once the holdout loss reaches this value (pixels^2).
  double target_loss = 0.0;
  /// Samples whose flow exceeds this multiple of the median flow are dropped.
  double outlier_factor = 5.0;
  double init_range = 0.05;

  void validate() const;
};

struct LossPoint {
  int epoch = 0;
  double train_loss = 0.0;
  double holdout_loss = 0.0;
};

struct TrainResult {
  InteractionNet net;
  std::vector<LossPoint> curve;
  double holdout_loss = 0.0;
  CoverageHull hull;
  std::size_t outliers_removed = 0;
  int epochs_run = 0;
};

/// Minimizes the mean squared flow residual. Throws kEmptyDataset for an
/// empty dataset and kTrainingDiverged (naming the epoch) on NaN/Inf loss.
TrainResult train(const CalibrationDataset& dataset, const TrainConfig& cfg);

}  // namespace lbvs

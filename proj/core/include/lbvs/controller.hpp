#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lbvs/sim.hpp"

namespace lbvs {

/// Anything that maps a pixel to a 2x2 interaction matrix: a trained
/// InteractionNet, or the analytic oracle in tests.
using InteractionFn = std::function<Mat2(const Vec2&)>;

/// Desired pixel of every tracked dot id for the current tick.
struct TargetPattern {
  std::vector<Measurement> desired;
};

/// Stacked e = [e_1; ...; e_M] with e_i = u_i - u_i*, ordered like `ids`.
struct ErrorVector {
  Eigen::VectorXd stacked;
  std::vector<int> ids;
  std::vector<Vec2> pixels;  // measured u_i, same order

  int count() const { return static_cast<int>(ids.size()); }
  double mean_norm() const;
};

/// Pairs measurements with targets by id (measurement order is kept).
ErrorVector stack_errors(const MeasurementSet& measurements, const TargetPattern& targets);

struct GainSchedule {
  double lambda_far = 0.8;           // 1/s
  double lambda_near = 0.2;          // 1/s
  double switch_threshold_px = 50.0; // on the mean per-point error norm
};

enum class TargetMode { kStation, kFlow };
enum class ControlMode { kFull, kRotation, kHold };

const char* to_string(ControlMode mode);

struct ControllerConfig {
  double v_max = 0.025;     // m/s
  double omega_max = 0.05;  // rad/s
  int min_points_full = 20;
  int min_points_rotation = 3;
  GainSchedule gains;
  double dt = 0.5;  // control period, s
  /// Gain schedule, saturation and the rotation/hold fallbacks, as one switch.
  bool constraints = true;
  /// Hold mode multiplies the previous angular rate by this factor per tick
  /// when constraints are on.
  double hold_decay = 0.5;
  TargetMode target_mode = TargetMode::kStation;

  void validate() const;
};

/// -lambda * (L^T L)^{-1} L^T e over the stacked Jacobian of the matched
/// points. Throws kInvalidInput without a common id and kDegenerateGeometry
/// when cond(L^T L) > 1e8.
ControlCommand stack_and_solve(const InteractionFn& interaction,
                               const MeasurementSet& measurements,
                               const TargetPattern& targets, double lambda);

/// Same solve on an already stacked error vector.
ControlCommand solve_stacked(const InteractionFn& interaction, const ErrorVector& errors,
                             double lambda);

/// lambda_far when the mean per-point error exceeds the threshold; ties go to
/// lambda_near.
double schedule_gain(const ErrorVector& errors, const GainSchedule& schedule);
double schedule_gain(double mean_error_px, const GainSchedule& schedule);

/// Independent per-component clamp to the velocity caps.
ControlCommand saturate(const ControlCommand& cmd, const ControllerConfig& cfg);

struct ControlOutput {
  ControlCommand cmd;
  ControlMode mode = ControlMode::kHold;
  double lambda = 0.0;
  double mean_error_px = 0.0;
  int n_points = 0;
};

/// One controller tick. With constraints: full mode from min_points_full
/// matches, rotation mode (lambda_near) from min_points_rotation, otherwise
/// hold (v = 0, previous omega clamped and decayed); the result is saturated.
/// Without constraints: full mode with lambda_far or hold with the previous
/// omega, no saturation. Degenerate geometry downgrades the mode.
ControlOutput control_step(const InteractionFn& interaction, const MeasurementSet& measurements,
                           const TargetPattern& targets, const ControllerConfig& cfg,
                           const ControlCommand& last_cmd);

/// Timed rigid placements of the dot pattern, interpolated piecewise-linearly
/// (shortest arc for the heading).
struct PatternTrajectory {
  struct Knot {
    double t = 0.0;
    Pose2 pose;
  };
  std::vector<Knot> knots;

  bool empty() const { return knots.empty(); }
  double start_time() const;
  double end_time() const;
  /// Throws kEmptyTrajectory or kInvalidInput for non-increasing timestamps.
  void validate() const;
};

struct PlacementSample {
  Pose2 pose;
  bool clamped = false;
};

PlacementSample pattern_at(const PatternTrajectory& trajectory, double t);

}  // namespace lbvs

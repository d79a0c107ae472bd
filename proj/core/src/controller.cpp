#include "lbvs/controller.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "lbvs/error.hpp"

namespace lbvs {

const char* to_string(ControlMode mode) {
  switch (mode) {
    case ControlMode::kFull: return "full";
    case ControlMode::kRotation: return "rotation";
    case ControlMode::kHold: return "hold";
  }
  return "unknown";
}

double ErrorVector::mean_norm() const {
  if (ids.empty()) return 0.0;
  double sum = 0.0;
  for (int i = 0; i < count(); ++i) sum += stacked.segment<2>(2 * i).norm();
  return sum / count();
}

ErrorVector stack_errors(const MeasurementSet& measurements, const TargetPattern& targets) {
  std::unordered_map<int, Vec2> desired;
  desired.reserve(targets.desired.size());
  for (const Measurement& t : targets.desired) desired.emplace(t.id, t.pixel);

  ErrorVector errors;
  std::vector<double> values;
  values.reserve(2 * measurements.items.size());
  for (const Measurement& m : measurements.items) {
    const auto it = desired.find(m.id);
    if (it == desired.end()) continue;
    errors.ids.push_back(m.id);
    errors.pixels.push_back(m.pixel);
    values.push_back(m.pixel.x() - it->second.x());
    values.push_back(m.pixel.y() - it->second.y());
  }
  errors.stacked = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  return errors;
}

void ControllerConfig::validate() const {
  if (!(v_max > 0.0) || !(omega_max > 0.0)) {
    throw Error(ErrorCode::kConfig, "velocity caps must be positive");
  }
  if (min_points_rotation != 3 || min_points_full < min_points_rotation) {
    throw Error(ErrorCode::kConfig, "need min_points_rotation = 3 <= min_points_full");
  }
  if (!(gains.lambda_near > 0.0) || gains.lambda_near > gains.lambda_far) {
    throw Error(ErrorCode::kConfig, "need 0 < lambda_near <= lambda_far");
  }
  if (!(dt > 0.0)) throw Error(ErrorCode::kConfig, "control period must be positive");
}

ControlCommand solve_stacked(const InteractionFn& interaction, const ErrorVector& errors,
                             double lambda) {
  if (errors.count() == 0) {
    throw Error(ErrorCode::kInvalidInput, "stack_and_solve: no common ids");
  }
  // Normal equations accumulated block by block: N = sum L_i^T L_i,
  // g = sum L_i^T e_i.
  Mat2 normal = Mat2::Zero();
  Vec2 rhs = Vec2::Zero();
  for (int i = 0; i < errors.count(); ++i) {
    const Mat2 block = interaction(errors.pixels[static_cast<std::size_t>(i)]);
    normal.noalias() += block.transpose() * block;
    rhs.noalias() += block.transpose() * errors.stacked.segment<2>(2 * i);
  }

  // Symmetric 2x2: eigenvalues in closed form for the condition number.
  const double a = normal(0, 0), b = normal(0, 1), d = normal(1, 1);
  const double mean = 0.5 * (a + d);
  const double radius = std::hypot(0.5 * (a - d), b);
  const double eig_max = mean + radius;
  const double eig_min = mean - radius;
  if (!(eig_max > 0.0) || !(eig_min > 0.0) || eig_max / eig_min > 1e8) {
    throw Error(ErrorCode::kDegenerateGeometry, "stacked interaction matrix is rank deficient");
  }
  const double det = a * d - b * b;
  const Vec2 solution(( d * rhs.x() - b * rhs.y()) / det,
                      (-b * rhs.x() + a * rhs.y()) / det);
  return {-lambda * solution.x(), -lambda * solution.y()};
}

ControlCommand stack_and_solve(const InteractionFn& interaction,
                               const MeasurementSet& measurements,
                               const TargetPattern& targets, double lambda) {
  return solve_stacked(interaction, stack_errors(measurements, targets), lambda);
}

double schedule_gain(double mean_error_px, const GainSchedule& schedule) {
  return mean_error_px > schedule.switch_threshold_px ? schedule.lambda_far
                                                      : schedule.lambda_near;
}

double schedule_gain(const ErrorVector& errors, const GainSchedule& schedule) {
  return schedule_gain(errors.mean_norm(), schedule);
}

ControlCommand saturate(const ControlCommand& cmd, const ControllerConfig& cfg) {
  return {std::clamp(cmd.v, -cfg.v_max, cfg.v_max),
          std::clamp(cmd.omega, -cfg.omega_max, cfg.omega_max)};
}

ControlOutput control_step(const InteractionFn& interaction, const MeasurementSet& measurements,
                           const TargetPattern& targets, const ControllerConfig& cfg,
                           const ControlCommand& last_cmd) {
  const ErrorVector errors = stack_errors(measurements, targets);
  ControlOutput out;
  out.n_points = errors.count();
  out.mean_error_px = errors.mean_norm();

  auto try_solve = [&](ControlMode mode, double lambda) -> bool {
    try {
      out.cmd = solve_stacked(interaction, errors, lambda);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateGeometry) throw;
      return false;
    }
    out.mode = mode;
    out.lambda = lambda;
    return true;
  };

  bool solved = false;
  if (out.n_points >= cfg.min_points_full) {
    const double lambda =
        cfg.constraints ? schedule_gain(out.mean_error_px, cfg.gains) : cfg.gains.lambda_far;
    solved = try_solve(ControlMode::kFull, lambda);
  }
  if (!solved && cfg.constraints && out.n_points >= cfg.min_points_rotation) {
    solved = try_solve(ControlMode::kRotation, cfg.gains.lambda_near);
  }
  if (!solved) {
    out.mode = ControlMode::kHold;
    out.lambda = 0.0;
    if (cfg.constraints) {
      const double omega = std::clamp(last_cmd.omega, -cfg.omega_max, cfg.omega_max);
      out.cmd = {0.0, cfg.hold_decay * omega};
    } else {
      out.cmd = {0.0, last_cmd.omega};
    }
  }
  if (cfg.constraints) out.cmd = saturate(out.cmd, cfg);
  return out;
}

double PatternTrajectory::start_time() const {
  if (knots.empty()) throw Error(ErrorCode::kEmptyTrajectory, "empty trajectory");
  return knots.front().t;
}

double PatternTrajectory::end_time() const {
  if (knots.empty()) throw Error(ErrorCode::kEmptyTrajectory, "empty trajectory");
  return knots.back().t;
}

void PatternTrajectory::validate() const {
  if (knots.empty()) throw Error(ErrorCode::kEmptyTrajectory, "empty trajectory");
  for (std::size_t i = 1; i < knots.size(); ++i) {
    if (!(knots[i].t > knots[i - 1].t)) {
      throw Error(ErrorCode::kInvalidInput, "trajectory timestamps must increase strictly");
    }
  }
}

PlacementSample pattern_at(const PatternTrajectory& trajectory, double t) {
  if (trajectory.empty()) throw Error(ErrorCode::kEmptyTrajectory, "pattern_at: empty trajectory");
  const auto& knots = trajectory.knots;
  if (t <= knots.front().t) return {knots.front().pose, t < knots.front().t};
  if (t >= knots.back().t) return {knots.back().pose, t > knots.back().t};

  const auto upper = std::upper_bound(knots.begin(), knots.end(), t,
                                      [](double value, const PatternTrajectory::Knot& k) {
                                        return value < k.t;
                                      });
  const auto& b = *upper;
  const auto& a = *(upper - 1);
  const double s = (t - a.t) / (b.t - a.t);
  const double dtheta = wrap_angle(b.pose.theta - a.pose.theta);
  return {Pose2(a.pose.x + s * (b.pose.x - a.pose.x), a.pose.y + s * (b.pose.y - a.pose.y),
                a.pose.theta + s * dtheta),
          false};
}

}  // namespace lbvs

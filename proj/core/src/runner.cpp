#include "lbvs/runner.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>
#include <utility>

#include "lbvs/error.hpp"

namespace lbvs {

FollowRunner::FollowRunner(const CameraModel& camera, InteractionFn interaction, RobotSpec robot,
                           const ControllerConfig& cfg, std::uint64_t seed)
    : camera_(camera), interaction_(std::move(interaction)), robot_(std::move(robot)), cfg_(cfg),
      seed_(seed) {
  camera_.validate();
  cfg_.validate();
  robot_.trajectory.validate();
  robot_.pattern.validate();
  if (!(robot_.arm.radius > 0.0)) throw Error(ErrorCode::kConfig, "arm radius must be positive");
  if (cfg_.target_mode == TargetMode::kFlow) {
    cfg_.gains.lambda_far = 1.0 / cfg_.dt;
    cfg_.gains.lambda_near = 1.0 / cfg_.dt;
  }

  for (const Dot& dot : robot_.pattern.dots) {
    const auto pixel = try_project(camera_, dot.position);
    if (pixel && camera_.bounds.contains(*pixel)) station_targets_.desired.push_back({dot.id, *pixel});
  }

  pose_ = robot_.start ? *robot_.start
                       : pattern_at(robot_.trajectory, robot_.trajectory.start_time()).pose;
  arm_ = robot_.arm;
  if (robot_.corner == CornerStrategy::kFixed) arm_.joint_angle = kFixedJointAngle;
  log_.name = robot_.name;
  log_.dt = cfg_.dt;
}

DotPattern FollowRunner::world_pattern(std::int64_t k) const {
  const double t = robot_.trajectory.start_time() + static_cast<double>(k) * cfg_.dt;
  return robot_.pattern.placed(pattern_at(robot_.trajectory, t).pose);
}

const TraceRecord& FollowRunner::tick(std::span<const DotPattern> world_patterns,
                                      std::size_t own_index) {
  const double t = robot_.trajectory.start_time() + static_cast<double>(k_) * cfg_.dt;
  const PlacementSample placement = pattern_at(robot_.trajectory, t);

  std::unordered_set<int> own_ids;
  for (const Measurement& m : station_targets_.desired) own_ids.insert(m.id);

  MeasurementSet measured;
  measured.frame_index = k_;
  int foreign = 0;
  for (std::size_t j = 0; j < world_patterns.size(); ++j) {
    if (world_patterns[j].color_tag != robot_.pattern.color_tag) continue;
    const MeasurementSet seen =
        observe(pose_, camera_, world_patterns[j], mix_seed(seed_, j), k_, last_cmd_.omega);
    for (const Measurement& m : seen.items) {
      if (j != own_index) {
        if (!own_ids.count(m.id)) continue;
        ++foreign;
      }
      measured.items.push_back(m);
    }
  }

  TargetPattern flow_targets;
  const TargetPattern* targets = &station_targets_;
  if (cfg_.target_mode == TargetMode::kFlow) {
    flow_targets.desired = previous_ ? previous_->items : measured.items;
    targets = &flow_targets;
  }

  const ControlOutput out = control_step(interaction_, measured, *targets, cfg_, last_cmd_);

  TraceRecord rec;
  rec.t = t;
  rec.pose = pose_;
  rec.cmd = out.cmd;
  rec.mode = out.mode;
  rec.mean_error_px = out.mean_error_px;
  rec.n_points = out.n_points;
  rec.lambda = out.lambda;
  rec.nozzle = nozzle_position(pose_, arm_);
  rec.extruding = robot_.extrude;
  rec.joint_angle = arm_.joint_angle;
  rec.placement = placement.pose;
  rec.placement_clamped = placement.clamped;
  rec.foreign_matches = foreign;

  if (robot_.corner == CornerStrategy::kCompensate) {
    const JointRate rate = compensate_rotation(out.cmd.omega, arm_.joint_rate_max);
    arm_.joint_angle += rate.rate * cfg_.dt;
    rec.joint_clamped = rate.clamped;
  }
  pose_ = step_unicycle(pose_, out.cmd, cfg_.dt);
  last_cmd_ = out.cmd;
  previous_ = std::move(measured);
  ++k_;
  log_.records.push_back(rec);
  return log_.records.back();
}

std::int64_t tick_count(double duration, double dt) {
  if (!(duration > 0.0)) return 0;
  return static_cast<std::int64_t>(std::floor(duration / dt + 1e-9));
}

TraceLog run_follow(const CameraModel& camera, const InteractionFn& interaction,
                    const RobotSpec& robot, const ControllerConfig& cfg, double duration,
                    std::uint64_t seed) {
  return std::move(run_lockstep(camera, interaction, {robot}, cfg, duration, seed).front());
}

std::vector<TraceLog> run_lockstep(const CameraModel& camera, const InteractionFn& interaction,
                                   const std::vector<RobotSpec>& robots,
                                   const ControllerConfig& cfg, double duration,
                                   std::uint64_t seed) {
  if (robots.empty()) throw Error(ErrorCode::kConfig, "no robots to run");
  std::set<int> colors;
  for (const RobotSpec& r : robots) {
    if (!colors.insert(r.pattern.color_tag).second) {
      throw Error(ErrorCode::kConfig,
                  "robots share pattern color " + std::to_string(r.pattern.color_tag) +
                      ": mutual control interference");
    }
  }

  std::vector<FollowRunner> runners;
  runners.reserve(robots.size());
  for (std::size_t i = 0; i < robots.size(); ++i) {
    runners.emplace_back(camera, interaction, robots[i], cfg, mix_seed(seed, 1000 + i));
  }

  const std::int64_t n = tick_count(duration, cfg.dt);
  std::vector<DotPattern> projected(runners.size());
  for (std::int64_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < runners.size(); ++i) projected[i] = runners[i].world_pattern(k);
    for (std::size_t i = 0; i < runners.size(); ++i) runners[i].tick(projected, i);
  }

  std::vector<TraceLog> logs;
  logs.reserve(runners.size());
  for (FollowRunner& r : runners) logs.push_back(r.take_log());
  return logs;
}

}  // namespace lbvs

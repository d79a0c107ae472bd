#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lbvs/controller.hpp"
#include "lbvs/printhead.hpp"
#include "lbvs/sim.hpp"
#include "lbvs/trace.hpp"

namespace lbvs {

/// One robot of a follow run. The dot pattern is given in the pattern frame,
/// which is also the desired chassis frame: the robot is on station when its
/// pose equals the pattern placement.
struct RobotSpec {
  std::string name = "robot";
  DotPattern pattern;
  PatternTrajectory trajectory;
  /// Defaults to the first placement of the trajectory.
  std::optional<Pose2> start;
  CornerStrategy corner = CornerStrategy::kCompensate;
  ArmState arm{-1.5707963267948966, 0.03, 1.0};
  bool extrude = false;
};

/// Closed loop of one robot: place pattern, observe, control, move.
class FollowRunner {
 public:
  FollowRunner(const CameraModel& camera, InteractionFn interaction, RobotSpec robot,
               const ControllerConfig& cfg, std::uint64_t seed);

  /// The robot's own pattern in the world at tick `k`.
  DotPattern world_pattern(std::int64_t k) const;

  /// Advances one tick. `world_patterns` holds every pattern currently
  /// projected (the robot's own included); only patterns with the robot's
  /// color tag are visible to it. `own_index` marks its own entry.
  const TraceRecord& tick(std::span<const DotPattern> world_patterns, std::size_t own_index);

  const TraceLog& log() const { return log_; }
  TraceLog take_log() { return std::move(log_); }
  const Pose2& pose() const { return pose_; }
  std::int64_t ticks() const { return k_; }

 private:
  CameraModel camera_;
  InteractionFn interaction_;
  RobotSpec robot_;
  ControllerConfig cfg_;
  std::uint64_t seed_;
  TargetPattern station_targets_;

  Pose2 pose_;
  ArmState arm_;
  ControlCommand last_cmd_;
  std::optional<MeasurementSet> previous_;
  std::int64_t k_ = 0;
  TraceLog log_;
};

/// Number of ticks a run of `duration` seconds takes (0 for duration <= 0).
std::int64_t tick_count(double duration, double dt);

/// Single-robot follow run. A non-positive duration yields an empty log.
TraceLog run_follow(const CameraModel& camera, const InteractionFn& interaction,
                    const RobotSpec& robot, const ControllerConfig& cfg, double duration,
                    std::uint64_t seed);

/// Two or more robots advanced in lockstep. Throws kConfig when two robots
/// share a color tag.
std::vector<TraceLog> run_lockstep(const CameraModel& camera, const InteractionFn& interaction,
                                   const std::vector<RobotSpec>& robots,
                                   const ControllerConfig& cfg, double duration,
                                   std::uint64_t seed);

}  // namespace lbvs

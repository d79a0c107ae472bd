#pragma once

#include <string>
#include <vector>

#include "lbvs/controller.hpp"
#include "lbvs/sim.hpp"

namespace lbvs {

/// State and controller output of one robot at one control tick. The pose is
/// the pose at the start of the tick, before `cmd` is applied.
struct TraceRecord {
  double t = 0.0;
  Pose2 pose;
  ControlCommand cmd;
  ControlMode mode = ControlMode::kHold;
  double mean_error_px = 0.0;
  int n_points = 0;
  double lambda = 0.0;
  Vec2 nozzle = Vec2::Zero();
  bool extruding = false;
  double joint_angle = 0.0;
  bool joint_clamped = false;
  Pose2 placement;          // pattern placement at t
  bool placement_clamped = false;
  int foreign_matches = 0;  // matched ids coming from another robot's pattern
};

/// Fixed-period log of one robot.
struct TraceLog {
  std::string name;
  double dt = 0.0;
  std::vector<TraceRecord> records;

  bool empty() const { return records.empty(); }
  std::size_t size() const { return records.size(); }
};

}  // namespace lbvs

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "lbvs/calibration.hpp"
#include "lbvs/controller.hpp"
#include "lbvs/planner.hpp"
#include "lbvs/printhead.hpp"
#include "lbvs/sim.hpp"

namespace lbvs::app {

struct Box {
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
};

/// Everything a subcommand needs, read from an INI-style scenario file.
/// Relative file paths are resolved against the scenario's directory.
struct Scenario {
  std::filesystem::path source;
  std::string name = "scenario";
  int robots = 1;

  CameraModel camera = CameraModel::desk_default();

  // Self-calibration drive: a static world dot field around the start pose.
  int calib_dots = 200;
  std::uint64_t calib_pattern_seed = 3;
  Box calib_box{-0.05, 0.42, -0.3, 0.3};
  int calib_frames = 600;
  double calib_frame_dt = 0.1;
  std::uint64_t calib_seed = 5;
  double calib_v_max = 0.025;
  double calib_omega_max = 0.05;
  TrainConfig train;

  // Projected pattern, in the pattern (station) frame.
  int pattern_count = 80;
  std::uint64_t pattern_seed = 11;
  Box pattern_box{0.04, 0.34, -0.1, 0.1};
  std::optional<std::filesystem::path> pattern_file;
  int color = 0;

  ControllerConfig controller;

  // Trajectory: rectangle, static, sword or file.
  std::string shape = "rectangle";
  double width = 0.10;
  double height = 0.06;
  double scale = 0.25;  // sword
  std::optional<std::filesystem::path> trajectory_file;
  PathTiming timing;

  CornerStrategy corner = CornerStrategy::kCompensate;
  ArmState arm{-1.5707963267948966, 0.03, 1.0};
  double bead_width = 0.002;
  WallSampling sampling;
  double corner_window = 0.012;  // half-size of the over-deposit window, m

  std::uint64_t seed = 42;
  std::optional<double> duration;
  Pose2 start_offset;  // robot start relative to the first placement

  // Second robot of a duo run.
  int color_b = 1;
  std::uint64_t pattern_seed_b = 12;
  double joint_a = 1.5707963267948966;
  double joint_b = -1.5707963267948966;
};

/// Throws Error(kIo, "scenario not found: ...") for a missing file and
/// Error(kConfig) for unknown keys or invalid values.
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace lbvs::app

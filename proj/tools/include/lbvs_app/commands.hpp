#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lbvs/calibration.hpp"
#include "lbvs/evaluation.hpp"
#include "lbvs/model_file.hpp"
#include "lbvs/planner.hpp"
#include "lbvs/printhead.hpp"
#include "lbvs/trace.hpp"
#include "lbvs_app/scenario.hpp"

namespace lbvs::app {

/// Command-line overrides shared by all subcommands.
struct Options {
  std::filesystem::path scenario;
  std::optional<std::filesystem::path> model;  // default: <out>/model.bin
  std::optional<std::uint64_t> seed;
  std::filesystem::path out = "lbvs_out";
  std::optional<bool> constraints;
  std::optional<CornerStrategy> corner;
};

struct CalibrateResult {
  TrainResult training;
  std::size_t samples = 0;
  std::filesystem::path model_path;
};

struct FollowResult {
  TraceLog log;
  PatternTrajectory trajectory;
  AteStats ate;
  std::optional<int> lag_ticks;
  double terminal_error_px = 0.0;
  bool constraints = true;
};

struct PrintResult {
  TraceLog log;
  Polyline reference;
  BeadRibbon ribbon;
  WallStats wall;
  std::vector<double> corner_over_deposit_mm2;
  AteStats ate;
  CornerStrategy corner = CornerStrategy::kCompensate;
  bool constraints = true;
};

struct DuoResult {
  std::vector<TraceLog> logs;
  std::vector<BeadRibbon> ribbons;
  std::vector<Vec2> junctions;
  JunctionReport gaps;
  int cross_matches = 0;
  std::vector<bool> complete;  // nozzle reached the end of its half
};

struct EvalResult {
  std::vector<Vec2> pixels;
  std::vector<double> relative_error;  // Frobenius, per pixel
  double median = 0.0;
};

// Each command writes its files under opts.out and a short summary to `log`.
CalibrateResult calibrate(const Scenario& s, const Options& opts, std::ostream& log);
FollowResult follow(const Scenario& s, const Options& opts, std::ostream& log);
PrintResult print(const Scenario& s, const Options& opts, std::ostream& log);
DuoResult duo(const Scenario& s, const Options& opts, std::ostream& log);
/// Compares the model with the analytic interaction matrix of the scenario
/// camera on `pixels` points drawn inside the model's coverage hull.
EvalResult eval(const Scenario& s, const Options& opts, std::ostream& log, int pixels = 1000);

/// Loads the model and refuses it (kConfig) when it was calibrated with a
/// different camera geometry.
ModelFile load_checked_model(const Scenario& s, const Options& opts);

/// Runs a subcommand by name and maps failures to exit codes: 0 success,
/// 1 runtime failure, 2 usage or configuration error.
int run_command(const std::string& command, const Options& opts, std::ostream& out,
                std::ostream& err);

}  // namespace lbvs::app

#include "lbvs_app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "lbvs/error.hpp"
#include "lbvs/io.hpp"
#include "lbvs/report.hpp"
#include "lbvs/runner.hpp"

namespace lbvs::app {

namespace {

std::uint64_t run_seed(const Scenario& s, const Options& o) { return o.seed.value_or(s.seed); }

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
}

std::filesystem::path model_path(const Options& o) { return o.model.value_or(o.out / "model.bin"); }

ControllerConfig controller_of(const Scenario& s, const Options& o) {
  ControllerConfig c = s.controller;
  if (o.constraints) c.constraints = *o.constraints;
  return c;
}

DotPattern pattern_of(const Scenario& s, int color, std::uint64_t seed, int first_id) {
  DotPattern p;
  if (s.pattern_file) {
    p = read_pattern_csv(*s.pattern_file);
    for (Dot& d : p.dots) d.id += first_id;
  } else {
    const Box& b = s.pattern_box;
    p = DotPattern::random(s.pattern_count, seed, b.x_min, b.x_max, b.y_min, b.y_max, first_id);
  }
  p.color_tag = color;
  return p;
}

InteractionFn interaction_of(const ModelFile& model) {
  auto net = std::make_shared<const InteractionNet>(model.net);
  return [net](const Vec2& u) { return (*net)(u); };
}

Polyline wall_from_file(const std::filesystem::path& path) {
  const PatternTrajectory t = read_trajectory_csv(path);
  Polyline wall;
  for (const auto& k : t.knots) wall.points.push_back(k.pose.position());
  if (wall.points.size() > 2 && (wall.points.front() - wall.points.back()).norm() < 1e-9) {
    wall.points.pop_back();
    wall.closed = true;
  }
  return wall;
}

double run_duration(const Scenario& s, const PatternTrajectory& t) {
  return s.duration.value_or(t.end_time() - t.start_time());
}

RobotSpec robot_of(const Scenario& s, const PatternTrajectory& traj, const ArmState& arm,
                   CornerStrategy corner, bool extrude) {
  RobotSpec r;
  r.name = s.name;
  r.pattern = pattern_of(s, s.color, s.pattern_seed, 0);
  r.trajectory = traj;
  traj.validate();
  r.start = pattern_at(traj, traj.start_time()).pose.compose(s.start_offset);
  r.corner = corner;
  r.arm = arm;
  r.extrude = extrude;
  return r;
}

void write_trace(const TraceLog& log, const std::filesystem::path& path) {
  write_text_file(path, trace_csv(log));
}

}  // namespace

ModelFile load_checked_model(const Scenario& s, const Options& opts) {
  const auto path = model_path(opts);
  ModelFile m = load_model(path);
  const std::uint64_t want = s.camera.fingerprint();
  if (m.camera_fingerprint != want) {
    throw Error(ErrorCode::kConfig,
                fmt::format("model {} was calibrated with a different camera (fingerprint {:016x}, "
                            "scenario camera {:016x}); run calibrate for this scenario first",
                            path.string(), m.camera_fingerprint, want));
  }
  return m;
}

CalibrateResult calibrate(const Scenario& s, const Options& opts, std::ostream& log) {
  ensure_dir(opts.out);
  CalibrationWorld world;
  world.camera = s.camera;
  const Box& b = s.calib_box;
  world.pattern = DotPattern::random(s.calib_dots, s.calib_pattern_seed, b.x_min, b.x_max, b.y_min, b.y_max);
  world.seed = opts.seed.value_or(s.calib_seed);
  const auto schedule = CalibrationSchedule::straight_then_spin(
      s.calib_frames, s.calib_frame_dt, s.calib_v_max, s.calib_omega_max, world.seed);
  const CalibrationDataset data = collect_dataset(world, schedule);

  TrainConfig cfg = s.train;
  if (opts.seed) cfg.seed = *opts.seed;
  CalibrateResult result;
  result.samples = data.size();
  result.training = train(data, cfg);

  result.model_path = model_path(opts);
  save_model(result.model_path, {result.training.net, s.camera.fingerprint(), result.training.hull});
  write_text_file(opts.out / "dataset.csv", dataset_csv(data));
  write_text_file(opts.out / "loss.csv", loss_csv(result.training.curve));
  fmt::print(log, "samples: {} ({} outliers removed)\n", data.size(), result.training.outliers_removed);
  fmt::print(log, "holdout loss: {:.6g} px^2 after {} epochs\n", result.training.holdout_loss,
             result.training.epochs_run);
  fmt::print(log, "model: {}\n", result.model_path.string());
  return result;
}

FollowResult follow(const Scenario& s, const Options& opts, std::ostream& log) {
  const ModelFile model = load_checked_model(s, opts);
  const ControllerConfig cfg = controller_of(s, opts);

  PatternTrajectory traj;
  Polyline reference;
  ArmState arm = s.arm;
  if (s.shape == "rectangle" || s.shape == "sword") {
    const Polyline path = s.shape == "rectangle" ? rectangle({0.0, 0.0}, s.width, s.height)
                                                 : sword_halves(s.scale).first;
    const PrintPlan plan = plan_print(path, CornerStrategy::kCompensate, arm, s.timing);
    traj = plan.trajectory;
    reference = plan.reference;
  } else if (s.shape == "static") {
    traj.knots.push_back({0.0, Pose2()});
  } else {
    traj = read_trajectory_csv(*s.trajectory_file);
  }
  if (traj.empty()) throw Error(ErrorCode::kEmptyTrajectory, "empty trajectory");
  if (reference.points.empty()) {
    for (const auto& k : traj.knots) reference.points.push_back(nozzle_position(k.pose, arm));
  }

  const RobotSpec robot = robot_of(s, traj, arm, CornerStrategy::kCompensate, false);
  FollowResult r;
  r.constraints = cfg.constraints;
  r.trajectory = traj;
  r.log = run_follow(s.camera, interaction_of(model), robot, cfg, run_duration(s, traj), run_seed(s, opts));

  ensure_dir(opts.out);
  write_trace(r.log, opts.out / "trace.csv");
  write_text_file(opts.out / "trajectory.csv", trajectory_csv(traj));

  ReportBundle bundle;
  MetricsRow row;
  row.run_id = s.name;
  row.constraints = cfg.constraints;
  if (!r.log.empty()) {
    const auto times = log_times(r.log);
    const auto ref = reference_nozzle_path(traj, CornerStrategy::kCompensate, arm, times);
    r.ate = ate(ref, nozzle_series(r.log));
    row.ate = r.ate;
    const auto target = target_speed_series(traj, times, cfg.dt);
    const auto commanded = commanded_speed(r.log);
    try {
      r.lag_ticks = velocity_lag(target, commanded);
      row.lag_ticks = r.lag_ticks;
    } catch (const Error&) {
      // Too short or a constant series (static pattern): no lag to report.
    }
    r.terminal_error_px = r.log.records.back().mean_error_px;
    bundle.speeds.push_back({"target", times, target});
    bundle.speeds.push_back({"commanded", times, commanded});
  }
  bundle.logs.push_back(r.log);
  bundle.references.push_back(reference);
  bundle.metrics.push_back(row);
  render_report(bundle, opts.out);

  if (r.log.empty()) {
    fmt::print(log, "zero-length run: empty trace\n");
    return r;
  }
  fmt::print(log, "constraints: {}\n", cfg.constraints ? "on" : "off");
  fmt::print(log, "ATE mm: rms {:.3f} median {:.3f} max {:.3f}\n", r.ate.rms_mm, r.ate.median_mm, r.ate.max_mm);
  if (r.lag_ticks) fmt::print(log, "velocity lag: {} ticks\n", *r.lag_ticks);
  fmt::print(log, "terminal mean pixel error: {:.3f} px\n", r.terminal_error_px);
  return r;
}

PrintResult print(const Scenario& s, const Options& opts, std::ostream& log) {
  const ModelFile model = load_checked_model(s, opts);
  const ControllerConfig cfg = controller_of(s, opts);
  const CornerStrategy corner = opts.corner.value_or(s.corner);

  Polyline wall;
  if (s.shape == "rectangle") {
    wall = rectangle({0.0, 0.0}, s.width, s.height);
  } else if (s.shape == "file") {
    wall = wall_from_file(*s.trajectory_file);
  } else {
    throw Error(ErrorCode::kConfig, "print needs a rectangle or file trajectory");
  }
  if (wall.segment_count() == 0) throw Error(ErrorCode::kEmptyTrajectory, "empty trajectory");

  const PrintPlan plan = plan_print(wall, corner, s.arm, s.timing);
  const RobotSpec robot = robot_of(s, plan.trajectory, plan.arm, corner, true);

  PrintResult r;
  r.corner = corner;
  r.constraints = cfg.constraints;
  r.reference = plan.reference;
  r.log = run_follow(s.camera, interaction_of(model), robot, cfg, run_duration(s, plan.trajectory),
                     run_seed(s, opts));
  if (r.log.size() < 2) throw Error(ErrorCode::kEmptyTrajectory, "empty trajectory");
  r.ribbon = deposit(nozzle_trace(r.log), s.bead_width);
  r.wall = wall_thickness_stats(r.ribbon, plan.reference, s.sampling);
  r.corner_over_deposit_mm2 = corner_over_deposit(r.ribbon, plan.reference, s.corner_window);
  const auto times = log_times(r.log);
  r.ate = ate(reference_nozzle_path(plan.trajectory, corner, plan.arm, times), nozzle_series(r.log));

  ensure_dir(opts.out);
  write_trace(r.log, opts.out / "trace.csv");
  write_text_file(opts.out / "trajectory.csv", trajectory_csv(plan.trajectory));
  write_text_file(opts.out / "ribbon.csv", ribbon_csv(r.ribbon));
  std::string corners = "corner,x_m,y_m,over_deposit_mm2\n";
  const auto corner_points = plan.reference.corners();
  for (std::size_t i = 0; i < corner_points.size(); ++i) {
    corners += fmt::format("{},{},{},{:.6f}\n", i, corner_points[i].x(), corner_points[i].y(),
                           r.corner_over_deposit_mm2[i]);
  }
  write_text_file(opts.out / "corners.csv", corners);

  ReportBundle bundle;
  bundle.logs.push_back(r.log);
  bundle.references.push_back(plan.reference);
  bundle.ribbons.push_back(r.ribbon);
  bundle.markers = corner_points;
  bundle.speeds.push_back({"target", times, target_speed_series(plan.trajectory, times, cfg.dt)});
  bundle.speeds.push_back({"commanded", times, commanded_speed(r.log)});
  MetricsRow row;
  row.run_id = fmt::format("{}-{}", s.name, corner == CornerStrategy::kFixed ? "fixed" : "compensate");
  row.constraints = cfg.constraints;
  row.ate = r.ate;
  if (r.wall.samples > 0) {
    row.wall_mean_mm = r.wall.mean_mm;
    row.wall_stdev_mm = r.wall.stdev_mm;
  }
  row.gap_count = r.wall.gap_count;
  bundle.metrics.push_back(row);
  render_report(bundle, opts.out);

  double total = 0.0;
  for (double a : r.corner_over_deposit_mm2) total += a;
  fmt::print(log, "corner: {}  constraints: {}\n", corner == CornerStrategy::kFixed ? "fixed" : "compensate",
             cfg.constraints ? "on" : "off");
  fmt::print(log, "wall thickness mm: mean {:.3f} max {:.3f} min {:.3f} stdev {:.3f} ({} samples, {} gaps)\n",
             r.wall.mean_mm, r.wall.max_mm, r.wall.min_mm, r.wall.stdev_mm, r.wall.samples,
             r.wall.gap_count);
  fmt::print(log, "corner over-deposit mm^2: {:.3f} (total {:.3f})\n",
             fmt::join(r.corner_over_deposit_mm2, " "), total);
  fmt::print(log, "ATE mm: rms {:.3f} median {:.3f} max {:.3f}\n", r.ate.rms_mm, r.ate.median_mm, r.ate.max_mm);
  return r;
}

DuoResult duo(const Scenario& s, const Options& opts, std::ostream& log) {
  if (s.robots != 2) throw Error(ErrorCode::kConfig, "duo needs a scenario with robots = 2");
  const ModelFile model = load_checked_model(s, opts);
  const ControllerConfig cfg = controller_of(s, opts);

  const auto [upper, lower] = sword_halves(s.scale);
  ArmState arm_a = s.arm, arm_b = s.arm;
  arm_a.joint_angle = s.joint_a;
  arm_b.joint_angle = s.joint_b;
  const PrintPlan plan_a = plan_print(upper, CornerStrategy::kCompensate, arm_a, s.timing);
  const PrintPlan plan_b = plan_print(lower, CornerStrategy::kCompensate, arm_b, s.timing);

  RobotSpec a = robot_of(s, plan_a.trajectory, arm_a, CornerStrategy::kCompensate, true);
  a.name = s.name + "-a";
  RobotSpec b = robot_of(s, plan_b.trajectory, arm_b, CornerStrategy::kCompensate, true);
  b.name = s.name + "-b";
  b.pattern = pattern_of(s, s.color_b, s.pattern_seed_b, 100000);

  const double duration =
      s.duration.value_or(std::max(plan_a.trajectory.end_time(), plan_b.trajectory.end_time()));
  DuoResult r;
  r.logs = run_lockstep(s.camera, interaction_of(model), {a, b}, cfg, duration, run_seed(s, opts));
  for (const auto& l : r.logs) {
    if (l.size() < 2) throw Error(ErrorCode::kEmptyTrajectory, "empty trajectory");
    r.ribbons.push_back(deposit(nozzle_trace(l), s.bead_width));
    for (const auto& rec : l.records) r.cross_matches += rec.foreign_matches;
  }
  r.junctions = {upper.points.front(), upper.points.back()};
  r.gaps = junction_gap(r.ribbons[0], r.ribbons[1], r.junctions);
  const Polyline* halves[2] = {&upper, &lower};
  for (std::size_t i = 0; i < 2; ++i) {
    const Vec2 end = halves[i]->points.back();
    r.complete.push_back((r.logs[i].records.back().nozzle - end).norm() < s.bead_width);
  }

  ensure_dir(opts.out);
  ReportBundle bundle;
  const char* tags[2] = {"a", "b"};
  const PrintPlan* plans[2] = {&plan_a, &plan_b};
  for (std::size_t i = 0; i < 2; ++i) {
    write_trace(r.logs[i], opts.out / fmt::format("trace_{}.csv", tags[i]));
    write_text_file(opts.out / fmt::format("ribbon_{}.csv", tags[i]), ribbon_csv(r.ribbons[i]));
    write_text_file(opts.out / fmt::format("trajectory_{}.csv", tags[i]), trajectory_csv(plans[i]->trajectory));
    const auto times = log_times(r.logs[i]);
    MetricsRow row;
    row.run_id = r.logs[i].name;
    row.constraints = cfg.constraints;
    row.ate = ate(reference_nozzle_path(plans[i]->trajectory, CornerStrategy::kCompensate,
                                        plans[i]->arm, times),
                  nozzle_series(r.logs[i]));
    const WallStats wall = wall_thickness_stats(r.ribbons[i], plans[i]->reference, s.sampling);
    if (wall.samples > 0) {
      row.wall_mean_mm = wall.mean_mm;
      row.wall_stdev_mm = wall.stdev_mm;
    }
    row.gap_count = wall.gap_count;
    bundle.metrics.push_back(row);
    bundle.logs.push_back(r.logs[i]);
    bundle.references.push_back(*halves[i]);
    bundle.ribbons.push_back(r.ribbons[i]);
    bundle.speeds.push_back({r.logs[i].name + " commanded", times, commanded_speed(r.logs[i])});
  }
  bundle.markers = r.junctions;
  std::string junctions = "junction,x_m,y_m,gap_mm\n";
  for (std::size_t i = 0; i < r.junctions.size(); ++i) {
    junctions += fmt::format("{},{},{},{:.6f}\n", i, r.junctions[i].x(), r.junctions[i].y(), r.gaps.gaps_mm[i]);
  }
  write_text_file(opts.out / "junctions.csv", junctions);
  render_report(bundle, opts.out);

  fmt::print(log, "junction gaps mm: {:.3f} (bead width {:.3f} mm)\n", fmt::join(r.gaps.gaps_mm, " "),
             1e3 * s.bead_width);
  fmt::print(log, "cross-robot measurement matches: {}\n", r.cross_matches);
  fmt::print(log, "halves complete: {} {}\n", r.complete[0] ? "yes" : "no", r.complete[1] ? "yes" : "no");
  return r;
}

EvalResult eval(const Scenario& s, const Options& opts, std::ostream& log, int pixels) {
  const ModelFile model = load_checked_model(s, opts);
  if (model.hull.vertices.size() < 3) throw Error(ErrorCode::kCorruptModel, "model has no coverage hull");
  Vec2 lo = model.hull.vertices.front(), hi = lo;
  for (const Vec2& v : model.hull.vertices) {
    lo = lo.cwiseMin(v);
    hi = hi.cwiseMax(v);
  }
  std::mt19937_64 rng(mix_seed(run_seed(s, opts), 77));
  std::uniform_real_distribution<double> ux(lo.x(), hi.x()), uy(lo.y(), hi.y());
  EvalResult r;
  while (static_cast<int>(r.pixels.size()) < pixels) {
    const Vec2 u(ux(rng), uy(rng));
    if (!model.hull.contains(u)) continue;
    const Mat2 truth = analytic_interaction(s.camera, u);
    const Mat2 learned = model.net(u);
    r.pixels.push_back(u);
    r.relative_error.push_back((learned - truth).norm() / truth.norm());
  }
  std::vector<double> sorted = r.relative_error;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  r.median = sorted.size() % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);

  ensure_dir(opts.out);
  std::string csv = "u_x,u_y,rel_frobenius\n";
  for (std::size_t i = 0; i < r.pixels.size(); ++i) {
    csv += fmt::format("{},{},{}\n", r.pixels[i].x(), r.pixels[i].y(), r.relative_error[i]);
  }
  write_text_file(opts.out / "eval.csv", csv);
  fmt::print(log, "median relative Frobenius error over {} hull pixels: {:.4f}\n", r.pixels.size(), r.median);
  return r;
}

int run_command(const std::string& command, const Options& opts, std::ostream& out,
                std::ostream& err) {
  Scenario s;
  try {
    s = load_scenario(opts.scenario);
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return 2;
  }
  try {
    if (command == "calibrate") calibrate(s, opts, out);
    else if (command == "follow") follow(s, opts, out);
    else if (command == "print") print(s, opts, out);
    else if (command == "duo") duo(s, opts, out);
    else if (command == "eval") eval(s, opts, out);
    else {
      fmt::print(err, "error: unknown command '{}'\n", command);
      return 2;
    }
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    const bool usage = e.code() == ErrorCode::kConfig || e.code() == ErrorCode::kInvalidInput;
    return usage ? 2 : 1;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}

}  // namespace lbvs::app

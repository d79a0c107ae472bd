// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
// when any criterion fails; the lines are also written to <scratch-dir>/summary.txt.
// Usage: lbvs_acceptance <scratch-dir>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "gradcheck.hpp"
#include "lbvs/error.hpp"
#include "lbvs/runner.hpp"
#include "lbvs_app/commands.hpp"
#include "lbvs_app/scenario.hpp"

using namespace lbvs;
using namespace lbvs::app;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = LBVS_SCENARIO_DIR;

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;
std::ofstream summary;

void report(int id, const std::string& name, const std::function<Verdict()>& check) {
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("error: ") + e.what()};
  }
  if (!v.pass) ++failures;
  const std::string line = fmt::format("{} {:>2} {}: {}\n", v.pass ? "PASS" : "FAIL", id, name, v.detail);
  fmt::print("{}", line);
  std::fflush(stdout);
  summary << line << std::flush;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Options options(const fs::path& scenario, const fs::path& out, const fs::path& model) {
  Options o;
  o.scenario = scenario;
  o.out = out;
  o.model = model;
  return o;
}

bool within_caps(const TraceLog& log, double v_max, double omega_max, int& bad) {
  for (const auto& r : log.records) {
    if (std::abs(r.cmd.v) > v_max || std::abs(r.cmd.omega) > omega_max) ++bad;
  }
  return bad == 0;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

// Byte-compares every file under a and b; returns the names that differ.
std::vector<std::string> differing_files(const fs::path& a, const fs::path& b) {
  std::vector<std::string> out;
  std::size_t count = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    ++count;
    const fs::path other = b / e.path().filename();
    if (!fs::exists(other) || slurp(e.path()) != slurp(other)) out.push_back(e.path().filename().string());
  }
  for (const auto& e : fs::directory_iterator(b)) {
    if (e.is_regular_file() && !fs::exists(a / e.path().filename())) {
      out.push_back(e.path().filename().string());
    }
  }
  if (count == 0) out.push_back("(no files)");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::path("acceptance_out");
  fs::remove_all(root);
  fs::create_directories(root);
  summary.open(root / "summary.txt");
  std::ostringstream sink;
  const fs::path model = root / "desk" / "model.bin";

  // Calibration and model quality.
  report(1, "learned interaction vs analytic", [&] {
    std::string detail;
    bool pass = true;
    const std::pair<const char*, double> runs[] = {{"desk_calibrate", 0.05}, {"desk_calibrate_noisy", 0.10}};
    for (const auto& [name, limit] : runs) {
      const auto t0 = std::chrono::steady_clock::now();
      const Scenario s = load_scenario(kScenarios / (std::string(name) + ".ini"));
      const fs::path out = std::string(name) == "desk_calibrate" ? root / "desk" : root / name;
      const Options o = options(s.source, out, out / "model.bin");
      calibrate(s, o, sink);
      const EvalResult e = eval(s, o, sink, 1000);
      const double secs = seconds_since(t0);
      const bool ok = e.median <= limit && secs <= 300.0 && s.calib_dots == 200 &&
                      s.calib_frames == 600 && e.pixels.size() == 1000;
      pass = pass && ok;
      detail += fmt::format("{}: noise {} px, median {:.4f} (limit {:.2f}), {:.0f} s; ", name,
                            s.camera.pixel_noise_sigma, e.median, limit, secs);
    }
    return Verdict{pass, detail};
  });

  report(2, "gradient check", [&] {
    const InteractionNet net = InteractionNet::random(17, 0.3);
    const auto batch = test::synthetic_batch(64, 9, 0.1);
    const test::GradCheck g = test::gradient_check(net, batch, 0.1, 1200, 4);
    return Verdict{g.checked >= 1000 && g.worst_relative <= 1e-4,
                   fmt::format("{} parameters, worst relative error {:.2e} ({} kink-crossing probes replaced)",
                               g.checked, g.worst_relative, g.skipped)};
  });

  const Scenario rect = load_scenario(kScenarios / "rectangle.ini");
  std::optional<FollowResult> rect_on, rect_off;
  report(3, "rectangle ATE, constrained vs unconstrained", [&] {
    const auto t0 = std::chrono::steady_clock::now();
    Options on = options(rect.source, root / "rect_on", model);
    on.constraints = true;
    Options off = options(rect.source, root / "rect_off", model);
    off.constraints = false;
    rect_on = follow(rect, on, sink);
    rect_off = follow(rect, off, sink);
    const double secs = seconds_since(t0);
    const AteStats& a = rect_on->ate;
    const AteStats& b = rect_off->ate;
    return Verdict{a.rms_mm < b.rms_mm && a.max_mm < b.max_mm && a.rms_mm <= 5.0 && secs <= 120.0,
                   fmt::format("on rms {:.2f} max {:.2f} mm, off rms {:.2f} max {:.2f} mm, {:.1f} s",
                               a.rms_mm, a.max_mm, b.rms_mm, b.max_mm, secs)};
  });

  report(4, "oracle convergence on a static pattern", [&] {
    const CameraModel cam = CameraModel::desk_default();
    const InteractionFn oracle = [cam](const Vec2& u) { return analytic_interaction(cam, u); };
    ControllerConfig cfg;
    RobotSpec robot;
    robot.pattern = DotPattern::random(80, 11, 0.04, 0.34, -0.1, 0.1);
    robot.trajectory.knots.push_back({0.0, Pose2()});
    TargetPattern target;
    for (const Dot& d : robot.pattern.dots) {
      const auto p = try_project(cam, d.position);
      if (p && cam.bounds.contains(*p)) target.desired.push_back({d.id, *p});
    }
    // Starts are the end of one constant-twist arc from the station, short
    // enough that the first commands stay below the speed cap.
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    int converged = 0, worst_ticks = 0;
    const std::vector<DotPattern> world{robot.pattern};
    for (int i = 0; i < 20; ++i) {
      const double arc_v = 0.02 * unit(rng);
      const double arc_w = 0.1 * unit(rng);
      robot.start = step_unicycle(Pose2(), {arc_v, arc_w}, 1.0);
      FollowRunner run(cam, oracle, robot, cfg, 1);
      double prev = std::numeric_limits<double>::infinity();
      for (int k = 0; k < 2000; ++k) {
        const TraceRecord& rec = run.tick(world, 0);
        const double norm = stack_errors(observe(rec.pose, cam, robot.pattern, 1, k, 0.0), target).stacked.norm();
        if (!(norm < prev)) break;
        if (norm < 1.0) {
          ++converged;
          worst_ticks = std::max(worst_ticks, k);
          break;
        }
        prev = norm;
      }
    }
    return Verdict{converged == 20, fmt::format("{}/20 starts strictly decreasing to < 1 px (slowest {} ticks)",
                                                converged, worst_ticks)};
  });

  // Cuboid print runs shared by several criteria.
  const Scenario cuboid = load_scenario(kScenarios / "cuboid.ini");
  std::map<std::string, PrintResult> prints;
  const auto cuboid_run = [&](bool constraints, CornerStrategy corner) -> const PrintResult& {
    const std::string key = fmt::format("cuboid_{}_{}", constraints ? "on" : "off",
                                        corner == CornerStrategy::kFixed ? "fixed" : "compensate");
    if (!prints.count(key)) {
      Options o = options(cuboid.source, root / key, model);
      o.constraints = constraints;
      o.corner = corner;
      prints.emplace(key, print(cuboid, o, sink));
    }
    return prints.at(key);
  };
  const Scenario sword = load_scenario(kScenarios / "sword_duo.ini");
  std::optional<DuoResult> duo_run;
  const auto duo_once = [&]() -> const DuoResult& {
    if (!duo_run) duo_run = duo(sword, options(sword.source, root / "duo", model), sink);
    return *duo_run;
  };

  report(5, "command saturation in every shipped scenario", [&] {
    int bad = 0, commands = 0, scenarios = 0;
    std::vector<std::string> unknown;
    const auto check = [&](const TraceLog& log, const ControllerConfig& c) {
      commands += static_cast<int>(log.size());
      within_caps(log, 0.025, 0.05, bad);
      if (c.v_max > 0.025 || c.omega_max > 0.05) ++bad;
    };
    for (const auto& entry : fs::directory_iterator(kScenarios)) {
      if (entry.path().extension() != ".ini") continue;
      const Scenario s = load_scenario(entry.path());
      const std::string stem = entry.path().stem().string();
      const Options o = options(s.source, root / ("sat_" + stem), model);
      ++scenarios;
      if (stem.rfind("desk_calibrate", 0) == 0) {
        const auto schedule = CalibrationSchedule::straight_then_spin(
            s.calib_frames, s.calib_frame_dt, s.calib_v_max, s.calib_omega_max, s.calib_seed);
        for (const auto& c : schedule.commands) {
          ++commands;
          if (std::abs(c.v) > 0.025 || std::abs(c.omega) > 0.05) ++bad;
        }
      } else if (s.robots == 2) {
        for (const auto& log : duo_once().logs) check(log, s.controller);
      } else if (stem == "cuboid") {
        for (CornerStrategy c : {CornerStrategy::kCompensate, CornerStrategy::kFixed}) {
          check(cuboid_run(s.controller.constraints, c).log, s.controller);
        }
      } else if (stem == "rectangle" || stem == "static" || stem == "line") {
        check(follow(s, o, sink).log, s.controller);
      } else {
        unknown.push_back(stem);
      }
    }
    return Verdict{bad == 0 && unknown.empty() && commands > 0,
                   fmt::format("{} scenarios, {} commands, {} outside |v| <= 0.025, |w| <= 0.05{}", scenarios,
                               commands, bad, unknown.empty() ? "" : "; unclassified scenario files")};
  });

  report(6, "rectangle velocity lag", [&] {
    if (!rect_on) return Verdict{false, "rectangle run missing"};
    if (!rect_on->lag_ticks) return Verdict{false, "lag undefined"};
    const int lag = *rect_on->lag_ticks;
    return Verdict{lag >= 1 && lag <= 10, fmt::format("{} ticks", lag)};
  });

  report(7, "corner compensation", [&] {
    Pose2 chassis(0.1, -0.05, 0.3);
    ArmState arm{-1.5707963267948966, 0.03, 1.0};
    const Vec2 start = nozzle_position(chassis, arm);
    const double dt = 0.01, omega = 0.05;
    double drift = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const JointRate j = compensate_rotation(omega, arm.joint_rate_max);
      chassis = step_unicycle(chassis, {0.0, omega}, dt);
      arm.joint_angle += j.rate * dt;
      drift = std::max(drift, (nozzle_position(chassis, arm) - start).norm());
    }
    const auto total = [](const PrintResult& r) {
      double a = 0.0;
      for (double x : r.corner_over_deposit_mm2) a += x;
      return a;
    };
    const double comp = total(cuboid_run(true, CornerStrategy::kCompensate));
    const double fixed = total(cuboid_run(true, CornerStrategy::kFixed));
    return Verdict{drift < 1e-9 && comp < fixed,
                   fmt::format("pivot drift {:.2e} m over 10 s; over-deposit compensate {:.2f} vs fixed {:.2f} mm^2",
                               drift, comp, fixed)};
  });

  report(8, "cuboid wall thickness spread", [&] {
    const WallStats& on = cuboid_run(true, cuboid.corner).wall;
    const WallStats& off = cuboid_run(false, cuboid.corner).wall;
    return Verdict{on.samples > 0 && on.stdev_mm < off.stdev_mm,
                   fmt::format("stdev on {:.3f} mm ({} gaps), off {:.3f} mm ({} gaps)", on.stdev_mm,
                               on.gap_count, off.stdev_mm, off.gap_count)};
  });

  report(9, "duo sword junctions", [&] {
    const DuoResult& r = duo_once();
    const double bead_mm = 1e3 * sword.bead_width;
    bool pass = r.gaps.gaps_mm.size() == 2 && r.cross_matches == 0;
    for (double g : r.gaps.gaps_mm) pass = pass && g < bead_mm;
    for (bool c : r.complete) pass = pass && c;
    return Verdict{pass, fmt::format("gaps {:.3f} mm (bead {:.1f} mm), {} cross matches, halves complete {}/{}",
                                     fmt::join(r.gaps.gaps_mm, " "), bead_mm, r.cross_matches,
                                     std::count(r.complete.begin(), r.complete.end(), true),
                                     r.complete.size())};
  });

  report(10, "determinism", [&] {
    std::vector<std::string> diffs;
    const fs::path tiny = root / "tiny.ini";
    std::ofstream(tiny) << "[scenario]\nname = tiny\n[camera]\nnoise_sigma = 0.5\ndropout = 0.05\n"
                           "[calibration]\nframes = 60\n[train]\nepochs = 3\n";
    const Scenario tiny_s = load_scenario(tiny);
    const fs::path line = kScenarios / "line.ini";
    const Scenario line_s = load_scenario(line);
    int compared = 0;
    for (const char* rep : {"a", "b"}) {
      const fs::path base = root / "det" / rep;
      calibrate(tiny_s, options(tiny, base / "calibrate", base / "calibrate" / "model.bin"), sink);
      follow(rect, options(rect.source, base / "follow", model), sink);
      follow(line_s, options(line, base / "line", model), sink);
      Options p = options(cuboid.source, base / "print", model);
      p.corner = CornerStrategy::kFixed;
      print(cuboid, p, sink);
      duo(sword, options(sword.source, base / "duo", model), sink);
    }
    for (const char* sub : {"calibrate", "follow", "line", "print", "duo"}) {
      for (const auto& e : fs::directory_iterator(root / "det" / "a" / sub)) compared += e.is_regular_file();
      for (const auto& d : differing_files(root / "det" / "a" / sub, root / "det" / "b" / sub)) {
        diffs.push_back(std::string(sub) + "/" + d);
      }
    }
    return Verdict{diffs.empty() && compared > 0,
                   diffs.empty() ? fmt::format("{} files byte-identical across two runs", compared)
                                 : fmt::format("differs: {}", fmt::join(diffs, ", "))};
  });

  return failures == 0 ? 0 : 1;
}

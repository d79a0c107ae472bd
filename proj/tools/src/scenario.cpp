#include "lbvs_app/scenario.hpp"

#include <map>
#include <set>
#include <sstream>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "lbvs/error.hpp"

namespace lbvs::app {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"scenario", {"name", "robots"}},
    {"camera",
     {"preset", "homography", "noise_sigma", "width", "height", "dropout", "rotation_dropout",
      "rotation_dropout_threshold"}},
    {"calibration",
     {"dots", "pattern_seed", "x_min", "x_max", "y_min", "y_max", "frames", "frame_dt", "seed",
      "v_max", "omega_max"}},
    {"train",
     {"learning_rate", "epochs", "batch_size", "seed", "optimizer", "momentum", "holdout",
      "target_loss", "outlier_factor", "init_range"}},
    {"pattern", {"count", "seed", "x_min", "x_max", "y_min", "y_max", "file", "color"}},
    {"controller",
     {"v_max", "omega_max", "min_points_full", "min_points_rotation", "lambda_far", "lambda_near",
      "switch_threshold_px", "dt", "hold_decay", "target_mode", "constraints"}},
    {"trajectory",
     {"shape", "width", "height", "scale", "file", "speed", "turn_rate", "passes", "pass_offset",
      "corner_dwell", "settle"}},
    {"printhead",
     {"corner", "radius", "joint_angle", "joint_rate_max", "bead_width", "sample_spacing",
      "search_half_width", "corner_margin", "corner_window"}},
    {"run", {"seed", "duration", "start_dx", "start_dy", "start_dtheta"}},
    {"duo", {"color_b", "pattern_seed_b", "joint_a", "joint_b"}},
};

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::kConfig, what); }

class Section {
 public:
  Section(const pt::ptree& root, const std::string& name) : name_(name) {
    if (auto child = root.get_child_optional(name)) tree_ = &*child;
  }

  template <typename T>
  void read(const char* key, T& target) const {
    if (!tree_) return;
    auto raw = tree_->get_optional<std::string>(key);
    if (!raw) return;
    try {
      target = tree_->get<T>(key);
    } catch (const pt::ptree_error&) {
      bad("[" + name_ + "] " + key + ": invalid value '" + *raw + "'");
    }
  }

  std::optional<std::string> text(const char* key) const {
    if (!tree_) return std::nullopt;
    const auto value = tree_->get_optional<std::string>(key);
    if (!value) return std::nullopt;
    return *value;
  }

 private:
  std::string name_;
  const pt::ptree* tree_ = nullptr;
};

bool parse_switch(const std::string& value, const std::string& key) {
  if (value == "on" || value == "true" || value == "1") return true;
  if (value == "off" || value == "false" || value == "0") return false;
  bad(key + ": expected on or off, got '" + value + "'");
}

}  // namespace

Scenario load_scenario(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw Error(ErrorCode::kIo, "scenario not found: " + path.string());
  }
  pt::ptree root;
  try {
    pt::read_ini(path.string(), root);
  } catch (const pt::ini_parser_error& e) {
    bad("scenario " + path.string() + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  for (const auto& [section, tree] : root) {
    const auto known = kKnownKeys.find(section);
    if (known == kKnownKeys.end()) bad("unknown scenario section [" + section + "]");
    for (const auto& [key, value] : tree) {
      if (!known->second.count(key)) bad("unknown key '" + key + "' in [" + section + "]");
    }
  }

  Scenario s;
  s.source = path;
  const auto base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path file(p);
    return file.is_absolute() ? file : base / file;
  };

  Section sc(root, "scenario");
  sc.read("name", s.name);
  sc.read("robots", s.robots);
  if (s.robots != 1 && s.robots != 2) bad("[scenario] robots must be 1 or 2");

  Section cam(root, "camera");
  if (auto preset = cam.text("preset"); preset && *preset != "desk") {
    bad("[camera] unknown preset '" + *preset + "'");
  }
  if (auto h = cam.text("homography")) {
    std::istringstream in(*h);
    std::vector<double> v;
    double x;
    while (in >> x) v.push_back(x);
    if (v.size() != 9 || !in.eof()) bad("[camera] homography needs 9 numbers, row-major");
    for (int i = 0; i < 9; ++i) s.camera.homography(i / 3, i % 3) = v[i];
  }
  cam.read("noise_sigma", s.camera.pixel_noise_sigma);
  cam.read("width", s.camera.bounds.width);
  cam.read("height", s.camera.bounds.height);
  cam.read("dropout", s.camera.dropout_rate);
  cam.read("rotation_dropout", s.camera.rotation_dropout_rate);
  cam.read("rotation_dropout_threshold", s.camera.rotation_dropout_threshold);
  try {
    s.camera.validate();
  } catch (const Error& e) {
    bad(std::string("[camera] ") + e.what());
  }

  Section cal(root, "calibration");
  cal.read("dots", s.calib_dots);
  cal.read("pattern_seed", s.calib_pattern_seed);
  cal.read("x_min", s.calib_box.x_min);
  cal.read("x_max", s.calib_box.x_max);
  cal.read("y_min", s.calib_box.y_min);
  cal.read("y_max", s.calib_box.y_max);
  cal.read("frames", s.calib_frames);
  cal.read("frame_dt", s.calib_frame_dt);
  cal.read("seed", s.calib_seed);
  cal.read("v_max", s.calib_v_max);
  cal.read("omega_max", s.calib_omega_max);
  if (s.calib_dots < 1 || s.calib_frames < 2 || !(s.calib_frame_dt > 0.0)) {
    bad("[calibration] needs dots >= 1, frames >= 2 and frame_dt > 0");
  }

  Section tr(root, "train");
  tr.read("learning_rate", s.train.learning_rate);
  tr.read("epochs", s.train.epochs);
  tr.read("batch_size", s.train.batch_size);
  tr.read("seed", s.train.seed);
  tr.read("momentum", s.train.momentum);
  tr.read("holdout", s.train.holdout_fraction);
  tr.read("target_loss", s.train.target_loss);
  tr.read("outlier_factor", s.train.outlier_factor);
  tr.read("init_range", s.train.init_range);
  if (auto opt = tr.text("optimizer")) {
    if (*opt == "sgd") s.train.optimizer = Optimizer::kSgd;
    else if (*opt == "momentum") s.train.optimizer = Optimizer::kMomentum;
    else if (*opt == "adam") s.train.optimizer = Optimizer::kAdam;
    else bad("[train] optimizer must be sgd, momentum or adam");
  }
  try {
    s.train.validate();
  } catch (const Error& e) {
    bad(std::string("[train] ") + e.what());
  }

  Section pat(root, "pattern");
  pat.read("count", s.pattern_count);
  pat.read("seed", s.pattern_seed);
  pat.read("x_min", s.pattern_box.x_min);
  pat.read("x_max", s.pattern_box.x_max);
  pat.read("y_min", s.pattern_box.y_min);
  pat.read("y_max", s.pattern_box.y_max);
  pat.read("color", s.color);
  if (auto f = pat.text("file")) s.pattern_file = resolve(*f);

  Section ctl(root, "controller");
  auto& c = s.controller;
  ctl.read("v_max", c.v_max);
  ctl.read("omega_max", c.omega_max);
  ctl.read("min_points_full", c.min_points_full);
  ctl.read("min_points_rotation", c.min_points_rotation);
  ctl.read("lambda_far", c.gains.lambda_far);
  ctl.read("lambda_near", c.gains.lambda_near);
  ctl.read("switch_threshold_px", c.gains.switch_threshold_px);
  ctl.read("dt", c.dt);
  ctl.read("hold_decay", c.hold_decay);
  if (auto mode = ctl.text("target_mode")) {
    if (*mode == "station") c.target_mode = TargetMode::kStation;
    else if (*mode == "flow") c.target_mode = TargetMode::kFlow;
    else bad("[controller] target_mode must be station or flow");
  }
  if (auto on = ctl.text("constraints")) c.constraints = parse_switch(*on, "[controller] constraints");
  try {
    c.validate();
  } catch (const Error& e) {
    bad(std::string("[controller] ") + e.what());
  }

  Section traj(root, "trajectory");
  traj.read("shape", s.shape);
  traj.read("width", s.width);
  traj.read("height", s.height);
  traj.read("scale", s.scale);
  traj.read("speed", s.timing.speed);
  traj.read("turn_rate", s.timing.turn_rate);
  traj.read("passes", s.timing.passes);
  traj.read("pass_offset", s.timing.pass_offset);
  traj.read("corner_dwell", s.timing.corner_dwell);
  traj.read("settle", s.timing.settle);
  if (auto f = traj.text("file")) s.trajectory_file = resolve(*f);
  if (s.shape != "rectangle" && s.shape != "static" && s.shape != "sword" && s.shape != "file") {
    bad("[trajectory] shape must be rectangle, static, sword or file");
  }
  if (s.shape == "file" && !s.trajectory_file) bad("[trajectory] shape = file needs file =");
  if (s.trajectory_file && !std::filesystem::is_regular_file(*s.trajectory_file)) {
    bad("[trajectory] file not found: " + s.trajectory_file->string());
  }
  if (s.pattern_file && !std::filesystem::is_regular_file(*s.pattern_file)) {
    bad("[pattern] file not found: " + s.pattern_file->string());
  }
  try {
    s.timing.validate();
  } catch (const Error& e) {
    bad(std::string("[trajectory] ") + e.what());
  }

  Section ph(root, "printhead");
  if (auto corner = ph.text("corner")) {
    if (*corner == "compensate") s.corner = CornerStrategy::kCompensate;
    else if (*corner == "fixed") s.corner = CornerStrategy::kFixed;
    else bad("[printhead] corner must be fixed or compensate");
  }
  ph.read("radius", s.arm.radius);
  ph.read("joint_angle", s.arm.joint_angle);
  ph.read("joint_rate_max", s.arm.joint_rate_max);
  ph.read("bead_width", s.bead_width);
  ph.read("sample_spacing", s.sampling.spacing);
  ph.read("search_half_width", s.sampling.search_half_width);
  ph.read("corner_margin", s.sampling.corner_margin);
  ph.read("corner_window", s.corner_window);
  if (!(s.arm.radius > 0.0) || !(s.arm.joint_rate_max > 0.0) || !(s.bead_width > 0.0)) {
    bad("[printhead] radius, joint_rate_max and bead_width must be positive");
  }

  Section run(root, "run");
  run.read("seed", s.seed);
  double d = 0.0;
  if (run.text("duration")) {
    run.read("duration", d);
    s.duration = d;
  }
  double dx = 0.0, dy = 0.0, dtheta = 0.0;
  run.read("start_dx", dx);
  run.read("start_dy", dy);
  run.read("start_dtheta", dtheta);
  s.start_offset = Pose2(dx, dy, dtheta);

  Section duo(root, "duo");
  duo.read("color_b", s.color_b);
  duo.read("pattern_seed_b", s.pattern_seed_b);
  duo.read("joint_a", s.joint_a);
  duo.read("joint_b", s.joint_b);
  return s;
}

}  // namespace lbvs::app

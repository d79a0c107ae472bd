#include "lbvs/sim.hpp"

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <set>
#include <string>

#include <Eigen/Geometry>
#include <Eigen/LU>

#include "lbvs/error.hpp"

namespace lbvs {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid input";
    case ErrorCode::kPointAtHorizon: return "point at horizon";
    case ErrorCode::kEmptyDataset: return "empty dataset";
    case ErrorCode::kTrainingDiverged: return "training diverged";
    case ErrorCode::kCorruptModel: return "corrupt model";
    case ErrorCode::kDegenerateGeometry: return "degenerate geometry";
    case ErrorCode::kEmptyTrajectory: return "empty trajectory";
    case ErrorCode::kUndefinedLag: return "undefined lag";
    case ErrorCode::kNoOverlap: return "no overlap";
    case ErrorCode::kConfig: return "config error";
    case ErrorCode::kIo: return "i/o error";
  }
  return "unknown";
}

double wrap_angle(double angle) {
  constexpr double kPi = std::numbers::pi;
  double a = std::remainder(angle, 2.0 * kPi);  // [-pi, pi]
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

Pose2::Pose2(double x_m, double y_m, double theta_rad)
    : x(x_m), y(y_m), theta(wrap_angle(theta_rad)) {}

Pose2 Pose2::compose(const Pose2& other) const {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {x + c * other.x - s * other.y, y + s * other.x + c * other.y,
          theta + other.theta};
}

Pose2 Pose2::inverse() const {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return {-c * x - s * y, s * x - c * y, -theta};
}

namespace {

// sin(x)/x, accurate near zero.
double sinc(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

}  // namespace

Pose2 step_unicycle(const Pose2& pose, const ControlCommand& cmd, double dt) {
  if (!std::isfinite(cmd.v) || !std::isfinite(cmd.omega) || !std::isfinite(dt) ||
      !std::isfinite(pose.x) || !std::isfinite(pose.y) || !std::isfinite(pose.theta)) {
    throw Error(ErrorCode::kInvalidInput, "step_unicycle: non-finite input");
  }
  if (dt <= 0.0) throw Error(ErrorCode::kInvalidInput, "step_unicycle: dt must be positive");

  // Chord of the arc: length v*dt*sinc(w*dt/2) along the mid-heading. Reduces
  // to the straight line for omega = 0 without a branch.
  const double half_turn = 0.5 * cmd.omega * dt;
  const double chord = cmd.v * dt * sinc(half_turn);
  const double mid = pose.theta + half_turn;
  return {pose.x + chord * std::cos(mid), pose.y + chord * std::sin(mid),
          pose.theta + cmd.omega * dt};
}

Vec2 world_to_robot(const Pose2& pose, const Vec2& world_point) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  const double dx = world_point.x() - pose.x;
  const double dy = world_point.y() - pose.y;
  return {c * dx + s * dy, -s * dx + c * dy};
}

Vec2 robot_to_world(const Pose2& pose, const Vec2& robot_point) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  return {pose.x + c * robot_point.x() - s * robot_point.y(),
          pose.y + s * robot_point.x() + c * robot_point.y()};
}

CameraModel CameraModel::desk_default() {
  // Virtual pinhole: f = 500 px, principal point (320, 240), 0.25 m above the
  // chassis origin, pitched 60 degrees down, looking along +x. Only the
  // resulting homography is kept.
  constexpr double f = 500.0, cx = 320.0, cy = 240.0, height = 0.25;
  const double pitch = 60.0 * std::numbers::pi / 180.0;
  const Eigen::Vector3d z_axis(std::cos(pitch), 0.0, -std::sin(pitch));
  const Eigen::Vector3d x_axis(0.0, -1.0, 0.0);
  const Eigen::Vector3d y_axis = z_axis.cross(x_axis);
  Mat3 rotation;
  rotation.row(0) = x_axis.transpose();
  rotation.row(1) = y_axis.transpose();
  rotation.row(2) = z_axis.transpose();
  Mat3 intrinsics;
  intrinsics << f, 0.0, cx, 0.0, f, cy, 0.0, 0.0, 1.0;
  Mat3 extr;
  extr.col(0) = rotation.col(0);
  extr.col(1) = rotation.col(1);
  extr.col(2) = -rotation * Eigen::Vector3d(0.0, 0.0, height);

  CameraModel camera;
  camera.homography = intrinsics * extr;
  camera.homography /= camera.homography(2, 2);
  camera.bounds = {640.0, 480.0};
  return camera;
}

void CameraModel::validate() const {
  if (!homography.allFinite() || std::abs(homography.determinant()) <= 1e-9) {
    throw Error(ErrorCode::kInvalidInput, "camera homography is singular");
  }
  auto rate_ok = [](double r) { return std::isfinite(r) && r >= 0.0 && r <= 1.0; };
  if (!rate_ok(dropout_rate) || !rate_ok(rotation_dropout_rate)) {
    throw Error(ErrorCode::kInvalidInput, "dropout rates must lie in [0, 1]");
  }
  if (!(pixel_noise_sigma >= 0.0) || !std::isfinite(pixel_noise_sigma)) {
    throw Error(ErrorCode::kInvalidInput, "pixel noise sigma must be >= 0");
  }
  if (!(bounds.width > 0.0) || !(bounds.height > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "image bounds must be positive");
  }
}

double CameraModel::effective_dropout(double omega) const {
  if (std::abs(omega) > rotation_dropout_threshold) {
    return std::max(dropout_rate, rotation_dropout_rate);
  }
  return dropout_rate;
}

std::uint64_t CameraModel::fingerprint() const {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto feed = [&hash](double value) {
    unsigned char bytes[sizeof(double)];
    std::memcpy(bytes, &value, sizeof(double));
    for (unsigned char b : bytes) {
      hash ^= b;
      hash *= 0x100000001b3ULL;
    }
  };
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) feed(homography(r, c));
  }
  feed(bounds.width);
  feed(bounds.height);
  return hash;
}

namespace {

constexpr double kHorizonEps = 1e-9;

}  // namespace

std::optional<Vec2> try_project(const CameraModel& camera, const Vec2& robot_point) {
  const Eigen::Vector3d p = camera.homography * robot_point.homogeneous();
  if (!(p.z() > kHorizonEps)) return std::nullopt;
  return Vec2(p.x() / p.z(), p.y() / p.z());
}

Vec2 project(const CameraModel& camera, const Vec2& robot_point) {
  const Eigen::Vector3d p = camera.homography * robot_point.homogeneous();
  if (std::abs(p.z()) <= kHorizonEps) {
    throw Error(ErrorCode::kPointAtHorizon, "project: point maps to the horizon");
  }
  return {p.x() / p.z(), p.y() / p.z()};
}

Vec2 back_project(const CameraModel& camera, const Vec2& pixel) {
  const Eigen::Vector3d p = camera.homography.inverse() * pixel.homogeneous();
  if (std::abs(p.z()) <= kHorizonEps) {
    throw Error(ErrorCode::kPointAtHorizon, "back_project: pixel lies on the horizon");
  }
  return {p.x() / p.z(), p.y() / p.z()};
}

Mat2 homography_jacobian(const Mat3& homography, const Vec2& robot_point) {
  const Eigen::Vector3d p = homography * robot_point.homogeneous();
  if (std::abs(p.z()) <= kHorizonEps) {
    throw Error(ErrorCode::kPointAtHorizon, "homography_jacobian: point at horizon");
  }
  const double w = p.z();
  const double w2 = w * w;
  Mat2 jac;
  for (int c = 0; c < 2; ++c) {
    jac(0, c) = (homography(0, c) * w - p.x() * homography(2, c)) / w2;
    jac(1, c) = (homography(1, c) * w - p.y() * homography(2, c)) / w2;
  }
  return jac;
}

Mat2 analytic_interaction(const CameraModel& camera, const Vec2& pixel) {
  const Vec2 ground = back_project(camera, pixel);
  // Robot-frame velocity of a fixed ground point: [x_dot, y_dot] =
  // [[-1, y], [0, -x]] * [v, omega].
  Mat2 point_velocity;
  point_velocity << -1.0, ground.y(), 0.0, -ground.x();
  return homography_jacobian(camera.homography, ground) * point_velocity;
}

void DotPattern::validate() const {
  std::set<int> seen;
  for (const Dot& dot : dots) {
    if (!dot.position.allFinite()) {
      throw Error(ErrorCode::kInvalidInput,
                  "dot " + std::to_string(dot.id) + " has a non-finite position");
    }
    if (!seen.insert(dot.id).second) {
      throw Error(ErrorCode::kInvalidInput, "duplicate dot id " + std::to_string(dot.id));
    }
  }
}

DotPattern DotPattern::random(int count, std::uint64_t seed, double x_min, double x_max,
                              double y_min, double y_max, int first_id, int color_tag) {
  std::mt19937_64 rng(mix_seed(seed, 0x9a77e54ULL));
  std::uniform_real_distribution<double> ux(x_min, x_max);
  std::uniform_real_distribution<double> uy(y_min, y_max);
  DotPattern pattern;
  pattern.color_tag = color_tag;
  pattern.dots.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    const double x = ux(rng);
    const double y = uy(rng);
    pattern.dots.push_back({first_id + i, Vec2(x, y)});
  }
  return pattern;
}

DotPattern DotPattern::placed(const Pose2& placement) const {
  DotPattern out;
  out.color_tag = color_tag;
  out.dots.reserve(dots.size());
  for (const Dot& dot : dots) out.dots.push_back({dot.id, robot_to_world(placement, dot.position)});
  return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

MeasurementSet observe(const Pose2& pose, const CameraModel& camera,
                       const DotPattern& world_pattern, std::uint64_t seed,
                       std::int64_t frame_index, double omega) {
  std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(frame_index)));
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const double dropout = camera.effective_dropout(omega);

  MeasurementSet out;
  out.frame_index = frame_index;
  for (const Dot& dot : world_pattern.dots) {
    // Draw the same number of variates per dot so the stream stays aligned
    // with the dot index regardless of visibility.
    const double nx = noise(rng);
    const double ny = noise(rng);
    const double drop = coin(rng);

    const auto pixel = try_project(camera, world_to_robot(pose, dot.position));
    if (!pixel) continue;
    Vec2 u = *pixel;
    if (camera.pixel_noise_sigma > 0.0) u += camera.pixel_noise_sigma * Vec2(nx, ny);
    if (drop < dropout) continue;
    if (!camera.bounds.contains(u)) continue;
    out.items.push_back({dot.id, u});
  }
  return out;
}

}  // namespace lbvs

#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Core>

namespace lbvs {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

/// Planar chassis pose. The heading is kept wrapped to (-pi, pi].
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose2() = default;
  Pose2(double x_m, double y_m, double theta_rad);

  Vec2 position() const { return {x, y}; }

  /// this * other: other expressed in this frame, mapped to the parent frame.
  Pose2 compose(const Pose2& other) const;
  Pose2 inverse() const;
};

struct ControlCommand {
  double v = 0.0;      // m/s
  double omega = 0.0;  // rad/s
};

/// Exact constant-twist integration of the unicycle model.
Pose2 step_unicycle(const Pose2& pose, const ControlCommand& cmd, double dt);

Vec2 world_to_robot(const Pose2& pose, const Vec2& world_point);
Vec2 robot_to_world(const Pose2& pose, const Vec2& robot_point);

struct ImageBounds {
  double width = 640.0;
  double height = 480.0;

  bool contains(const Vec2& pixel) const {
    return pixel.x() >= 0.0 && pixel.y() >= 0.0 && pixel.x() <= width &&
           pixel.y() <= height;
  }
};

/// Robot-mounted camera looking at the ground. `homography` maps robot-frame
/// ground coordinates (meters, homogeneous) to pixels.
struct CameraModel {
  Mat3 homography = Mat3::Identity();
  double pixel_noise_sigma = 0.0;
  ImageBounds bounds;
  double dropout_rate = 0.0;
  // Feature loss while turning: above the threshold |omega| the dropout rate
  // is raised to `rotation_dropout_rate`.
  double rotation_dropout_rate = 0.0;
  double rotation_dropout_threshold = std::numeric_limits<double>::infinity();

  /// Perspective-tilt camera used by the desk-scale scenarios.
  static CameraModel desk_default();

  /// Throws kInvalidInput when the homography is singular or a rate is out of
  /// [0, 1].
  void validate() const;

  double effective_dropout(double omega) const;

  /// Stable 64-bit hash of the geometry (homography and bounds). Models record
  /// it so a scenario with a different camera can be refused.
  std::uint64_t fingerprint() const;
};

/// Noise-free projection. Throws kPointAtHorizon when |w| <= 1e-9.
Vec2 project(const CameraModel& camera, const Vec2& robot_point);

/// Projection that returns nothing for points at or behind the horizon.
std::optional<Vec2> try_project(const CameraModel& camera, const Vec2& robot_point);

/// Inverse homography. Throws kPointAtHorizon for pixels on the horizon line.
Vec2 back_project(const CameraModel& camera, const Vec2& pixel);

/// Jacobian of the dehomogenized homography at a robot-frame ground point.
Mat2 homography_jacobian(const Mat3& homography, const Vec2& robot_point);

/// Ground-truth interaction matrix: pixel velocity = L(u) * [v, omega].
Mat2 analytic_interaction(const CameraModel& camera, const Vec2& pixel);

struct Dot {
  int id = 0;
  Vec2 position = Vec2::Zero();
};

struct DotPattern {
  std::vector<Dot> dots;
  int color_tag = 0;

  /// Throws kInvalidInput on duplicate ids or non-finite positions.
  void validate() const;

  /// Uniform random dots in the box [x_min, x_max] x [y_min, y_max].
  static DotPattern random(int count, std::uint64_t seed, double x_min,
                           double x_max, double y_min, double y_max,
                           int first_id = 0, int color_tag = 0);

  /// The same dots rigidly placed by `placement` (pattern frame -> world).
  DotPattern placed(const Pose2& placement) const;
};

struct Measurement {
  int id = 0;
  Vec2 pixel = Vec2::Zero();
};

struct MeasurementSet {
  std::vector<Measurement> items;
  std::int64_t frame_index = 0;

  std::size_t size() const { return items.size(); }
};

/// Simulated feature measurements of a world-frame pattern. Deterministic in
/// (seed, frame_index). `omega` is the chassis yaw rate used for the
/// rotation-dependent dropout.
MeasurementSet observe(const Pose2& pose, const CameraModel& camera,
                       const DotPattern& world_pattern, std::uint64_t seed,
                       std::int64_t frame_index = 0, double omega = 0.0);

/// Splitmix-style mixing for deriving independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace lbvs

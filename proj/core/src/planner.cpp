#include "lbvs/planner.hpp"

#include <cmath>

#include "lbvs/error.hpp"

namespace lbvs {

namespace {

double heading_of(const Vec2& from, const Vec2& to) {
  const Vec2 d = to - from;
  return std::atan2(d.y(), d.x());
}

Vec2 left_normal(const Vec2& from, const Vec2& to) {
  const Vec2 d = (to - from).normalized();
  return {-d.y(), d.x()};
}

struct TourBuilder {
  PatternTrajectory traj;
  double t;

  void add(const Vec2& p, double theta) {
    traj.knots.push_back({t, Pose2(p.x(), p.y(), theta)});
  }
  void advance(double dt) { t += std::max(dt, 1e-6); }
};

}  // namespace

void PathTiming::validate() const {
  if (!(speed > 0.0) || !(turn_rate > 0.0)) {
    throw Error(ErrorCode::kConfig, "tour speed and turn rate must be positive");
  }
  if (passes < 1 || passes % 2 == 0) throw Error(ErrorCode::kConfig, "passes must be odd");
  if (!(settle >= 0.0) || !(corner_dwell >= 0.0)) {
    throw Error(ErrorCode::kConfig, "dwell and settle times must be non-negative");
  }
}

PatternTrajectory polygon_tour(const Polyline& path, const PathTiming& timing,
                               double start_time) {
  timing.validate();
  const std::size_t segments = path.segment_count();
  if (segments == 0) return {};

  TourBuilder b{{}, start_time};
  double theta = heading_of(path.segment_start(0), path.segment_end(0));
  for (std::size_t i = 0; i < segments; ++i) {
    const Vec2 a = path.segment_start(i);
    const Vec2 e = path.segment_end(i);
    const double len = (e - a).norm();
    if (len == 0.0) continue;
    const double heading = heading_of(a, e);
    if (b.traj.empty()) {
      b.add(a, heading);
    } else {
      const double turn = wrap_angle(heading - theta);
      if (std::abs(turn) > 1e-12) {
        if (timing.corner_dwell > 0.0) {
          b.advance(timing.corner_dwell);
          b.add(a, theta);
        }
        b.advance(std::abs(turn) / timing.turn_rate);
        b.add(a, heading);
        if (timing.corner_dwell > 0.0) {
          b.advance(timing.corner_dwell);
          b.add(a, heading);
        }
      }
    }
    theta = heading;

    const Vec2 n = left_normal(a, e);
    Vec2 at = a;
    for (int pass = 0; pass < timing.passes; ++pass) {
      const double shift = (pass - 0.5 * (timing.passes - 1)) * timing.pass_offset;
      const bool forward = pass % 2 == 0;
      const Vec2 from = (forward ? a : e) + shift * n;
      const Vec2 to = (forward ? e : a) + shift * n;
      if ((from - at).norm() > 1e-12) {
        b.advance((from - at).norm() / timing.speed);
        b.add(from, heading);
      }
      b.advance(len / timing.speed);
      b.add(to, heading);
      at = to;
    }
    if ((at - e).norm() > 1e-12) {
      b.advance((e - at).norm() / timing.speed);
      b.add(e, heading);
    }
  }
  if (timing.settle > 0.0 && !b.traj.empty()) {
    const Pose2 last = b.traj.knots.back().pose;
    b.advance(timing.settle);
    b.add(last.position(), last.theta);
  }
  return b.traj;
}

PrintPlan plan_print(const Polyline& wall, CornerStrategy corner, const ArmState& arm,
                     const PathTiming& timing) {
  if (wall.segment_count() == 0) throw Error(ErrorCode::kEmptyTrajectory, "empty trajectory");
  if (!(arm.radius > 0.0)) throw Error(ErrorCode::kConfig, "arm radius must be positive");

  PrintPlan plan;
  plan.reference = wall;
  plan.corner = corner;
  plan.arm = arm;

  Polyline chassis;
  chassis.closed = wall.closed;
  if (corner == CornerStrategy::kCompensate) {
    const double theta0 = heading_of(wall.segment_start(0), wall.segment_end(0));
    const double dir = theta0 + arm.joint_angle;
    const Vec2 arm_vec = arm.radius * Vec2(std::cos(dir), std::sin(dir));
    for (const Vec2& p : wall.points) chassis.points.push_back(p - arm_vec);
  } else {
    plan.arm.joint_angle = kFixedJointAngle;
    // Offset every edge to the left by the radius; vertices are the miter
    // intersections of neighbouring offset edges.
    const std::size_t n = wall.points.size();
    for (std::size_t i = 0; i < n; ++i) {
      const bool has_prev = wall.closed || i > 0;
      const bool has_next = wall.closed || i + 1 < n;
      const Vec2 p = wall.points[i];
      if (!has_prev) {
        chassis.points.push_back(p + arm.radius * left_normal(p, wall.points[i + 1]));
        continue;
      }
      const Vec2 prev = wall.points[(i + n - 1) % n];
      const Vec2 n_in = left_normal(prev, p);
      if (!has_next) {
        chassis.points.push_back(p + arm.radius * n_in);
        continue;
      }
      const Vec2 n_out = left_normal(p, wall.points[(i + 1) % n]);
      const double c = 1.0 + n_in.dot(n_out);
      if (c < 1e-9) throw Error(ErrorCode::kConfig, "wall reverses on itself at a vertex");
      chassis.points.push_back(p + arm.radius * (n_in + n_out) / c);
    }
  }
  plan.trajectory = polygon_tour(chassis, timing);
  return plan;
}

Polyline rectangle(const Vec2& origin, double width, double height) {
  Polyline r;
  r.closed = true;
  r.points = {origin, origin + Vec2(width, 0.0), origin + Vec2(width, height),
              origin + Vec2(0.0, height)};
  return r;
}

std::pair<Polyline, Polyline> sword_halves(double scale) {
  static const double kUpper[][2] = {{0.80, 0.0},  {0.65, 0.05}, {0.25, 0.05}, {0.25, 0.15},
                                     {0.20, 0.15}, {0.20, 0.03}, {0.0, 0.03},  {0.0, 0.0}};
  Polyline upper, lower;
  for (const auto& p : kUpper) upper.points.emplace_back(scale * p[0], scale * p[1]);
  for (auto it = std::rbegin(kUpper); it != std::rend(kUpper); ++it) {
    lower.points.emplace_back(scale * (*it)[0], -scale * (*it)[1]);
  }
  return {upper, lower};
}

}  // namespace lbvs

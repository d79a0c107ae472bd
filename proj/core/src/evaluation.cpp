#include "lbvs/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "lbvs/error.hpp"

namespace lbvs {

AteStats ate(std::span<const TimedPoint> reference, std::span<const TimedPoint> actual) {
  if (reference.empty() || actual.empty()) throw Error(ErrorCode::kNoOverlap, "ate: empty path");
  std::vector<double> errors;
  errors.reserve(actual.size());
  const double t0 = reference.front().t;
  const double t1 = reference.back().t;
  std::size_t j = 0;
  for (const TimedPoint& a : actual) {
    if (a.t < t0 || a.t > t1) continue;
    while (j + 1 < reference.size() && reference[j + 1].t < a.t) ++j;
    Vec2 ref = reference[j].p;
    if (j + 1 < reference.size() && reference[j + 1].t > reference[j].t && a.t > reference[j].t) {
      const double s = (a.t - reference[j].t) / (reference[j + 1].t - reference[j].t);
      ref = reference[j].p + s * (reference[j + 1].p - reference[j].p);
    }
    errors.push_back(1e3 * (a.p - ref).norm());
  }
  if (errors.empty()) throw Error(ErrorCode::kNoOverlap, "ate: no overlapping samples");

  AteStats stats;
  stats.samples = static_cast<int>(errors.size());
  double sq = 0.0;
  for (double e : errors) sq += e * e;
  stats.rms_mm = std::sqrt(sq / stats.samples);
  stats.max_mm = *std::max_element(errors.begin(), errors.end());
  std::sort(errors.begin(), errors.end());
  const std::size_t mid = errors.size() / 2;
  stats.median_mm = errors.size() % 2 ? errors[mid] : 0.5 * (errors[mid - 1] + errors[mid]);
  return stats;
}

namespace {

// Pearson correlation of x[0..n) and y[0..n); nullopt when either is constant.
std::optional<double> pearson(const double* x, const double* y, std::size_t n) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

int velocity_lag(std::span<const double> target, std::span<const double> commanded, int max_lag) {
  if (target.size() != commanded.size()) {
    throw Error(ErrorCode::kInvalidInput, "velocity_lag: series lengths differ");
  }
  if (target.size() < 100) throw Error(ErrorCode::kInvalidInput, "velocity_lag: need at least 100 ticks");
  if (max_lag < 0) throw Error(ErrorCode::kInvalidInput, "velocity_lag: negative lag bound");
  const auto constant = [](std::span<const double> s) {
    return std::all_of(s.begin(), s.end(), [&](double x) { return x == s.front(); });
  };
  if (constant(target) || constant(commanded)) {
    throw Error(ErrorCode::kUndefinedLag, "velocity_lag: constant series");
  }

  const std::size_t n = target.size();
  const int last = std::min<int>(max_lag, static_cast<int>(n) - 2);
  int best_lag = -1;
  double best = -std::numeric_limits<double>::infinity();
  for (int lag = 0; lag <= last; ++lag) {
    const std::size_t m = n - lag;
    const auto r = pearson(target.data(), commanded.data() + lag, m);
    if (r && *r > best) {
      best = *r;
      best_lag = lag;
    }
  }
  if (best_lag < 0) throw Error(ErrorCode::kUndefinedLag, "velocity_lag: no lag with variance");
  return best_lag;
}

namespace {

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double s = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + s * ab)).norm();
}

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double segment_distance(const Vec2& a0, const Vec2& a1, const Vec2& b0, const Vec2& b1) {
  const double d1 = cross(a1 - a0, b0 - a0);
  const double d2 = cross(a1 - a0, b1 - a0);
  const double d3 = cross(b1 - b0, a0 - b0);
  const double d4 = cross(b1 - b0, a1 - b0);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return 0.0;
  }
  return std::min({point_segment_distance(a0, b0, b1), point_segment_distance(a1, b0, b1),
                   point_segment_distance(b0, a0, a1), point_segment_distance(b1, a0, a1)});
}

struct Segment {
  Vec2 a, b;
};

std::vector<Segment> segments_near(const BeadRibbon& r, const Vec2& j, double radius) {
  std::vector<Segment> near, all;
  for (const auto& s : r.strands) {
    for (std::size_t i = 1; i < s.points.size(); ++i) {
      all.push_back({s.points[i - 1], s.points[i]});
      if (point_segment_distance(j, s.points[i - 1], s.points[i]) <= radius) near.push_back(all.back());
    }
  }
  return near.empty() ? all : near;
}

}  // namespace

JunctionReport junction_gap(const BeadRibbon& a, const BeadRibbon& b,
                            std::span<const Vec2> junctions, double neighbourhood) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::kInvalidInput, "junction_gap: empty ribbon");
  JunctionReport report;
  for (const Vec2& j : junctions) {
    const auto sa = segments_near(a, j, neighbourhood);
    const auto sb = segments_near(b, j, neighbourhood);
    double d = std::numeric_limits<double>::infinity();
    for (const Segment& x : sa) {
      for (const Segment& y : sb) d = std::min(d, segment_distance(x.a, x.b, y.a, y.b));
    }
    const double gap = std::max(0.0, d - 0.5 * (a.width + b.width));
    report.gaps_mm.push_back(1e3 * gap);
    report.max_gap_mm = std::max(report.max_gap_mm, 1e3 * gap);
  }
  return report;
}

std::vector<TimedPoint> reference_nozzle_path(const PatternTrajectory& trajectory,
                                              CornerStrategy corner, const ArmState& arm,
                                              std::span<const double> times) {
  trajectory.validate();
  std::vector<TimedPoint> out;
  out.reserve(times.size());
  // Compensation holds the arm's world direction at its starting value.
  const double theta0 = trajectory.knots.front().pose.theta;
  const double world_dir = theta0 + arm.joint_angle;
  for (double t : times) {
    const Pose2 p = pattern_at(trajectory, t).pose;
    if (corner == CornerStrategy::kCompensate) {
      out.push_back({t, p.position() + arm.radius * Vec2(std::cos(world_dir), std::sin(world_dir))});
    } else {
      ArmState fixed = arm;
      fixed.joint_angle = kFixedJointAngle;
      out.push_back({t, nozzle_position(p, fixed)});
    }
  }
  return out;
}

std::vector<double> target_speed_series(const PatternTrajectory& trajectory,
                                        std::span<const double> times, double dt) {
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    const Pose2 a = pattern_at(trajectory, t).pose;
    const Pose2 b = pattern_at(trajectory, t + dt).pose;
    const Vec2 d = b.position() - a.position();
    out.push_back((d.x() * std::cos(a.theta) + d.y() * std::sin(a.theta)) / dt);
  }
  return out;
}

std::vector<double> log_times(const TraceLog& log) {
  std::vector<double> out;
  out.reserve(log.size());
  for (const auto& r : log.records) out.push_back(r.t);
  return out;
}

std::vector<TimedPoint> nozzle_series(const TraceLog& log) {
  std::vector<TimedPoint> out;
  out.reserve(log.size());
  for (const auto& r : log.records) out.push_back({r.t, r.nozzle});
  return out;
}

std::vector<double> commanded_speed(const TraceLog& log) {
  std::vector<double> out;
  out.reserve(log.size());
  for (const auto& r : log.records) out.push_back(r.cmd.v);
  return out;
}

std::vector<NozzleSample> nozzle_trace(const TraceLog& log) {
  std::vector<NozzleSample> out;
  out.reserve(log.size());
  for (const auto& r : log.records) out.push_back({r.t, r.nozzle, r.extruding});
  return out;
}

std::string metrics_csv_line(const MetricsRow& row) {
  auto num = [](const std::optional<double>& v) { return v ? fmt::format("{:.6f}", *v) : std::string(); };
  auto count = [](const std::optional<int>& v) { return v ? fmt::format("{}", *v) : std::string(); };
  const auto& a = row.ate;
  return fmt::format("{},{},{},{},{},{},{},{},{}", row.run_id, row.constraints ? "on" : "off",
                     num(a ? std::optional(a->rms_mm) : std::nullopt),
                     num(a ? std::optional(a->median_mm) : std::nullopt),
                     num(a ? std::optional(a->max_mm) : std::nullopt), count(row.lag_ticks),
                     num(row.wall_mean_mm), num(row.wall_stdev_mm), count(row.gap_count));
}

}  // namespace lbvs

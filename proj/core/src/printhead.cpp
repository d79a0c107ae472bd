#include "lbvs/printhead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>

#include "lbvs/error.hpp"

namespace lbvs {

Vec2 nozzle_position(const Pose2& chassis, const ArmState& arm) {
  const double angle = chassis.theta + arm.joint_angle;
  return {chassis.x + arm.radius * std::cos(angle), chassis.y + arm.radius * std::sin(angle)};
}

JointRate compensate_rotation(double chassis_omega, double joint_rate_max) {
  const double wanted = -chassis_omega;
  if (std::abs(wanted) <= joint_rate_max) return {wanted, false};
  return {std::copysign(joint_rate_max, wanted), true};
}

std::size_t BeadRibbon::segment_count() const {
  std::size_t n = 0;
  for (const Strand& s : strands) n += s.points.size() > 1 ? s.points.size() - 1 : 0;
  return n;
}

BeadRibbon deposit(std::span<const NozzleSample> trace, double bead_width, double max_segment) {
  if (trace.size() < 2) throw Error(ErrorCode::kInvalidInput, "deposit: need at least two trace points");
  if (!(bead_width > 0.0)) throw Error(ErrorCode::kInvalidInput, "deposit: bead width must be positive");
  if (!(max_segment > 0.0)) throw Error(ErrorCode::kInvalidInput, "deposit: max segment must be positive");

  BeadRibbon ribbon;
  ribbon.width = bead_width;
  BeadRibbon::Strand strand;
  auto flush = [&] {
    if (strand.points.size() >= 2) ribbon.strands.push_back(std::move(strand));
    strand = {};
  };
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const NozzleSample& a = trace[i - 1];
    const NozzleSample& b = trace[i];
    if (!(a.extruding && b.extruding)) {
      flush();
      continue;
    }
    if (strand.points.empty()) {
      strand.points.push_back(a.position);
      strand.times.push_back(a.t);
    }
    const double len = (b.position - a.position).norm();
    const int pieces = std::max(1, static_cast<int>(std::ceil(len / max_segment - 1e-12)));
    for (int k = 1; k <= pieces; ++k) {
      const double s = static_cast<double>(k) / pieces;
      strand.points.push_back(a.position + s * (b.position - a.position));
      strand.times.push_back(a.t + s * (b.t - a.t));
    }
  }
  flush();
  return ribbon;
}

double Polyline::length() const {
  double total = 0.0;
  for (std::size_t i = 0; i < segment_count(); ++i) total += (segment_end(i) - segment_start(i)).norm();
  return total;
}

std::size_t Polyline::segment_count() const {
  if (points.size() < 2) return 0;
  return closed ? points.size() : points.size() - 1;
}

std::vector<Vec2> Polyline::corners() const {
  std::vector<Vec2> out;
  const std::size_t n = points.size();
  if (n < 3) return out;
  for (std::size_t i = 0; i < n; ++i) {
    if (!closed && (i == 0 || i + 1 == n)) continue;
    const Vec2 in = points[i] - points[(i + n - 1) % n];
    const Vec2 outgoing = points[(i + 1) % n] - points[i];
    const double turn = std::atan2(in.x() * outgoing.y() - in.y() * outgoing.x(), in.dot(outgoing));
    if (std::abs(turn) > 1e-6) out.push_back(points[i]);
  }
  return out;
}

namespace {

struct Interval {
  double lo, hi;
};

// Parameter range of p + tau * n inside the capsule around a-b.
std::optional<Interval> capsule_interval(const Vec2& p, const Vec2& n, const Vec2& a,
                                         const Vec2& b, double radius) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  double lo = kInf, hi = -kInf;
  for (const Vec2& c : {a, b}) {
    const Vec2 w = p - c;
    const double half_b = n.dot(w);
    const double disc = half_b * half_b - (w.squaredNorm() - radius * radius);
    if (disc >= 0.0) {
      const double root = std::sqrt(disc);
      lo = std::min(lo, -half_b - root);
      hi = std::max(hi, -half_b + root);
    }
  }
  const double len = (b - a).norm();
  if (len > 0.0) {
    const Vec2 d = (b - a) / len;
    const Vec2 m(-d.y(), d.x());
    double rlo = -kInf, rhi = kInf;
    auto clip = [&](double alpha, double beta, double lower, double upper) {
      if (std::abs(beta) < 1e-15) {
        if (alpha < lower || alpha > upper) rlo = kInf;
        return;
      }
      double t0 = (lower - alpha) / beta, t1 = (upper - alpha) / beta;
      if (t0 > t1) std::swap(t0, t1);
      rlo = std::max(rlo, t0);
      rhi = std::min(rhi, t1);
    };
    clip((p - a).dot(d), n.dot(d), 0.0, len);
    clip((p - a).dot(m), n.dot(m), -radius, radius);
    if (rlo <= rhi) {
      lo = std::min(lo, rlo);
      hi = std::max(hi, rhi);
    }
  }
  if (lo > hi) return std::nullopt;
  return Interval{lo, hi};
}

}  // namespace

double thickness_at(const BeadRibbon& ribbon, const Vec2& point, const Vec2& normal,
                    double search_half_width) {
  const double radius = 0.5 * ribbon.width;
  const Vec2 n = normal.normalized();
  const Vec2 e0 = point - search_half_width * n;
  const Vec2 e1 = point + search_half_width * n;
  const Vec2 box_lo = e0.cwiseMin(e1).array() - radius;
  const Vec2 box_hi = e0.cwiseMax(e1).array() + radius;

  std::vector<Interval> hits;
  for (const auto& strand : ribbon.strands) {
    for (std::size_t i = 1; i < strand.points.size(); ++i) {
      const Vec2& a = strand.points[i - 1];
      const Vec2& b = strand.points[i];
      if (std::max(a.x(), b.x()) < box_lo.x() || std::min(a.x(), b.x()) > box_hi.x() ||
          std::max(a.y(), b.y()) < box_lo.y() || std::min(a.y(), b.y()) > box_hi.y()) {
        continue;
      }
      const auto iv = capsule_interval(point, n, a, b, radius);
      if (!iv) continue;
      const double lo = std::max(iv->lo, -search_half_width);
      const double hi = std::min(iv->hi, search_half_width);
      if (lo < hi) hits.push_back({lo, hi});
    }
  }
  if (hits.empty()) return 0.0;
  std::sort(hits.begin(), hits.end(), [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
  double total = 0.0;
  Interval current = hits.front();
  for (std::size_t i = 1; i < hits.size(); ++i) {
    if (hits[i].lo <= current.hi) {
      current.hi = std::max(current.hi, hits[i].hi);
    } else {
      total += current.hi - current.lo;
      current = hits[i];
    }
  }
  return total + (current.hi - current.lo);
}

WallStats wall_thickness_stats(const BeadRibbon& ribbon, const Polyline& reference,
                               const WallSampling& sampling) {
  if (ribbon.empty()) throw Error(ErrorCode::kInvalidInput, "wall_thickness_stats: empty ribbon");
  if (reference.segment_count() == 0) {
    throw Error(ErrorCode::kInvalidInput, "wall_thickness_stats: reference path has no segments");
  }
  if (!(sampling.spacing > 0.0)) throw Error(ErrorCode::kInvalidInput, "sample spacing must be positive");

  std::vector<Vec2> keep_out = reference.corners();
  if (!reference.closed) {
    keep_out.push_back(reference.points.front());
    keep_out.push_back(reference.points.back());
  }

  WallStats stats;
  double offset = 0.0;  // arc length of the current segment start
  std::int64_t k = 0;
  for (std::size_t i = 0; i < reference.segment_count(); ++i) {
    const Vec2 a = reference.segment_start(i);
    const Vec2 b = reference.segment_end(i);
    const double len = (b - a).norm();
    if (len == 0.0) continue;
    const Vec2 dir = (b - a) / len;
    const Vec2 normal(-dir.y(), dir.x());
    for (;; ++k) {
      const double s = static_cast<double>(k) * sampling.spacing - offset;
      if (s >= len) break;
      const Vec2 p = a + s * dir;
      const bool near_corner = std::any_of(keep_out.begin(), keep_out.end(), [&](const Vec2& c) {
        return (p - c).norm() < sampling.corner_margin;
      });
      if (near_corner) continue;
      const double t = thickness_at(ribbon, p, normal, sampling.search_half_width);
      if (t <= 0.0) {
        ++stats.gap_count;
        continue;
      }
      stats.thickness_mm.push_back(1e3 * t);
    }
    offset += len;
  }

  stats.samples = static_cast<int>(stats.thickness_mm.size());
  if (stats.samples == 0) return stats;
  const auto& v = stats.thickness_mm;
  double sum = 0.0;
  for (double x : v) sum += x;
  stats.mean_mm = sum / stats.samples;
  stats.max_mm = *std::max_element(v.begin(), v.end());
  stats.min_mm = *std::min_element(v.begin(), v.end());
  if (stats.max_mm != stats.min_mm) {
    double sq = 0.0;
    for (double x : v) sq += (x - stats.mean_mm) * (x - stats.mean_mm);
    stats.stdev_mm = std::sqrt(sq / stats.samples);
  }
  return stats;
}

CoverageRaster::CoverageRaster(const Vec2& origin, double cell, int nx, int ny)
    : origin_(origin), cell_(cell), nx_(nx), ny_(ny),
      cells_(static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny), 0) {
  if (!(cell > 0.0) || nx <= 0 || ny <= 0) {
    throw Error(ErrorCode::kInvalidInput, "raster needs a positive cell size and extent");
  }
}

CoverageRaster CoverageRaster::spanning(const Vec2& lo, const Vec2& hi, double cell) {
  const Vec2 origin = lo.array() - cell;
  const int nx = static_cast<int>(std::ceil((hi.x() - lo.x()) / cell)) + 2;
  const int ny = static_cast<int>(std::ceil((hi.y() - lo.y()) / cell)) + 2;
  return {origin, cell, nx, ny};
}

Vec2 CoverageRaster::center(int ix, int iy) const {
  return origin_ + cell_ * Vec2(ix + 0.5, iy + 0.5);
}

void CoverageRaster::add_capsule(const Vec2& a, const Vec2& b, double radius) {
  const Vec2 lo = a.cwiseMin(b).array() - radius;
  const Vec2 hi = a.cwiseMax(b).array() + radius;
  const int x0 = std::max(0, static_cast<int>(std::floor((lo.x() - origin_.x()) / cell_)));
  const int y0 = std::max(0, static_cast<int>(std::floor((lo.y() - origin_.y()) / cell_)));
  const int x1 = std::min(nx_ - 1, static_cast<int>(std::ceil((hi.x() - origin_.x()) / cell_)));
  const int y1 = std::min(ny_ - 1, static_cast<int>(std::ceil((hi.y() - origin_.y()) / cell_)));
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  const double r2 = radius * radius;
  for (int iy = y0; iy <= y1; ++iy) {
    for (int ix = x0; ix <= x1; ++ix) {
      const Vec2 p = center(ix, iy);
      const double s = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
      if ((p - (a + s * ab)).squaredNorm() <= r2) cells_[index(ix, iy)] = 1;
    }
  }
}

void CoverageRaster::add_ribbon(const BeadRibbon& ribbon) {
  for (const auto& strand : ribbon.strands) {
    for (std::size_t i = 1; i < strand.points.size(); ++i) {
      add_capsule(strand.points[i - 1], strand.points[i], 0.5 * ribbon.width);
    }
  }
}

void CoverageRaster::add_polyline(const Polyline& line, double radius) {
  for (std::size_t i = 0; i < line.segment_count(); ++i) {
    add_capsule(line.segment_start(i), line.segment_end(i), radius);
  }
}

double CoverageRaster::covered_area() const {
  std::size_t n = 0;
  for (unsigned char c : cells_) n += c;
  return static_cast<double>(n) * cell_ * cell_;
}

namespace {

void extend_box(Vec2& lo, Vec2& hi, const Vec2& p) {
  lo = lo.cwiseMin(p);
  hi = hi.cwiseMax(p);
}

}  // namespace

double ribbon_area(const BeadRibbon& ribbon, double cell) {
  if (ribbon.empty()) return 0.0;
  Vec2 lo = ribbon.strands.front().points.front(), hi = lo;
  for (const auto& s : ribbon.strands) {
    for (const Vec2& p : s.points) extend_box(lo, hi, p);
  }
  const double r = 0.5 * ribbon.width;
  CoverageRaster raster = CoverageRaster::spanning(lo.array() - r, hi.array() + r, cell);
  raster.add_ribbon(ribbon);
  return raster.covered_area();
}

std::vector<double> corner_over_deposit(const BeadRibbon& ribbon, const Polyline& reference,
                                        double window_half, double cell) {
  const std::vector<Vec2> corners = reference.corners();
  std::vector<double> areas(corners.size(), 0.0);
  if (ribbon.empty() || corners.empty()) return areas;

  const double r = 0.5 * ribbon.width;
  std::vector<double> out;
  out.reserve(corners.size());
  for (const Vec2& c : corners) {
    // Window-local rasters keep memory bounded by the window size.
    const Vec2 lo = c.array() - window_half;
    const Vec2 hi = c.array() + window_half;
    CoverageRaster deposited = CoverageRaster::spanning(lo, hi, cell);
    CoverageRaster design = CoverageRaster::spanning(lo, hi, cell);
    deposited.add_ribbon(ribbon);
    design.add_polyline(reference, r);
    std::size_t excess = 0;
    for (int iy = 0; iy < deposited.ny(); ++iy) {
      for (int ix = 0; ix < deposited.nx(); ++ix) {
        const Vec2 p = deposited.center(ix, iy);
        if (std::abs(p.x() - c.x()) > window_half || std::abs(p.y() - c.y()) > window_half) continue;
        if (deposited.at(ix, iy) && !design.at(ix, iy)) ++excess;
      }
    }
    out.push_back(static_cast<double>(excess) * cell * cell * 1e6);
  }
  return out;
}

std::vector<NozzleSample> multi_pass_trace(const Vec2& a, const Vec2& b, int passes,
                                           double lateral_offset, double step) {
  std::vector<NozzleSample> trace;
  const double len = (b - a).norm();
  if (passes < 1 || len == 0.0) return trace;
  const Vec2 dir = (b - a) / len;
  const Vec2 normal(-dir.y(), dir.x());
  const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
  double t = 0.0;
  for (int pass = 0; pass < passes; ++pass) {
    const Vec2 shift = pass * lateral_offset * normal;
    const bool forward = pass % 2 == 0;
    for (int k = 0; k <= n; ++k) {
      const double s = static_cast<double>(forward ? k : n - k) / n;
      trace.push_back({t, a + s * (b - a) + shift, true});
      t += 1.0;
    }
  }
  return trace;
}

}  // namespace lbvs

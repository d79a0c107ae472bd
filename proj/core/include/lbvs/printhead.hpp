#pragma once

#include <span>
#include <vector>

#include "lbvs/sim.hpp"

namespace lbvs {

/// Proximal revolute joint (vertical axis) carrying the nozzle at `radius`.
struct ArmState {
  double joint_angle = 0.0;     // rad, relative to the chassis heading
  double radius = 0.12;         // m
  double joint_rate_max = 1.0;  // rad/s
};

enum class CornerStrategy { kFixed, kCompensate };

/// Joint angle used by the fixed-arm strategy.
inline constexpr double kFixedJointAngle = -1.5707963267948966;

/// chassis + R(theta + joint) * [radius, 0].
Vec2 nozzle_position(const Pose2& chassis, const ArmState& arm);

struct JointRate {
  double rate = 0.0;
  bool clamped = false;
};

/// Joint rate that cancels the chassis yaw rate, clamped to joint_rate_max.
JointRate compensate_rotation(double chassis_omega, double joint_rate_max);

struct NozzleSample {
  double t = 0.0;
  Vec2 position = Vec2::Zero();
  bool extruding = true;
};

/// Deposited bead: nozzle polylines (one strand per continuous extrusion)
/// dilated by width / 2.
struct BeadRibbon {
  struct Strand {
    std::vector<Vec2> points;
    std::vector<double> times;
  };
  std::vector<Strand> strands;
  double width = 0.002;

  bool empty() const { return strands.empty(); }
  std::size_t segment_count() const;
};

/// Builds the ribbon from a nozzle trace. Segments longer than `max_segment`
/// are subdivided; only segments with extrusion on at both ends deposit.
/// Throws kInvalidInput for fewer than two trace points or width <= 0.
BeadRibbon deposit(std::span<const NozzleSample> trace, double bead_width,
                   double max_segment = 0.002);

struct Polyline {
  std::vector<Vec2> points;
  bool closed = false;

  double length() const;
  std::size_t segment_count() const;
  Vec2 segment_start(std::size_t i) const { return points[i]; }
  Vec2 segment_end(std::size_t i) const { return points[(i + 1) % points.size()]; }
  /// Vertices where the direction changes (every vertex of a closed polygon
  /// with a turn, interior vertices of an open one).
  std::vector<Vec2> corners() const;
};

struct WallSampling {
  double spacing = 0.002;            // m along the reference path
  double search_half_width = 0.008;  // m on each side of the path
  /// Samples closer than this to a corner or an open end are skipped.
  double corner_margin = 0.008;
};

/// Wall thickness statistics in millimeters.
struct WallStats {
  double mean_mm = 0.0;
  double max_mm = 0.0;
  double min_mm = 0.0;
  double stdev_mm = 0.0;
  int samples = 0;
  int gap_count = 0;
  std::vector<double> thickness_mm;  // per covered sample, path order
};

/// Covered length of the ribbon along the normal line at one point.
double thickness_at(const BeadRibbon& ribbon, const Vec2& point, const Vec2& normal,
                    double search_half_width);

/// Samples the reference path at fixed arc length and measures the ribbon
/// extent along the local normal. Samples without coverage count as gaps and
/// are excluded from the statistics. Throws kInvalidInput for an empty ribbon.
WallStats wall_thickness_stats(const BeadRibbon& ribbon, const Polyline& reference,
                               const WallSampling& sampling = {});

/// Occupancy grid of capsules (segments dilated by a radius).
class CoverageRaster {
 public:
  CoverageRaster(const Vec2& origin, double cell, int nx, int ny);

  /// Grid covering `lo`..`hi` with one cell of margin.
  static CoverageRaster spanning(const Vec2& lo, const Vec2& hi, double cell);

  void add_capsule(const Vec2& a, const Vec2& b, double radius);
  void add_ribbon(const BeadRibbon& ribbon);
  void add_polyline(const Polyline& line, double radius);

  bool at(int ix, int iy) const { return cells_[index(ix, iy)] != 0; }
  Vec2 center(int ix, int iy) const;
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double cell() const { return cell_; }
  double covered_area() const;

 private:
  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(ix);
  }

  Vec2 origin_;
  double cell_;
  int nx_, ny_;
  std::vector<unsigned char> cells_;
};

/// Union area of the ribbon in m^2, by rasterization.
double ribbon_area(const BeadRibbon& ribbon, double cell = 1e-4);

/// For each corner of `reference`: area (mm^2) of ribbon inside the square
/// window of half-size `window_half` that lies outside the designed wall band
/// (reference dilated by bead_width / 2).
std::vector<double> corner_over_deposit(const BeadRibbon& ribbon, const Polyline& reference,
                                        double window_half, double cell = 1e-4);

/// Nozzle trace of `passes` back-and-forth passes over the segment a-b, pass
/// k shifted sideways by k * lateral_offset.
std::vector<NozzleSample> multi_pass_trace(const Vec2& a, const Vec2& b, int passes,
                                           double lateral_offset, double step = 0.001);

}  // namespace lbvs

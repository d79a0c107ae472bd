#pragma once

#include <utility>

#include "lbvs/controller.hpp"
#include "lbvs/printhead.hpp"

namespace lbvs {

/// Timing of a pattern tour.
struct PathTiming {
  double speed = 0.0005;     // m/s while translating
  double turn_rate = 0.045;  // rad/s while pivoting at corners
  /// Passes over every edge (forward, back, forward, ...). Must be odd so the
  /// tour ends at the far end of each edge.
  int passes = 1;
  /// Lateral spacing between consecutive passes, m. Zero overlays them.
  double pass_offset = 0.0;
  /// Pause before and after every pivot, s. Lets the chassis catch up with
  /// the pattern so the lag along one edge does not turn into a sideways
  /// offset on the next.
  double corner_dwell = 0.0;
  /// Dwell at the final placement, s.
  double settle = 0.0;

  void validate() const;
};

/// Chassis trajectory and the wall it should lay down.
struct PrintPlan {
  PatternTrajectory trajectory;  // chassis (pattern) placements
  Polyline reference;            // designed nozzle path
  CornerStrategy corner = CornerStrategy::kCompensate;
  ArmState arm;                  // initial arm state
};

/// Pattern tour along a polyline: translate along each edge, pivot in place
/// at each vertex. The heading follows the edge direction.
PatternTrajectory polygon_tour(const Polyline& path, const PathTiming& timing,
                               double start_time = 0.0);

/// Plans a print of `wall` (the nozzle path).
///
/// Compensate: the arm keeps its world direction, so the chassis runs the
/// wall translated by minus the arm vector and pivots in place at corners
/// while the joint counter-rotates.
/// Fixed: the joint stays at -pi/2 (nozzle on the right), the chassis runs
/// the wall offset left by the arm radius and the nozzle sweeps an arc at
/// every pivot.
PrintPlan plan_print(const Polyline& wall, CornerStrategy corner, const ArmState& arm,
                     const PathTiming& timing);

/// Closed counter-clockwise rectangle with its first vertex at `origin`.
Polyline rectangle(const Vec2& origin, double width, double height);

/// Upper and lower halves of the sword outline, full size 0.80 m x 0.30 m
/// times `scale`. The upper half runs tip to pommel, the lower half pommel
/// to tip; they meet at the tip and at the pommel end.
std::pair<Polyline, Polyline> sword_halves(double scale);

}  // namespace lbvs

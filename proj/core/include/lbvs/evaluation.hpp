#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lbvs/controller.hpp"
#include "lbvs/printhead.hpp"
#include "lbvs/trace.hpp"

namespace lbvs {

struct TimedPoint {
  double t = 0.0;
  Vec2 p = Vec2::Zero();
};

struct AteStats {
  double rms_mm = 0.0;
  double median_mm = 0.0;
  double max_mm = 0.0;
  int samples = 0;
};

/// Position error of `actual` against `reference` interpolated linearly at
/// the actual timestamps. No alignment transform is applied. Actual samples
/// outside the reference time span are ignored; throws kNoOverlap when none
/// remain.
AteStats ate(std::span<const TimedPoint> reference, std::span<const TimedPoint> actual);

/// Lag in [0, max_lag] maximizing the normalized cross-correlation of
/// `commanded` delayed against `target`. Ties go to the smaller lag. Throws
/// kInvalidInput for unequal or short (< 100) series and kUndefinedLag for a
/// constant one.
int velocity_lag(std::span<const double> target, std::span<const double> commanded,
                 int max_lag = 50);

struct JunctionReport {
  std::vector<double> gaps_mm;  // one per junction
  double max_gap_mm = 0.0;
};

/// For every junction, the smallest distance between the two ribbons'
/// boundaries among segments within `neighbourhood` of it (all segments when
/// a ribbon has none there), 0 when they overlap. Throws kInvalidInput for an
/// empty ribbon.
JunctionReport junction_gap(const BeadRibbon& a, const BeadRibbon& b,
                            std::span<const Vec2> junctions, double neighbourhood = 0.01);

/// Where the nozzle should be at each time when the chassis sits exactly at
/// the pattern placement.
std::vector<TimedPoint> reference_nozzle_path(const PatternTrajectory& trajectory,
                                              CornerStrategy corner, const ArmState& arm,
                                              std::span<const double> times);

/// Signed forward-difference speed of the pattern along its heading.
std::vector<double> target_speed_series(const PatternTrajectory& trajectory,
                                        std::span<const double> times, double dt);

std::vector<double> log_times(const TraceLog& log);
std::vector<TimedPoint> nozzle_series(const TraceLog& log);
std::vector<double> commanded_speed(const TraceLog& log);

/// Nozzle trace with extrusion flags, ready for deposit().
std::vector<NozzleSample> nozzle_trace(const TraceLog& log);

/// One row of metrics.csv. Unset optionals are written as empty fields.
struct MetricsRow {
  std::string run_id;
  bool constraints = true;
  std::optional<AteStats> ate;
  std::optional<int> lag_ticks;
  std::optional<double> wall_mean_mm;
  std::optional<double> wall_stdev_mm;
  std::optional<int> gap_count;
};

inline constexpr const char* kMetricsHeader =
    "run_id,constraints,ate_rms_mm,ate_median_mm,ate_max_mm,lag_ticks,wall_mean_mm,"
    "wall_stdev_mm,gap_count";

std::string metrics_csv_line(const MetricsRow& row);

}  // namespace lbvs

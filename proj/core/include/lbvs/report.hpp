#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lbvs/evaluation.hpp"
#include "lbvs/printhead.hpp"
#include "lbvs/trace.hpp"

namespace lbvs {

struct SpeedSeries {
  std::string label;
  std::vector<double> t;
  std::vector<double> value;
};

/// Everything one report renders. All members may be empty.
struct ReportBundle {
  std::vector<TraceLog> logs;
  std::vector<Polyline> references;
  std::vector<BeadRibbon> ribbons;
  std::vector<SpeedSeries> speeds;
  std::vector<Vec2> markers;  // corners or junctions to circle
  std::vector<MetricsRow> metrics;
};

std::string trajectory_svg(const ReportBundle& bundle);
std::string velocity_svg(const ReportBundle& bundle);
std::string ribbon_svg(const ReportBundle& bundle);
std::string metrics_csv(const std::vector<MetricsRow>& rows);

/// Writes trajectory.svg, velocity.svg, ribbon.svg and metrics.csv into
/// `dir` (created if missing). Throws kIo when a file cannot be written.
void render_report(const ReportBundle& bundle, const std::filesystem::path& dir);

/// Writes `content` to `path`, throwing kIo on failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace lbvs

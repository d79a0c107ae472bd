#include "lbvs/report.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <limits>

#include <fmt/format.h>

#include "lbvs/error.hpp"

namespace lbvs {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kMargin = 40.0;
constexpr std::array<const char*, 6> kColors{"#1f77b4", "#d62728", "#2ca02c",
                                             "#9467bd", "#ff7f0e", "#8c564b"};

// Maps a data box onto the drawing area, y pointing up.
class Canvas {
 public:
  void include(const Vec2& p) {
    lo_ = lo_.cwiseMin(p);
    hi_ = hi_.cwiseMax(p);
  }

  void finish(bool equal_aspect) {
    if (!(lo_.x() <= hi_.x())) {
      lo_ = Vec2(0.0, 0.0);
      hi_ = Vec2(1.0, 1.0);
    }
    Vec2 span = (hi_ - lo_).cwiseMax(Vec2(1e-9, 1e-9));
    const double sx = (kWidth - 2 * kMargin) / span.x();
    const double sy = (kHeight - 2 * kMargin) / span.y();
    sx_ = equal_aspect ? std::min(sx, sy) : sx;
    sy_ = equal_aspect ? std::min(sx, sy) : sy;
  }

  Vec2 map(const Vec2& p) const {
    return {kMargin + (p.x() - lo_.x()) * sx_, kHeight - kMargin - (p.y() - lo_.y()) * sy_};
  }
  double scale() const { return sx_; }

 private:
  Vec2 lo_{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Vec2 hi_{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  double sx_ = 1.0, sy_ = 1.0;
};

std::string header(const std::string& title) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.0f}\" height=\"{1:.0f}\" "
      "viewBox=\"0 0 {0:.0f} {1:.0f}\">\n"
      "<rect x=\"0\" y=\"0\" width=\"{0:.0f}\" height=\"{1:.0f}\" fill=\"white\"/>\n"
      "<rect x=\"{2:.0f}\" y=\"{2:.0f}\" width=\"{3:.0f}\" height=\"{4:.0f}\" fill=\"none\" "
      "stroke=\"#999\"/>\n"
      "<text x=\"{2:.0f}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">{5}</text>\n",
      kWidth, kHeight, kMargin, kWidth - 2 * kMargin, kHeight - 2 * kMargin, title);
}

std::string polyline(const Canvas& c, const std::vector<Vec2>& pts, const std::string& stroke,
                     double width, bool closed = false, const char* extra = "") {
  if (pts.empty()) return {};
  std::string points;
  for (const Vec2& p : pts) {
    const Vec2 q = c.map(p);
    points += fmt::format("{:.2f},{:.2f} ", q.x(), q.y());
  }
  if (!points.empty()) points.pop_back();
  return fmt::format("<{} points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{:.3f}\" "
                     "stroke-linejoin=\"round\" stroke-linecap=\"round\"{}/>\n",
                     closed ? "polygon" : "polyline", points, stroke, width, extra);
}

std::string legend(int row, const std::string& label, const std::string& color) {
  const double y = kMargin + 16.0 + 16.0 * row;
  return fmt::format(
      "<rect x=\"{:.0f}\" y=\"{:.0f}\" width=\"10\" height=\"10\" fill=\"{}\"/>"
      "<text x=\"{:.0f}\" y=\"{:.0f}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
      kWidth - kMargin - 150.0, y - 9.0, color, kWidth - kMargin - 135.0, y, label);
}

std::string marker(const Canvas& c, const Vec2& p) {
  const Vec2 q = c.map(p);
  return fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"12\" fill=\"none\" "
                     "stroke=\"#444\" stroke-dasharray=\"3,2\"/>\n",
                     q.x(), q.y());
}

}  // namespace

std::string trajectory_svg(const ReportBundle& bundle) {
  Canvas c;
  for (const auto& r : bundle.references) for (const Vec2& p : r.points) c.include(p);
  for (const auto& log : bundle.logs) {
    for (const auto& rec : log.records) {
      c.include(rec.nozzle);
      c.include(rec.pose.position());
    }
  }
  c.finish(true);
  std::string out = header("trajectory");
  for (const auto& r : bundle.references) {
    out += polyline(c, r.points, "#888", 1.5, r.closed, " stroke-dasharray=\"6,3\"");
  }
  int row = 0;
  for (std::size_t i = 0; i < bundle.logs.size(); ++i) {
    const auto& log = bundle.logs[i];
    const std::string color = kColors[i % kColors.size()];
    std::vector<Vec2> nozzle, chassis;
    for (const auto& rec : log.records) {
      nozzle.push_back(rec.nozzle);
      chassis.push_back(rec.pose.position());
    }
    out += polyline(c, chassis, color, 0.8, false, " stroke-opacity=\"0.4\"");
    out += polyline(c, nozzle, color, 1.2);
    out += legend(row++, log.name, color);
  }
  for (const Vec2& m : bundle.markers) out += marker(c, m);
  return out + "</svg>\n";
}

std::string velocity_svg(const ReportBundle& bundle) {
  Canvas c;
  for (const auto& s : bundle.speeds) {
    for (std::size_t i = 0; i < s.t.size() && i < s.value.size(); ++i) c.include({s.t[i], 1e3 * s.value[i]});
  }
  c.finish(false);
  std::string out = header("speed [mm/s] vs time [s]");
  for (std::size_t k = 0; k < bundle.speeds.size(); ++k) {
    const auto& s = bundle.speeds[k];
    const std::string color = kColors[k % kColors.size()];
    std::vector<Vec2> pts;
    for (std::size_t i = 0; i < s.t.size() && i < s.value.size(); ++i) pts.emplace_back(s.t[i], 1e3 * s.value[i]);
    out += polyline(c, pts, color, 1.2);
    out += legend(static_cast<int>(k), s.label, color);
  }
  return out + "</svg>\n";
}

std::string ribbon_svg(const ReportBundle& bundle) {
  Canvas c;
  for (const auto& r : bundle.references) for (const Vec2& p : r.points) c.include(p);
  for (const auto& rb : bundle.ribbons) {
    for (const auto& s : rb.strands) for (const Vec2& p : s.points) c.include(p);
  }
  c.finish(true);
  std::string out = header("deposited ribbon");
  for (std::size_t i = 0; i < bundle.ribbons.size(); ++i) {
    const auto& rb = bundle.ribbons[i];
    const std::string color = kColors[i % kColors.size()];
    for (const auto& s : rb.strands) {
      out += polyline(c, s.points, color, std::max(0.5, rb.width * c.scale()), false,
                      " stroke-opacity=\"0.6\"");
    }
  }
  for (const auto& r : bundle.references) out += polyline(c, r.points, "#000", 0.6, r.closed);
  for (const Vec2& m : bundle.markers) out += marker(c, m);
  return out + "</svg>\n";
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out = std::string(kMetricsHeader) + "\n";
  for (const auto& row : rows) out += metrics_csv_line(row) + "\n";
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  f << content;
  f.flush();
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

void render_report(const ReportBundle& bundle, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  write_text_file(dir / "trajectory.svg", trajectory_svg(bundle));
  write_text_file(dir / "velocity.svg", velocity_svg(bundle));
  write_text_file(dir / "ribbon.svg", ribbon_svg(bundle));
  write_text_file(dir / "metrics.csv", metrics_csv(bundle.metrics));
}

}  // namespace lbvs

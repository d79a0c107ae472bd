#include "lbvs/io.hpp"

#include <charconv>
#include <fstream>

#include <fmt/format.h>

#include "lbvs/error.hpp"

namespace lbvs {

namespace {

std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& path,
                                                const std::string& expected_header) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::string line;
  if (!std::getline(f, line)) throw Error(ErrorCode::kConfig, path.string() + ": missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected_header) {
    throw Error(ErrorCode::kConfig, path.string() + ": expected header '" + expected_header + "'");
  }
  const std::size_t columns = split_csv_line(expected_header).size();
  std::vector<std::vector<std::string>> rows;
  int line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != columns) {
      throw Error(ErrorCode::kConfig,
                  fmt::format("{}:{}: expected {} fields", path.string(), line_no, columns));
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(const std::string& field) {
  double v = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin < end && *begin == ' ') ++begin;
  if (begin < end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) throw Error(ErrorCode::kConfig, "not a number: '" + field + "'");
  return v;
}

long long parse_int(const std::string& field) {
  long long v = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin < end && *begin == ' ') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) throw Error(ErrorCode::kConfig, "not an integer: '" + field + "'");
  return v;
}

std::string pattern_csv(const DotPattern& pattern) {
  std::string out = "id,x_m,y_m,color\n";
  for (const Dot& d : pattern.dots) {
    out += fmt::format("{},{},{},{}\n", d.id, d.position.x(), d.position.y(), pattern.color_tag);
  }
  return out;
}

DotPattern read_pattern_csv(const std::filesystem::path& path) {
  DotPattern pattern;
  bool first = true;
  for (const auto& row : read_rows(path, "id,x_m,y_m,color")) {
    const int color = static_cast<int>(parse_int(row[3]));
    if (first) {
      pattern.color_tag = color;
      first = false;
    } else if (color != pattern.color_tag) {
      throw Error(ErrorCode::kConfig, path.string() + ": one pattern file must use one color");
    }
    pattern.dots.push_back({static_cast<int>(parse_int(row[0])),
                            Vec2(parse_double(row[1]), parse_double(row[2]))});
  }
  pattern.validate();
  return pattern;
}

std::string dataset_csv(const CalibrationDataset& dataset) {
  std::string out = "frame,id,u_x,u_y,f_x,f_y,v,omega,dt\n";
  for (const FlowSample& s : dataset.samples) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", s.frame, s.id, s.pixel.x(), s.pixel.y(),
                       s.flow.x(), s.flow.y(), s.cmd.v, s.cmd.omega, dataset.frame_dt);
  }
  return out;
}

CalibrationDataset read_dataset_csv(const std::filesystem::path& path) {
  CalibrationDataset ds;
  std::int64_t last_frame = -1;
  for (const auto& row : read_rows(path, "frame,id,u_x,u_y,f_x,f_y,v,omega,dt")) {
    FlowSample s;
    s.frame = parse_int(row[0]);
    s.id = static_cast<int>(parse_int(row[1]));
    s.pixel = Vec2(parse_double(row[2]), parse_double(row[3]));
    s.flow = Vec2(parse_double(row[4]), parse_double(row[5]));
    s.cmd = {parse_double(row[6]), parse_double(row[7])};
    ds.frame_dt = parse_double(row[8]);
    last_frame = std::max(last_frame, s.frame);
    ds.samples.push_back(s);
  }
  ds.frame_count = last_frame + 1;
  return ds;
}

std::string loss_csv(const std::vector<LossPoint>& curve) {
  std::string out = "epoch,train_loss,holdout_loss\n";
  for (const LossPoint& p : curve) out += fmt::format("{},{},{}\n", p.epoch, p.train_loss, p.holdout_loss);
  return out;
}

std::string trajectory_csv(const PatternTrajectory& trajectory) {
  std::string out = "t_s,x_m,y_m,theta_rad\n";
  for (const auto& k : trajectory.knots) {
    out += fmt::format("{},{},{},{}\n", k.t, k.pose.x, k.pose.y, k.pose.theta);
  }
  return out;
}

PatternTrajectory read_trajectory_csv(const std::filesystem::path& path) {
  PatternTrajectory traj;
  for (const auto& row : read_rows(path, "t_s,x_m,y_m,theta_rad")) {
    traj.knots.push_back({parse_double(row[0]),
                          Pose2(parse_double(row[1]), parse_double(row[2]), parse_double(row[3]))});
  }
  return traj;
}

std::string trace_csv(const TraceLog& log) {
  std::string out = "t_s,x_m,y_m,theta_rad,v,omega,mode,mean_err_px,n_points\n";
  for (const auto& r : log.records) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.t, r.pose.x, r.pose.y, r.pose.theta,
                       r.cmd.v, r.cmd.omega, to_string(r.mode), r.mean_error_px, r.n_points);
  }
  return out;
}

std::string ribbon_csv(const BeadRibbon& ribbon) {
  std::string out = "strand,index,t_s,x_m,y_m\n";
  for (std::size_t s = 0; s < ribbon.strands.size(); ++s) {
    const auto& strand = ribbon.strands[s];
    for (std::size_t i = 0; i < strand.points.size(); ++i) {
      out += fmt::format("{},{},{},{},{}\n", s, i, strand.times[i], strand.points[i].x(),
                         strand.points[i].y());
    }
  }
  return out;
}

}  // namespace lbvs

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lbvs/calibration.hpp"
#include "lbvs/controller.hpp"
#include "lbvs/printhead.hpp"
#include "lbvs/sim.hpp"
#include "lbvs/trace.hpp"

namespace lbvs {

// CSV writers return the whole file content; readers throw kIo for a missing
// file and kConfig for malformed content.

/// `id,x_m,y_m,color`
std::string pattern_csv(const DotPattern& pattern);
/// All rows must share one color.
DotPattern read_pattern_csv(const std::filesystem::path& path);

/// `frame,id,u_x,u_y,f_x,f_y,v,omega,dt`
std::string dataset_csv(const CalibrationDataset& dataset);
CalibrationDataset read_dataset_csv(const std::filesystem::path& path);

/// `epoch,train_loss,holdout_loss`
std::string loss_csv(const std::vector<LossPoint>& curve);

/// `t_s,x_m,y_m,theta_rad`
std::string trajectory_csv(const PatternTrajectory& trajectory);
PatternTrajectory read_trajectory_csv(const std::filesystem::path& path);

/// `t_s,x_m,y_m,theta_rad,v,omega,mode,mean_err_px,n_points`
std::string trace_csv(const TraceLog& log);

/// `strand,index,t_s,x_m,y_m`
std::string ribbon_csv(const BeadRibbon& ribbon);

/// Splits one CSV line on commas (no quoting).
std::vector<std::string> split_csv_line(const std::string& line);
double parse_double(const std::string& field);
long long parse_int(const std::string& field);

}  // namespace lbvs

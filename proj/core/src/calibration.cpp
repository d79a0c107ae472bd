#include "lbvs/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <unordered_map>

#include "lbvs/error.hpp"

namespace lbvs {

CalibrationSchedule CalibrationSchedule::straight_then_spin(int frames, double frame_dt,
                                                            double v_max, double omega_max,
                                                            std::uint64_t seed) {
  if (frames < 2 || !(frame_dt > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "calibration schedule needs >= 2 frames and dt > 0");
  }
  std::mt19937_64 rng(mix_seed(seed, 0x5c4edULL));
  std::uniform_real_distribution<double> magnitude(0.2, 1.0);
  std::uniform_int_distribution<int> hold(5, 15);

  CalibrationSchedule schedule;
  schedule.frame_dt = frame_dt;
  schedule.commands.reserve(static_cast<std::size_t>(frames));
  const int straight_frames = frames / 2;
  for (int phase = 0; phase < 2; ++phase) {
    const int phase_frames = phase == 0 ? straight_frames : frames - straight_frames;
    double sign = 1.0;
    int emitted = 0;
    while (emitted < phase_frames) {
      const double m = magnitude(rng);
      const int n = std::min(hold(rng), phase_frames - emitted);
      const ControlCommand cmd = phase == 0 ? ControlCommand{sign * m * v_max, 0.0}
                                            : ControlCommand{0.0, sign * m * omega_max};
      schedule.commands.insert(schedule.commands.end(), static_cast<std::size_t>(n), cmd);
      emitted += n;
      sign = -sign;
    }
  }
  return schedule;
}

CalibrationDataset collect_dataset(const CalibrationWorld& world,
                                   const CalibrationSchedule& schedule) {
  world.camera.validate();
  world.pattern.validate();
  if (schedule.commands.empty()) {
    throw Error(ErrorCode::kInvalidInput, "collect_dataset: empty schedule");
  }

  CalibrationDataset dataset;
  dataset.frame_dt = schedule.frame_dt;
  dataset.frame_count = static_cast<std::int64_t>(schedule.commands.size());

  const auto& cmds = schedule.commands;
  Pose2 pose = world.start;
  MeasurementSet previous = observe(pose, world.camera, world.pattern, world.seed, 0, cmds[0].omega);
  for (std::size_t t = 0; t < cmds.size(); ++t) {
    pose = step_unicycle(pose, cmds[t], schedule.frame_dt);
    const double omega_next = t + 1 < cmds.size() ? cmds[t + 1].omega : cmds[t].omega;
    MeasurementSet current = observe(pose, world.camera, world.pattern, world.seed,
                                     static_cast<std::int64_t>(t + 1), omega_next);

    std::unordered_map<int, Vec2> next_by_id;
    next_by_id.reserve(current.items.size());
    for (const Measurement& m : current.items) next_by_id.emplace(m.id, m.pixel);

    std::vector<FlowSample> frame_samples;
    for (const Measurement& m : previous.items) {
      const auto it = next_by_id.find(m.id);
      if (it == next_by_id.end()) continue;
      frame_samples.push_back({m.pixel, it->second - m.pixel, cmds[t],
                               static_cast<std::int64_t>(t), m.id});
    }
    if (frame_samples.size() >= 3) {
      dataset.samples.insert(dataset.samples.end(), frame_samples.begin(), frame_samples.end());
    }
    previous = std::move(current);
  }
  if (dataset.samples.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "calibration drive produced no matched flow samples");
  }
  return dataset;
}

CoverageHull CoverageHull::of(const std::vector<Vec2>& points) {
  std::vector<Vec2> pts = points;
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  CoverageHull hull;
  if (pts.size() < 3) {
    hull.vertices = pts;
    return hull;
  }
  auto cross = [](const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Vec2> h(2 * pts.size());
  std::size_t k = 0;
  for (const Vec2& p : pts) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0.0) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(h[k - 2], h[k - 1], pts[i]) <= 0.0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  hull.vertices = std::move(h);
  return hull;
}

bool CoverageHull::contains(const Vec2& pixel) const {
  if (vertices.size() < 3) return false;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Vec2& a = vertices[i];
    const Vec2& b = vertices[(i + 1) % vertices.size()];
    const double c = (b.x() - a.x()) * (pixel.y() - a.y()) - (b.y() - a.y()) * (pixel.x() - a.x());
    if (c < 0.0) return false;
  }
  return true;
}

double CoverageHull::area() const {
  double twice = 0.0;
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Vec2& a = vertices[i];
    const Vec2& b = vertices[(i + 1) % vertices.size()];
    twice += a.x() * b.y() - b.x() * a.y();
  }
  return 0.5 * std::abs(twice);
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::kInvalidInput, "learning_rate must be > 0");
  if (epochs < 1) throw Error(ErrorCode::kInvalidInput, "epochs must be >= 1");
  if (batch_size < 1) throw Error(ErrorCode::kInvalidInput, "batch_size must be >= 1");
  if (!(holdout_fraction >= 0.0 && holdout_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidInput, "holdout_fraction must lie in [0, 1)");
  }
}

namespace {

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

// RMS flow per unit of commanded displacement, from samples driven by one
// command component alone.
double column_scale(const std::vector<FlowSample>& samples, double dt, bool angular) {
  double flow2 = 0.0, cmd2 = 0.0;
  for (const FlowSample& s : samples) {
    const double own = angular ? s.cmd.omega : s.cmd.v;
    const double other = angular ? s.cmd.v : s.cmd.omega;
    if (own == 0.0 || other != 0.0) continue;
    flow2 += s.flow.squaredNorm();
    cmd2 += own * own * dt * dt;
  }
  if (cmd2 == 0.0 || flow2 == 0.0) return 1.0;
  return std::sqrt(flow2 / cmd2);
}

double chunked_loss(const InteractionNet& net, const std::vector<FlowSample>& samples, double dt) {
  constexpr std::size_t kChunk = 4096;
  double total = 0.0;
  for (std::size_t i = 0; i < samples.size(); i += kChunk) {
    const std::size_t n = std::min(kChunk, samples.size() - i);
    total += loss(net, std::span(samples).subspan(i, n), dt) * static_cast<double>(n);
  }
  return total / static_cast<double>(samples.size());
}

}  // namespace

TrainResult train(const CalibrationDataset& dataset, const TrainConfig& cfg) {
  cfg.validate();
  if (dataset.empty()) throw Error(ErrorCode::kEmptyDataset, "train: empty dataset");
  const double dt = dataset.frame_dt;

  TrainResult result;

  std::vector<double> magnitudes;
  magnitudes.reserve(dataset.size());
  for (const FlowSample& s : dataset.samples) magnitudes.push_back(s.flow.norm());
  const double cap = cfg.outlier_factor * median_of(magnitudes);
  std::vector<FlowSample> kept;
  kept.reserve(dataset.size());
  for (const FlowSample& s : dataset.samples) {
    if (cap > 0.0 && s.flow.norm() > cap) {
      ++result.outliers_removed;
      continue;
    }
    kept.push_back(s);
  }
  if (kept.empty()) throw Error(ErrorCode::kEmptyDataset, "train: every sample was an outlier");

  std::mt19937_64 rng(mix_seed(cfg.seed, 0x7a1eULL));
  std::vector<std::size_t> order(kept.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  auto holdout_count = static_cast<std::size_t>(std::llround(cfg.holdout_fraction * static_cast<double>(kept.size())));
  if (holdout_count >= kept.size()) holdout_count = 0;

  std::vector<FlowSample> holdout, training;
  holdout.reserve(holdout_count);
  training.reserve(kept.size() - holdout_count);
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < holdout_count ? holdout : training).push_back(kept[order[i]]);
  }
  const std::vector<FlowSample>& evaluation = holdout.empty() ? training : holdout;

  std::vector<Vec2> pixels;
  pixels.reserve(kept.size());
  Vec2 lo = training.front().pixel, hi = lo;
  for (const FlowSample& s : training) {
    lo = lo.cwiseMin(s.pixel);
    hi = hi.cwiseMax(s.pixel);
  }
  for (const FlowSample& s : kept) pixels.push_back(s.pixel);
  result.hull = CoverageHull::of(pixels);

  InteractionNet net = InteractionNet::random(cfg.seed, cfg.init_range);
  net.input_offset = 0.5 * (lo + hi);
  net.input_scale = (0.5 * (hi - lo)).cwiseMax(1.0);
  net.output_scale = {column_scale(training, dt, false), column_scale(training, dt, true)};

  const auto n_params = static_cast<Eigen::Index>(InteractionNet::parameter_count());
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(n_params);
  Eigen::VectorXd second = Eigen::VectorXd::Zero(n_params);
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kAdamEps = 1e-8;
  std::int64_t step = 0;

  std::vector<std::size_t> train_order(training.size());
  std::iota(train_order.begin(), train_order.end(), std::size_t{0});
  std::vector<FlowSample> batch;
  batch.reserve(static_cast<std::size_t>(cfg.batch_size));

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(train_order.begin(), train_order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < train_order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(train_order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(training[train_order[i]]);

      LossGradient lg = net_backward(net, batch, dt);
      epoch_loss += lg.loss * static_cast<double>(batch.size());
      ++step;
      switch (cfg.optimizer) {
        case Optimizer::kSgd:
          net.parameters() -= cfg.learning_rate * lg.gradient;
          break;
        case Optimizer::kMomentum:
          velocity = cfg.momentum * velocity - cfg.learning_rate * lg.gradient;
          net.parameters() += velocity;
          break;
        case Optimizer::kAdam: {
          velocity = kBeta1 * velocity + (1.0 - kBeta1) * lg.gradient;
          second = kBeta2 * second + (1.0 - kBeta2) * lg.gradient.cwiseAbs2();
          const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
          const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
          net.parameters().array() -= cfg.learning_rate * (velocity.array() / c1) /
                                      ((second.array() / c2).sqrt() + kAdamEps);
          break;
        }
      }
    }
    const double train_loss = epoch_loss / static_cast<double>(training.size());
    const double holdout_loss = chunked_loss(net, evaluation, dt);
    if (!std::isfinite(train_loss) || !std::isfinite(holdout_loss) || !net.parameters().allFinite()) {
      throw Error(ErrorCode::kTrainingDiverged,
                  "training diverged at epoch " + std::to_string(epoch));
    }
    result.curve.push_back({epoch, train_loss, holdout_loss});
    result.holdout_loss = holdout_loss;
    result.epochs_run = epoch;
    if (cfg.target_loss > 0.0 && holdout_loss <= cfg.target_loss) break;
  }

  result.net = std::move(net);
  return result;
}

}  // namespace lbvs

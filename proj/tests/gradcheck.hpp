#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "lbvs/net.hpp"

namespace lbvs::test {

struct GradCheck {
  int checked = 0;
  int skipped = 0;  // probe window crossed a ReLU kink
  double worst_relative = 0.0;
};

// Signs of every hidden pre-activation over the batch, from a plain loop
// forward pass.
inline std::vector<bool> activation_pattern(const InteractionNet& net,
                                            std::span<const FlowSample> batch) {
  std::vector<bool> out;
  for (const FlowSample& s : batch) {
    std::vector<double> a{(s.pixel.x() - net.input_offset.x()) / net.input_scale.x(),
                          (s.pixel.y() - net.input_offset.y()) / net.input_scale.y()};
    for (int l = 0; l + 1 < InteractionNet::kLayerCount; ++l) {
      const auto w = net.weight(l);
      const auto b = net.bias(l);
      std::vector<double> z(static_cast<std::size_t>(w.rows()));
      for (Eigen::Index r = 0; r < w.rows(); ++r) {
        double acc = b[r];
        for (Eigen::Index c = 0; c < w.cols(); ++c) acc += w(r, c) * a[static_cast<std::size_t>(c)];
        out.push_back(acc > 0.0);
        z[static_cast<std::size_t>(r)] = std::max(acc, 0.0);
      }
      a = std::move(z);
    }
  }
  return out;
}

// Central differences on `count` randomly chosen parameters. Along a single
// parameter the loss is quadratic between ReLU kinks, so the difference is
// exact up to rounding whenever the probe window keeps the activation pattern;
// parameters whose window crosses a kink are skipped and replaced.
inline GradCheck gradient_check(const InteractionNet& net, std::span<const FlowSample> batch,
                                double dt, int count, std::uint64_t seed, double h = 1e-2) {
  const LossGradient analytic = net_backward(net, batch, dt);
  const auto n = static_cast<int>(InteractionNet::parameter_count());
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);

  GradCheck out;
  InteractionNet probe = net;
  const std::vector<bool> pattern = activation_pattern(net, batch);
  for (int k = 0; k < n && out.checked < count; ++k) {
    const int i = idx[static_cast<std::size_t>(k)];
    const double saved = probe.parameters()[i];
    probe.parameters()[i] = saved + h;
    const double up = loss(probe, batch, dt);
    const bool same_up = activation_pattern(probe, batch) == pattern;
    probe.parameters()[i] = saved - h;
    const double down = loss(probe, batch, dt);
    const bool same_down = activation_pattern(probe, batch) == pattern;
    probe.parameters()[i] = saved;
    if (!same_up || !same_down) {
      ++out.skipped;
      continue;
    }
    const double numeric = (up - down) / (2.0 * h);
    const double a = analytic.gradient[i];
    const double scale = std::max({std::abs(a), std::abs(numeric), 1e-12});
    out.worst_relative = std::max(out.worst_relative, std::abs(a - numeric) / scale);
    ++out.checked;
  }
  return out;
}

// Flow samples from an affine ground-truth interaction field.
inline std::vector<FlowSample> synthetic_batch(int n, std::uint64_t seed, double dt) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> px(0.0, 640.0), py(0.0, 480.0), c(-1.0, 1.0);
  std::vector<FlowSample> out;
  for (int i = 0; i < n; ++i) {
    FlowSample s;
    s.pixel = {px(rng), py(rng)};
    s.cmd = {0.025 * c(rng), 0.05 * c(rng)};
    Mat2 L;
    L << -3000.0 + s.pixel.y(), 400.0 - s.pixel.x(), 2.0 * s.pixel.x(), -500.0;
    s.flow = L * Vec2(s.cmd.v, s.cmd.omega) * dt;
    s.id = i;
    out.push_back(s);
  }
  return out;
}

}  // namespace lbvs::test

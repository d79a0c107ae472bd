#pragma once

#include <array>
#include <cstdint>
#include <span>

#include <Eigen/Core>

#include "lbvs/sim.hpp"

namespace lbvs {

/// One optical-flow training sample: the pixel at frame t, its displacement
/// to frame t+1 and the command active over that frame interval.
struct FlowSample {
  Vec2 pixel = Vec2::Zero();
  Vec2 flow = Vec2::Zero();  // pixels per frame
  ControlCommand cmd;
  std::int64_t frame = 0;
  int id = 0;
};

/// ReLU MLP 2-64-64-64-4 mapping a pixel to the 2x2 interaction matrix.
///
/// All weights and biases live in one flat parameter vector. Layer l occupies
/// a row-major (out x in) weight block followed by its bias. Inputs are
/// normalized as (u - input_offset) / input_scale, and column c of the output
/// matrix is multiplied by output_scale[c] so the raw network outputs stay
/// O(1) while L carries pixels/meter and pixels/radian.
class InteractionNet {
 public:
  static constexpr std::array<int, 5> kLayerSizes{2, 64, 64, 64, 4};
  static constexpr int kLayerCount = 4;

  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using WeightMap = Eigen::Map<RowMajor>;
  using ConstWeightMap = Eigen::Map<const RowMajor>;
  using BiasMap = Eigen::Map<Eigen::VectorXd>;
  using ConstBiasMap = Eigen::Map<const Eigen::VectorXd>;

  /// Zero weights with identity normalization.
  InteractionNet();

  /// Weights and biases drawn uniformly from [-init_range, init_range].
  static InteractionNet random(std::uint64_t seed, double init_range = 0.05);

  static constexpr std::size_t parameter_count() {
    std::size_t n = 0;
    for (int l = 0; l < kLayerCount; ++l) {
      n += static_cast<std::size_t>(kLayerSizes[l + 1]) * (kLayerSizes[l] + 1);
    }
    return n;
  }
  static std::size_t weight_offset(int layer);
  static std::size_t bias_offset(int layer);

  Eigen::VectorXd& parameters() { return params_; }
  const Eigen::VectorXd& parameters() const { return params_; }

  WeightMap weight(int layer) { return weight_of(params_, layer); }
  ConstWeightMap weight(int layer) const { return weight_of(params_, layer); }
  BiasMap bias(int layer) { return bias_of(params_, layer); }
  ConstBiasMap bias(int layer) const { return bias_of(params_, layer); }

  /// Views into any vector laid out like the parameters (e.g. a gradient).
  static WeightMap weight_of(Eigen::VectorXd& flat, int layer);
  static ConstWeightMap weight_of(const Eigen::VectorXd& flat, int layer);
  static BiasMap bias_of(Eigen::VectorXd& flat, int layer);
  static ConstBiasMap bias_of(const Eigen::VectorXd& flat, int layer);

  Vec2 input_offset = Vec2::Zero();
  Vec2 input_scale = Vec2::Ones();
  Vec2 output_scale = Vec2::Ones();

  /// L(u) for a single pixel.
  Mat2 operator()(const Vec2& pixel) const;

  /// Raw 4xB outputs for a 2xB block of pixels (before output scaling).
  Eigen::MatrixXd forward_raw(const Eigen::Matrix2Xd& pixels) const;

  /// Throws kCorruptModel when any weight or normalization constant is not
  /// finite, or a scale is zero.
  void check_finite() const;

  /// Equivalent network with the input normalization folded into the first
  /// layer and identity normalization.
  InteractionNet with_folded_input_normalization() const;

 private:
  Eigen::VectorXd params_;
};

/// Forward pass; throws kCorruptModel for non-finite weights.
Mat2 net_forward(const InteractionNet& net, const Vec2& pixel);

/// Mean over the batch of ||L(u) * [v, omega] * dt - f||^2 (pixels^2).
double loss(const InteractionNet& net, std::span<const FlowSample> batch, double dt);

struct LossGradient {
  double loss = 0.0;
  Eigen::VectorXd gradient;  // same layout as InteractionNet::parameters()
};

/// Exact gradient of `loss` with respect to every weight and bias.
LossGradient net_backward(const InteractionNet& net, std::span<const FlowSample> batch,
                          double dt);

}  // namespace lbvs

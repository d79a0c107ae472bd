#include "lbvs/net.hpp"

#include <cmath>
#include <random>

#include "lbvs/error.hpp"

namespace lbvs {

namespace {

constexpr auto kSizes = InteractionNet::kLayerSizes;
constexpr int kLayers = InteractionNet::kLayerCount;

std::size_t layer_block(int layer) {
  return static_cast<std::size_t>(kSizes[layer + 1]) * (kSizes[layer] + 1);
}

Eigen::Matrix2Xd normalize(const InteractionNet& net, const Eigen::Matrix2Xd& pixels) {
  Eigen::Matrix2Xd x = pixels.colwise() - net.input_offset;
  x.row(0) /= net.input_scale.x();
  x.row(1) /= net.input_scale.y();
  return x;
}

Eigen::Matrix2Xd pixels_of(std::span<const FlowSample> batch) {
  Eigen::Matrix2Xd pixels(2, static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) pixels.col(static_cast<Eigen::Index>(i)) = batch[i].pixel;
  return pixels;
}

// Residuals r_i = L(u_i) [v, w] dt - f_i given raw outputs (4 x B).
Eigen::Matrix2Xd residuals(const InteractionNet& net, const Eigen::MatrixXd& raw,
                           std::span<const FlowSample> batch, double dt) {
  Eigen::Matrix2Xd r(2, raw.cols());
  const double sv = net.output_scale.x();
  const double sw = net.output_scale.y();
  for (Eigen::Index i = 0; i < raw.cols(); ++i) {
    const FlowSample& s = batch[static_cast<std::size_t>(i)];
    const double a = sv * s.cmd.v * dt;
    const double b = sw * s.cmd.omega * dt;
    r(0, i) = raw(0, i) * a + raw(1, i) * b - s.flow.x();
    r(1, i) = raw(2, i) * a + raw(3, i) * b - s.flow.y();
  }
  return r;
}

}  // namespace

InteractionNet::InteractionNet() : params_(Eigen::VectorXd::Zero(parameter_count())) {}

InteractionNet InteractionNet::random(std::uint64_t seed, double init_range) {
  InteractionNet net;
  std::mt19937_64 rng(mix_seed(seed, 0x11e7ULL));
  std::uniform_real_distribution<double> dist(-init_range, init_range);
  for (Eigen::Index i = 0; i < net.params_.size(); ++i) net.params_[i] = dist(rng);
  return net;
}

std::size_t InteractionNet::weight_offset(int layer) {
  std::size_t offset = 0;
  for (int l = 0; l < layer; ++l) offset += layer_block(l);
  return offset;
}

std::size_t InteractionNet::bias_offset(int layer) {
  return weight_offset(layer) + static_cast<std::size_t>(kSizes[layer + 1]) * kSizes[layer];
}

InteractionNet::WeightMap InteractionNet::weight_of(Eigen::VectorXd& flat, int layer) {
  return {flat.data() + weight_offset(layer), kSizes[layer + 1], kSizes[layer]};
}
InteractionNet::ConstWeightMap InteractionNet::weight_of(const Eigen::VectorXd& flat,
                                                         int layer) {
  return {flat.data() + weight_offset(layer), kSizes[layer + 1], kSizes[layer]};
}
InteractionNet::BiasMap InteractionNet::bias_of(Eigen::VectorXd& flat, int layer) {
  return {flat.data() + bias_offset(layer), kSizes[layer + 1]};
}
InteractionNet::ConstBiasMap InteractionNet::bias_of(const Eigen::VectorXd& flat, int layer) {
  return {flat.data() + bias_offset(layer), kSizes[layer + 1]};
}

Eigen::MatrixXd InteractionNet::forward_raw(const Eigen::Matrix2Xd& pixels) const {
  Eigen::MatrixXd a = normalize(*this, pixels);
  for (int l = 0; l < kLayers; ++l) {
    Eigen::MatrixXd z = weight(l) * a;
    z.colwise() += bias(l);
    if (l + 1 < kLayers) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  return a;
}

Mat2 InteractionNet::operator()(const Vec2& pixel) const {
  const Eigen::MatrixXd raw = forward_raw(pixel);
  Mat2 out;
  out << raw(0, 0) * output_scale.x(), raw(1, 0) * output_scale.y(),
      raw(2, 0) * output_scale.x(), raw(3, 0) * output_scale.y();
  return out;
}

void InteractionNet::check_finite() const {
  if (!params_.allFinite() || !input_offset.allFinite() || !input_scale.allFinite() ||
      !output_scale.allFinite()) {
    throw Error(ErrorCode::kCorruptModel, "interaction net has non-finite parameters");
  }
  if (input_scale.x() == 0.0 || input_scale.y() == 0.0) {
    throw Error(ErrorCode::kCorruptModel, "interaction net has a zero input scale");
  }
}

InteractionNet InteractionNet::with_folded_input_normalization() const {
  InteractionNet out = *this;
  // W (u - o) / s + b = (W diag(1/s)) u + (b - W diag(1/s) o)
  RowMajor w = weight(0);
  w.col(0) /= input_scale.x();
  w.col(1) /= input_scale.y();
  out.weight(0) = w;
  out.bias(0) = bias(0) - w * input_offset;
  out.input_offset = Vec2::Zero();
  out.input_scale = Vec2::Ones();
  return out;
}

Mat2 net_forward(const InteractionNet& net, const Vec2& pixel) {
  net.check_finite();
  return net(pixel);
}

double loss(const InteractionNet& net, std::span<const FlowSample> batch, double dt) {
  if (batch.empty()) throw Error(ErrorCode::kInvalidInput, "loss: empty batch");
  const Eigen::MatrixXd raw = net.forward_raw(pixels_of(batch));
  return residuals(net, raw, batch, dt).squaredNorm() / static_cast<double>(batch.size());
}

LossGradient net_backward(const InteractionNet& net, std::span<const FlowSample> batch,
                          double dt) {
  if (batch.empty()) throw Error(ErrorCode::kInvalidInput, "net_backward: empty batch");
  const auto n = static_cast<Eigen::Index>(batch.size());

  // Forward, keeping every layer input.
  std::array<Eigen::MatrixXd, kLayers + 1> act;
  act[0] = normalize(net, pixels_of(batch));
  for (int l = 0; l < kLayers; ++l) {
    Eigen::MatrixXd z = net.weight(l) * act[l];
    z.colwise() += net.bias(l);
    if (l + 1 < kLayers) z = z.cwiseMax(0.0);
    act[l + 1] = std::move(z);
  }
  const Eigen::Matrix2Xd r = residuals(net, act[kLayers], batch, dt);

  LossGradient out;
  out.loss = r.squaredNorm() / static_cast<double>(n);
  out.gradient = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(InteractionNet::parameter_count()));

  // d loss / d raw outputs.
  Eigen::MatrixXd delta(4, n);
  const double scale = 2.0 / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const FlowSample& s = batch[static_cast<std::size_t>(i)];
    const double a = net.output_scale.x() * s.cmd.v * dt;
    const double b = net.output_scale.y() * s.cmd.omega * dt;
    delta(0, i) = scale * r(0, i) * a;
    delta(1, i) = scale * r(0, i) * b;
    delta(2, i) = scale * r(1, i) * a;
    delta(3, i) = scale * r(1, i) * b;
  }

  for (int l = kLayers - 1; l >= 0; --l) {
    InteractionNet::weight_of(out.gradient, l) = delta * act[l].transpose();
    InteractionNet::bias_of(out.gradient, l) = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd back = net.weight(l).transpose() * delta;
    // ReLU derivative: the stored activation is positive exactly where the
    // pre-activation was.
    delta = back.cwiseProduct((act[l].array() > 0.0).cast<double>().matrix());
  }
  return out;
}

}  // namespace lbvs

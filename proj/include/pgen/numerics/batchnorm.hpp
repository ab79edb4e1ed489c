#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <vector>

#include "pgen/numerics/tensor.hpp"

namespace pgen {

enum class Mode { Train, Infer };

// Per-channel affine normalization. gamma/beta/running stats are (C, 1, 1, 1).
template <typename Real>
struct BatchNormParams {
  Tensor<Real> gamma;
  Tensor<Real> beta;
  Tensor<Real> running_mean;
  Tensor<Real> running_var;
  Real epsilon = Real(1e-5);
  // Fraction of the running statistic kept on each update.
  Real momentum = Real(0.9);

  BatchNormParams() = default;
  explicit BatchNormParams(std::size_t channels)
      : gamma(channels, 1, 1, 1, Real(1)),
        beta(channels, 1, 1, 1),
        running_mean(channels, 1, 1, 1),
        running_var(channels, 1, 1, 1, Real(1)) {}

  std::size_t channels() const { return gamma.shape().n; }
};

// Values the backward pass needs from a train-mode forward call.
template <typename Real>
struct BatchStats {
  std::vector<Real> mean;
  std::vector<Real> variance;  // biased, as used for normalization
  std::vector<Real> inv_std;
  Tensor<Real> normalized;     // x̂
};

template <typename Real>
struct BatchNormGrads {
  Tensor<Real> input;
  Tensor<Real> gamma;
  Tensor<Real> beta;
};

namespace detail {

template <typename Real>
Eigen::Map<const Eigen::Array<Real, Eigen::Dynamic, 1>> plane_array(const Real* p, std::size_t n) {
  return Eigen::Map<const Eigen::Array<Real, Eigen::Dynamic, 1>>(p, static_cast<Eigen::Index>(n));
}

inline void check_bn_channels(const Shape& in, std::size_t channels) {
  if (in.c != channels)
    throw ShapeError("batchnorm: input " + to_string(in) + " has " + std::to_string(in.c) +
                     " channels, parameters have " + std::to_string(channels));
}

}  // namespace detail

// Normalizes with the running statistics.
template <typename Real>
Tensor<Real> batchnorm_infer(const Tensor<Real>& input, const BatchNormParams<Real>& params) {
  const Shape& in = input.shape();
  detail::check_bn_channels(in, params.channels());
  const std::size_t hw = in.plane();
  Tensor<Real> output(in);
  for (std::size_t c = 0; c < in.c; ++c) {
    const Real scale = params.gamma[c] / std::sqrt(params.running_var[c] + params.epsilon);
    const Real shift = params.beta[c] - params.running_mean[c] * scale;
    for (std::size_t n = 0; n < in.n; ++n) {
      const Real* x = input.plane(n, c);
      Real* y = output.plane(n, c);
      for (std::size_t i = 0; i < hw; ++i) y[i] = x[i] * scale + shift;
    }
  }
  return output;
}

// In train mode the batch statistics are used and the running statistics
// in params are updated; in infer mode params are read only.
template <typename Real>
Tensor<Real> batchnorm_forward(const Tensor<Real>& input, BatchNormParams<Real>& params, Mode mode,
                               BatchStats<Real>* stats = nullptr) {
  if (mode == Mode::Infer) return batchnorm_infer(input, params);
  const Shape& in = input.shape();
  const std::size_t channels = params.channels();
  detail::check_bn_channels(in, channels);
  const std::size_t hw = in.plane();
  Tensor<Real> output(in);

  const std::size_t count = in.n * hw;
  if (count < 2) throw ShapeError("batchnorm: train mode needs at least 2 values per channel, got " + to_string(in));

  BatchStats<Real> local;
  BatchStats<Real>& s = stats ? *stats : local;
  s.mean.assign(channels, Real(0));
  s.variance.assign(channels, Real(0));
  s.inv_std.assign(channels, Real(0));
  s.normalized = Tensor<Real>(in);

  for (std::size_t c = 0; c < channels; ++c) {
    // Per-plane partial sums in Real, combined across planes in double.
    double sum = 0.0;
    for (std::size_t n = 0; n < in.n; ++n) {
      sum += static_cast<double>(detail::plane_array(input.plane(n, c), hw).sum());
    }
    const double mean = sum / static_cast<double>(count);
    const Real mean_r = static_cast<Real>(mean);
    double sq = 0.0;
    for (std::size_t n = 0; n < in.n; ++n) {
      sq += static_cast<double>((detail::plane_array(input.plane(n, c), hw) - mean_r).square().sum());
    }
    const double var = sq / static_cast<double>(count);
    const Real inv_std = static_cast<Real>(1.0 / std::sqrt(var + static_cast<double>(params.epsilon)));
    s.mean[c] = mean_r;
    s.variance[c] = static_cast<Real>(var);
    s.inv_std[c] = inv_std;

    const Real g = params.gamma[c];
    const Real b = params.beta[c];
    const Real m = static_cast<Real>(mean);
    for (std::size_t n = 0; n < in.n; ++n) {
      const Real* x = input.plane(n, c);
      Real* xh = s.normalized.plane(n, c);
      Real* y = output.plane(n, c);
      for (std::size_t i = 0; i < hw; ++i) {
        xh[i] = (x[i] - m) * inv_std;
        y[i] = xh[i] * g + b;
      }
    }

    const Real unbiased = static_cast<Real>(sq / static_cast<double>(count - 1));
    params.running_mean[c] = params.momentum * params.running_mean[c] + (Real(1) - params.momentum) * m;
    params.running_var[c] = params.momentum * params.running_var[c] + (Real(1) - params.momentum) * unbiased;
  }
  return output;
}

// Train-mode backward; stats must come from the matching forward call.
template <typename Real>
BatchNormGrads<Real> batchnorm_backward(const BatchStats<Real>& stats, const BatchNormParams<Real>& params,
                                        const Tensor<Real>& grad_out) {
  const Shape& in = grad_out.shape();
  const std::size_t channels = params.channels();
  detail::check_bn_channels(in, channels);
  require_same_shape(stats.normalized.shape(), in, "batchnorm_backward");
  const std::size_t hw = in.plane();
  const double count = static_cast<double>(in.n * hw);

  BatchNormGrads<Real> grads{Tensor<Real>(in), Tensor<Real>(params.gamma.shape()), Tensor<Real>(params.beta.shape())};
  for (std::size_t c = 0; c < channels; ++c) {
    double sum_dy = 0.0;
    double sum_dy_xh = 0.0;
    for (std::size_t n = 0; n < in.n; ++n) {
      const auto dy = detail::plane_array(grad_out.plane(n, c), hw);
      sum_dy += static_cast<double>(dy.sum());
      sum_dy_xh += static_cast<double>((dy * detail::plane_array(stats.normalized.plane(n, c), hw)).sum());
    }
    grads.beta[c] = static_cast<Real>(sum_dy);
    grads.gamma[c] = static_cast<Real>(sum_dy_xh);

    const Real scale = params.gamma[c] * stats.inv_std[c];
    const Real mean_dy = static_cast<Real>(sum_dy / count);
    const Real mean_dy_xh = static_cast<Real>(sum_dy_xh / count);
    for (std::size_t n = 0; n < in.n; ++n) {
      const Real* dy = grad_out.plane(n, c);
      const Real* xh = stats.normalized.plane(n, c);
      Real* dx = grads.input.plane(n, c);
      for (std::size_t i = 0; i < hw; ++i) dx[i] = scale * (dy[i] - mean_dy - xh[i] * mean_dy_xh);
    }
  }
  return grads;
}

// Infer-mode backward: the layer is a fixed per-channel affine map.
template <typename Real>
Tensor<Real> batchnorm_backward_infer(const BatchNormParams<Real>& params, const Tensor<Real>& grad_out) {
  const Shape& in = grad_out.shape();
  detail::check_bn_channels(in, params.channels());
  Tensor<Real> grad_in(in);
  for (std::size_t c = 0; c < in.c; ++c) {
    const Real scale = params.gamma[c] / std::sqrt(params.running_var[c] + params.epsilon);
    for (std::size_t n = 0; n < in.n; ++n) {
      const Real* dy = grad_out.plane(n, c);
      Real* dx = grad_in.plane(n, c);
      for (std::size_t i = 0; i < in.plane(); ++i) dx[i] = dy[i] * scale;
    }
  }
  return grad_in;
}

}  // namespace pgen

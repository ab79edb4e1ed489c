#pragma once

#include <cstddef>

#include "pgen/numerics/tensor.hpp"

namespace pgen {

template <typename Real>
Tensor<Real> relu_forward(const Tensor<Real>& input) {
  Tensor<Real> out(input.shape());
  for (std::size_t i = 0; i < input.size(); ++i) out[i] = input[i] > Real(0) ? input[i] : Real(0);
  return out;
}

template <typename Real>
void relu_inplace(Tensor<Real>& t) {
  for (std::size_t i = 0; i < t.size(); ++i)
    if (!(t[i] > Real(0))) t[i] = Real(0);
}

// Masks grad by (x > 0). Accepts either the pre-activation input or the
// activation output, since both are positive at exactly the same sites.
template <typename Real>
Tensor<Real> relu_backward(const Tensor<Real>& activation, const Tensor<Real>& grad_out) {
  require_same_shape(activation.shape(), grad_out.shape(), "relu_backward");
  Tensor<Real> grad(grad_out.shape());
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = activation[i] > Real(0) ? grad_out[i] : Real(0);
  return grad;
}

template <typename Real>
Tensor<Real> add_forward(const Tensor<Real>& a, const Tensor<Real>& b) {
  require_same_shape(a.shape(), b.shape(), "add");
  Tensor<Real> out(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

template <typename Real>
void add_inplace(Tensor<Real>& a, const Tensor<Real>& b) {
  require_same_shape(a.shape(), b.shape(), "add");
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

template <typename Real>
struct AddGrads {
  Tensor<Real> a;
  Tensor<Real> b;
};

template <typename Real>
AddGrads<Real> add_backward(const Tensor<Real>& grad_out) {
  return {grad_out, grad_out};
}

// Stacks b's channels after a's.
template <typename Real>
Tensor<Real> concat_channels(const Tensor<Real>& a, const Tensor<Real>& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.n != sb.n || sa.h != sb.h || sa.w != sb.w)
    throw ShapeError("concat_channels: incompatible " + to_string(sa) + " and " + to_string(sb));
  Tensor<Real> out(sa.n, sa.c + sb.c, sa.h, sa.w);
  const std::size_t hw = sa.plane();
  for (std::size_t n = 0; n < sa.n; ++n) {
    std::copy(a.plane(n, 0), a.plane(n, 0) + sa.c * hw, out.plane(n, 0));
    std::copy(b.plane(n, 0), b.plane(n, 0) + sb.c * hw, out.plane(n, sa.c));
  }
  return out;
}

// Channels [first, first + count) of t.
template <typename Real>
Tensor<Real> slice_channels(const Tensor<Real>& t, std::size_t first, std::size_t count) {
  const Shape& s = t.shape();
  if (first + count > s.c)
    throw ShapeError("slice_channels: range [" + std::to_string(first) + ", " + std::to_string(first + count) +
                     ") outside " + to_string(s));
  Tensor<Real> out(s.n, count, s.h, s.w);
  for (std::size_t n = 0; n < s.n; ++n)
    std::copy(t.plane(n, first), t.plane(n, first) + count * s.plane(), out.plane(n, 0));
  return out;
}

template <typename Real>
AddGrads<Real> concat_backward(const Tensor<Real>& grad_out, std::size_t channels_a) {
  const std::size_t total = grad_out.shape().c;
  if (channels_a > total) throw ShapeError("concat_backward: split point past channel count");
  return {slice_channels(grad_out, 0, channels_a), slice_channels(grad_out, channels_a, total - channels_a)};
}

template <typename Real>
struct LossResult {
  Real loss{};
  Tensor<Real> grad;
};

// Mean squared error over every element, with its gradient w.r.t. pred.
template <typename Real>
LossResult<Real> mse_loss(const Tensor<Real>& pred, const Tensor<Real>& target) {
  require_same_shape(pred.shape(), target.shape(), "mse_loss");
  LossResult<Real> r{Real(0), Tensor<Real>(pred.shape())};
  if (pred.empty()) return r;
  const double count = static_cast<double>(pred.size());
  double sum = 0.0;
  const Real scale = static_cast<Real>(2.0 / count);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const Real d = pred[i] - target[i];
    sum += static_cast<double>(d) * static_cast<double>(d);
    r.grad[i] = scale * d;
  }
  r.loss = static_cast<Real>(sum / count);
  return r;
}

}  // namespace pgen

#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

#include "pgen/common/parallel.hpp"
#include "pgen/numerics/tensor.hpp"

namespace pgen {

// Weights are (Cout, Cin, K, K); bias is (Cout, 1, 1, 1).
template <typename Real>
struct ConvParams {
  Tensor<Real> weights;
  Tensor<Real> bias;

  ConvParams() = default;
  ConvParams(std::size_t in_channels, std::size_t out_channels, std::size_t kernel)
      : weights(out_channels, in_channels, kernel, kernel), bias(out_channels, 1, 1, 1) {}

  std::size_t out_channels() const { return weights.shape().n; }
  std::size_t in_channels() const { return weights.shape().c; }
  std::size_t kernel() const { return weights.shape().h; }
};

template <typename Real>
struct ConvGrads {
  Tensor<Real> input;
  Tensor<Real> weights;
  Tensor<Real> bias;
};

namespace detail {

template <typename Real>
using RowMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Real>
using MatrixMap = Eigen::Map<RowMatrix<Real>>;
template <typename Real>
using ConstMatrixMap = Eigen::Map<const RowMatrix<Real>>;

// Unfolds one C×H×W sample into a (C·K·K) × (H·W) matrix for "same" zero
// padding at stride 1.
template <typename Real>
void im2col(const Real* src, std::size_t channels, std::size_t height, std::size_t width, std::size_t kernel,
            Real* col) {
  const long pad = static_cast<long>(kernel / 2);
  const long h = static_cast<long>(height);
  const long w = static_cast<long>(width);
  for (std::size_t c = 0; c < channels; ++c) {
    const Real* plane = src + c * height * width;
    for (std::size_t ky = 0; ky < kernel; ++ky) {
      for (std::size_t kx = 0; kx < kernel; ++kx) {
        Real* row = col + ((c * kernel + ky) * kernel + kx) * height * width;
        const long dy = static_cast<long>(ky) - pad;
        const long dx = static_cast<long>(kx) - pad;
        const long x_lo = std::max(0L, -dx);
        const long x_hi = std::min(w, w - dx);
        for (long y = 0; y < h; ++y) {
          Real* out = row + y * w;
          const long sy = y + dy;
          if (sy < 0 || sy >= h || x_lo >= x_hi) {
            std::fill(out, out + w, Real(0));
            continue;
          }
          const Real* in = plane + sy * w;
          std::fill(out, out + x_lo, Real(0));
          std::copy(in + x_lo + dx, in + x_hi + dx, out + x_lo);
          std::fill(out + x_hi, out + w, Real(0));
        }
      }
    }
  }
}

// Adjoint of im2col: accumulates the column matrix back into the sample.
template <typename Real>
void col2im(const Real* col, std::size_t channels, std::size_t height, std::size_t width, std::size_t kernel,
            Real* dst) {
  const long pad = static_cast<long>(kernel / 2);
  const long h = static_cast<long>(height);
  const long w = static_cast<long>(width);
  std::fill(dst, dst + channels * height * width, Real(0));
  for (std::size_t c = 0; c < channels; ++c) {
    Real* plane = dst + c * height * width;
    for (std::size_t ky = 0; ky < kernel; ++ky) {
      for (std::size_t kx = 0; kx < kernel; ++kx) {
        const Real* row = col + ((c * kernel + ky) * kernel + kx) * height * width;
        const long dy = static_cast<long>(ky) - pad;
        const long dx = static_cast<long>(kx) - pad;
        const long x_lo = std::max(0L, -dx);
        const long x_hi = std::min(w, w - dx);
        for (long y = 0; y < h; ++y) {
          const long sy = y + dy;
          if (sy < 0 || sy >= h) continue;
          const Real* in = row + y * w;
          Real* out = plane + sy * w + dx;
          for (long x = x_lo; x < x_hi; ++x) out[x] += in[x];
        }
      }
    }
  }
}

inline void check_conv_input(const Shape& input, const Shape& weights) {
  if (input.c != weights.c)
    throw ShapeError("conv2d: input " + to_string(input) + " has " + std::to_string(input.c) +
                     " channels but weights " + to_string(weights) + " expect " + std::to_string(weights.c));
  if (weights.h != weights.w || weights.h % 2 == 0)
    throw ShapeError("conv2d: kernel must be square and odd, got " + to_string(weights));
  if (input.h == 0 || input.w == 0) throw ShapeError("conv2d: empty spatial extent " + to_string(input));
}

}  // namespace detail

// Stride-1 cross-correlation with "same" zero padding.
template <typename Real>
Tensor<Real> conv2d_forward(const Tensor<Real>& input, const ConvParams<Real>& params) {
  const Shape& in = input.shape();
  detail::check_conv_input(in, params.weights.shape());
  const std::size_t cout = params.out_channels();
  const std::size_t k = params.kernel();
  const std::size_t hw = in.plane();
  const std::size_t rows = in.c * k * k;

  Tensor<Real> output(in.n, cout, in.h, in.w);
  detail::ConstMatrixMap<Real> weights(params.weights.data(), cout, rows);
  Eigen::Map<const Eigen::Matrix<Real, Eigen::Dynamic, 1>> bias(params.bias.data(), cout);

  parallel_chunks(in.n, thread_count(), [&](std::size_t begin, std::size_t end, int) {
    AlignedVector<Real> col(rows * hw);
    for (std::size_t n = begin; n < end; ++n) {
      detail::im2col(input.plane(n, 0), in.c, in.h, in.w, k, col.data());
      detail::MatrixMap<Real> out(output.plane(n, 0), cout, hw);
      out.noalias() = weights * detail::ConstMatrixMap<Real>(col.data(), rows, hw);
      for (std::size_t c = 0; c < cout; ++c) out.row(static_cast<Eigen::Index>(c)).array() += bias[static_cast<Eigen::Index>(c)];
    }
  });
  return output;
}

// Gradients of sum(grad_out ⊙ conv2d_forward(input, params)).
template <typename Real>
ConvGrads<Real> conv2d_backward(const Tensor<Real>& input, const ConvParams<Real>& params,
                                const Tensor<Real>& grad_out, bool need_input_grad = true) {
  const Shape& in = input.shape();
  detail::check_conv_input(in, params.weights.shape());
  const std::size_t cout = params.out_channels();
  require_same_shape(grad_out.shape(), Shape{in.n, cout, in.h, in.w}, "conv2d_backward");
  const std::size_t k = params.kernel();
  const std::size_t hw = in.plane();
  const std::size_t rows = in.c * k * k;

  ConvGrads<Real> grads;
  if (need_input_grad) grads.input = Tensor<Real>(in);
  grads.weights = Tensor<Real>(params.weights.shape());
  grads.bias = Tensor<Real>(params.bias.shape());

  detail::ConstMatrixMap<Real> weights(params.weights.data(), cout, rows);
  const int workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(thread_count()), std::max<std::size_t>(in.n, 1)));
  std::vector<detail::RowMatrix<Real>> partial_w(static_cast<std::size_t>(workers));
  std::vector<Eigen::Matrix<Real, Eigen::Dynamic, 1>> partial_b(static_cast<std::size_t>(workers));

  parallel_chunks(in.n, workers, [&](std::size_t begin, std::size_t end, int worker) {
    auto& gw = partial_w[static_cast<std::size_t>(worker)];
    auto& gb = partial_b[static_cast<std::size_t>(worker)];
    gw = detail::RowMatrix<Real>::Zero(cout, rows);
    gb = Eigen::Matrix<Real, Eigen::Dynamic, 1>::Zero(cout);
    AlignedVector<Real> col(rows * hw);
    for (std::size_t n = begin; n < end; ++n) {
      detail::ConstMatrixMap<Real> go(grad_out.plane(n, 0), cout, hw);
      detail::im2col(input.plane(n, 0), in.c, in.h, in.w, k, col.data());
      detail::MatrixMap<Real> col_mat(col.data(), rows, hw);
      gw.noalias() += go * col_mat.transpose();
      gb += go.rowwise().sum();
      if (need_input_grad) {
        col_mat.noalias() = weights.transpose() * go;
        detail::col2im(col.data(), in.c, in.h, in.w, k, grads.input.plane(n, 0));
      }
    }
  });

  detail::MatrixMap<Real> gw(grads.weights.data(), cout, rows);
  Eigen::Map<Eigen::Matrix<Real, Eigen::Dynamic, 1>> gb(grads.bias.data(), cout);
  gw.setZero();
  gb.setZero();
  for (int t = 0; t < workers; ++t) {
    gw += partial_w[static_cast<std::size_t>(t)];
    gb += partial_b[static_cast<std::size_t>(t)];
  }
  return grads;
}

}  // namespace pgen

#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <vector>

#include "pgen/common/error.hpp"

namespace pgen {

using TransformMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline bool is_supported_transform_size(std::size_t size) {
  return size == 8 || size == 16 || size == 32 || size == 64;
}

// Orthonormal DCT-II basis: row k holds the k-th basis vector.
inline const TransformMatrix& dct_basis(std::size_t size) {
  if (!is_supported_transform_size(size))
    throw ConfigError("dct: unsupported block size " + std::to_string(size) + " (expected 8, 16, 32 or 64)");
  static const auto build = [](std::size_t n) {
    TransformMatrix t(n, n);
    for (std::size_t k = 0; k < n; ++k) {
      const double alpha = std::sqrt((k == 0 ? 1.0 : 2.0) / static_cast<double>(n));
      for (std::size_t i = 0; i < n; ++i)
        t(k, i) = alpha * std::cos(std::numbers::pi * (2.0 * i + 1.0) * k / (2.0 * n));
    }
    return t;
  };
  static const TransformMatrix b8 = build(8), b16 = build(16), b32 = build(32), b64 = build(64);
  switch (size) {
    case 8: return b8;
    case 16: return b16;
    case 32: return b32;
    default: return b64;
  }
}

// Square block of size×size reals, row-major.
inline TransformMatrix dct2d(const TransformMatrix& block) {
  if (block.rows() != block.cols()) throw ConfigError("dct2d: block must be square");
  const TransformMatrix& t = dct_basis(static_cast<std::size_t>(block.rows()));
  return t * block * t.transpose();
}

inline TransformMatrix idct2d(const TransformMatrix& coeffs) {
  if (coeffs.rows() != coeffs.cols()) throw ConfigError("idct2d: block must be square");
  const TransformMatrix& t = dct_basis(static_cast<std::size_t>(coeffs.rows()));
  return t.transpose() * coeffs * t;
}

inline double qp_to_qstep(int qp) {
  if (qp < 0 || qp > 51) throw ConfigError("qp " + std::to_string(qp) + " outside [0, 51]");
  return std::exp2((qp - 4) / 6.0);
}

// Round half away from zero: sign(c)·floor(|c|/qstep + 0.5).
inline std::vector<std::int32_t> quantize(const TransformMatrix& coeffs, double qstep) {
  if (!(qstep > 0.0)) throw ConfigError("quantize: qstep must be positive");
  std::vector<std::int32_t> levels(static_cast<std::size_t>(coeffs.size()));
  const double* c = coeffs.data();
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double mag = std::floor(std::abs(c[i]) / qstep + 0.5);
    levels[i] = static_cast<std::int32_t>(c[i] < 0.0 ? -mag : mag);
  }
  return levels;
}

inline TransformMatrix dequantize(const std::vector<std::int32_t>& levels, std::size_t size, double qstep) {
  if (levels.size() != size * size) throw ShapeError("dequantize: level count does not match block size");
  TransformMatrix out(size, size);
  double* c = out.data();
  for (std::size_t i = 0; i < levels.size(); ++i) c[i] = levels[i] * qstep;
  return out;
}

// Bits of the signed Exp-Golomb code se(v).
inline std::uint32_t signed_exp_golomb_length(std::int32_t v) {
  const std::uint64_t code = v > 0 ? 2 * static_cast<std::uint64_t>(v) - 1 : 2 * static_cast<std::uint64_t>(-static_cast<std::int64_t>(v));
  std::uint32_t log2 = 0;
  for (std::uint64_t x = code + 1; x > 1; x >>= 1) ++log2;
  return 2 * log2 + 1;
}

// Diagonal zig-zag scan order of a size×size block, as raster indices.
inline std::vector<std::size_t> zigzag_order(std::size_t size) {
  std::vector<std::size_t> order;
  order.reserve(size * size);
  for (std::size_t d = 0; d + 1 < 2 * size; ++d) {
    const std::size_t lo = d < size ? 0 : d - size + 1;
    const std::size_t hi = d < size ? d : size - 1;
    for (std::size_t k = lo; k <= hi; ++k) {
      const std::size_t row = d % 2 == 0 ? hi - (k - lo) : k;
      order.push_back(row * size + (d - row));
    }
  }
  return order;
}

inline const std::vector<std::size_t>& zigzag_scan(std::size_t size) {
  if (!is_supported_transform_size(size)) throw ConfigError("zigzag: unsupported block size " + std::to_string(size));
  static const std::vector<std::size_t> s8 = zigzag_order(8), s16 = zigzag_order(16), s32 = zigzag_order(32),
                                        s64 = zigzag_order(64);
  switch (size) {
    case 8: return s8;
    case 16: return s16;
    case 32: return s32;
    default: return s64;
  }
}

// Rate proxy: se(v) lengths over the zig-zag scan plus one terminator bit.
inline std::uint64_t level_bits(const std::vector<std::int32_t>& levels, std::size_t size) {
  if (levels.size() != size * size) throw ShapeError("level_bits: level count does not match block size");
  std::uint64_t bits = 1;
  for (std::size_t idx : zigzag_scan(size)) bits += signed_exp_golomb_length(levels[idx]);
  return bits;
}

}  // namespace pgen

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "pgen/codec/frame.hpp"

namespace pgen {

// Returned for identical frames so that differences stay finite.
inline constexpr double kPsnrCap = 100.0;

inline double mse(const FrameY& a, const FrameY& b) {
  require_same_dims(a, b, "mse");
  std::uint64_t sse = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const int d = static_cast<int>(a.pixels[i]) - static_cast<int>(b.pixels[i]);
    sse += static_cast<std::uint64_t>(d * d);
  }
  return a.pixels.empty() ? 0.0 : static_cast<double>(sse) / static_cast<double>(a.pixels.size());
}

inline double psnr(const FrameY& a, const FrameY& b) {
  const double m = mse(a, b);
  if (m == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / m));
}

inline double delta_psnr(const FrameY& original, const FrameY& decoded, const FrameY& enhanced) {
  return psnr(original, enhanced) - psnr(original, decoded);
}

// Sequence-level figures are means of per-frame values.
inline double mean_of(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

}  // namespace pgen

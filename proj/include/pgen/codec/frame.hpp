#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pgen/common/error.hpp"

namespace pgen {

// Single 8-bit luma plane, row-major.
struct FrameY {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  FrameY() = default;
  FrameY(std::size_t w, std::size_t h, std::uint8_t fill = 0) : width(w), height(h), pixels(w * h, fill) {}

  std::uint8_t& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
  std::uint8_t at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }

  friend bool operator==(const FrameY&, const FrameY&) = default;
};

inline std::string dims_string(std::size_t w, std::size_t h) { return std::to_string(w) + "x" + std::to_string(h); }

inline void require_same_dims(const FrameY& a, const FrameY& b, const char* op) {
  if (a.width != b.width || a.height != b.height)
    throw ShapeError(std::string(op) + ": frame size mismatch " + dims_string(a.width, a.height) + " vs " +
                     dims_string(b.width, b.height));
}

// Top-left region of size width×height.
inline FrameY crop(const FrameY& frame, std::size_t width, std::size_t height) {
  if (width > frame.width || height > frame.height)
    throw ShapeError("crop: " + dims_string(width, height) + " exceeds " + dims_string(frame.width, frame.height));
  FrameY out(width, height);
  for (std::size_t y = 0; y < height; ++y)
    std::copy_n(frame.pixels.begin() + static_cast<std::ptrdiff_t>(y * frame.width), width,
                out.pixels.begin() + static_cast<std::ptrdiff_t>(y * width));
  return out;
}

// Drops right/bottom remainders so both dimensions are multiples of unit.
inline FrameY crop_to_multiple(const FrameY& frame, std::size_t unit) {
  if (unit == 0) throw ConfigError("crop_to_multiple: unit must be positive");
  const std::size_t w = frame.width - frame.width % unit;
  const std::size_t h = frame.height - frame.height % unit;
  if (w == 0 || h == 0)
    throw DataError("frame " + dims_string(frame.width, frame.height) + " is smaller than one " + std::to_string(unit) +
                    "x" + std::to_string(unit) + " block");
  if (w == frame.width && h == frame.height) return frame;
  return crop(frame, w, h);
}

}  // namespace pgen

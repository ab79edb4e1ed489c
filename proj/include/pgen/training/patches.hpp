#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pgen/codec/frame.hpp"
#include "pgen/mask.hpp"

namespace pgen {

inline constexpr std::size_t kPatchSize = 64;

// Co-located distorted/mask/target windows of one frame.
struct PatchPair {
  std::vector<std::uint8_t> distorted;
  std::vector<float> mask;  // empty when no mask was generated
  std::vector<std::uint8_t> target;
  int qp = 0;
  // Origin, for tracing a patch back to its source.
  std::uint32_t clip = 0;
  std::uint32_t frame = 0;
  std::uint32_t x = 0;
  std::uint32_t y = 0;

  friend bool operator==(const PatchPair&, const PatchPair&) = default;
};

// Aligned, non-overlapping windows when stride == size; right and bottom
// remainders are dropped. mask may be null.
inline std::vector<PatchPair> extract_patches(const FrameY& original, const FrameY& distorted, const Mask* mask,
                                              std::size_t size = kPatchSize, std::size_t stride = kPatchSize) {
  require_same_dims(original, distorted, "extract_patches");
  if (mask && (mask->width != original.width || mask->height != original.height))
    throw ShapeError("extract_patches: mask " + dims_string(mask->width, mask->height) + " does not match frame " +
                     dims_string(original.width, original.height));
  if (size == 0 || stride == 0) throw ConfigError("extract_patches: size and stride must be positive");
  std::vector<PatchPair> out;
  if (original.width < size || original.height < size) return out;
  for (std::size_t y = 0; y + size <= original.height; y += stride) {
    for (std::size_t x = 0; x + size <= original.width; x += stride) {
      PatchPair p;
      p.x = static_cast<std::uint32_t>(x);
      p.y = static_cast<std::uint32_t>(y);
      p.distorted.resize(size * size);
      p.target.resize(size * size);
      if (mask) p.mask.resize(size * size);
      for (std::size_t r = 0; r < size; ++r) {
        const std::size_t src = (y + r) * original.width + x;
        std::copy_n(original.pixels.begin() + static_cast<std::ptrdiff_t>(src), size,
                    p.target.begin() + static_cast<std::ptrdiff_t>(r * size));
        std::copy_n(distorted.pixels.begin() + static_cast<std::ptrdiff_t>(src), size,
                    p.distorted.begin() + static_cast<std::ptrdiff_t>(r * size));
        if (mask)
          std::copy_n(mask->values.begin() + static_cast<std::ptrdiff_t>(src), size,
                      p.mask.begin() + static_cast<std::ptrdiff_t>(r * size));
      }
      out.push_back(std::move(p));
    }
  }
  return out;
}

}  // namespace pgen

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pgen/codec/frame.hpp"
#include "pgen/codec/partition_map.hpp"

namespace pgen {

enum class MaskKind { Mean, Boundary };

inline const char* to_string(MaskKind k) { return k == MaskKind::Mean ? "MEAN" : "BOUNDARY"; }

inline MaskKind parse_mask_kind(const std::string& s) {
  if (s == "mean" || s == "MEAN" || s == "mm" || s == "MM") return MaskKind::Mean;
  if (s == "boundary" || s == "BOUNDARY" || s == "bm" || s == "BM") return MaskKind::Boundary;
  throw ConfigError("unknown mask kind '" + s + "' (expected mean or boundary)");
}

// Real-valued guidance plane with the frame's dimensions.
struct Mask {
  std::size_t width = 0;
  std::size_t height = 0;
  MaskKind kind = MaskKind::Mean;
  std::vector<float> values;

  float at(std::size_t x, std::size_t y) const { return values[y * width + x]; }

  friend bool operator==(const Mask&, const Mask&) = default;
};

namespace detail {

inline void check_map_matches(const PartitionMap& map, std::size_t w, std::size_t h, const char* op) {
  if (map.width != w || map.height != h)
    throw ShapeError(std::string(op) + ": partition map " + dims_string(map.width, map.height) +
                     " does not match frame " + dims_string(w, h));
}

}  // namespace detail

// Fills each leaf with the mean of its decoded pixels, divided by 255.
inline Mask mean_mask(const FrameY& recon, const PartitionMap& map) {
  detail::check_map_matches(map, recon.width, recon.height, "mean_mask");
  validate(map);
  Mask m{recon.width, recon.height, MaskKind::Mean, std::vector<float>(recon.pixels.size(), 0.0f)};
  for (const Leaf& l : map.leaves) {
    std::uint64_t sum = 0;
    for (std::size_t y = l.y; y < l.y + l.size; ++y)
      for (std::size_t x = l.x; x < l.x + l.size; ++x) sum += recon.at(x, y);
    const double mean = static_cast<double>(sum) / static_cast<double>(l.size * l.size);
    const float v = static_cast<float>(mean / 255.0);
    for (std::size_t y = l.y; y < l.y + l.size; ++y)
      std::fill_n(m.values.begin() + static_cast<std::ptrdiff_t>(y * m.width + l.x), l.size, v);
  }
  return m;
}

// Marks the pixel on each side of every edge shared by two different leaves,
// giving bands two pixels wide. The frame border is not an edge.
inline Mask boundary_mask(const PartitionMap& map) {
  validate(map);
  const std::vector<std::uint32_t> owner = leaf_index_plane(map);
  Mask m{map.width, map.height, MaskKind::Boundary, std::vector<float>(owner.size(), 0.0f)};
  const std::size_t w = map.width;
  for (std::size_t y = 0; y < map.height; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t i = y * w + x;
      if (x + 1 < w && owner[i] != owner[i + 1]) m.values[i] = m.values[i + 1] = 1.0f;
      if (y + 1 < map.height && owner[i] != owner[i + w]) m.values[i] = m.values[i + w] = 1.0f;
    }
  }
  return m;
}

inline Mask make_mask(MaskKind kind, const FrameY& recon, const PartitionMap& map) {
  if (kind == MaskKind::Mean) return mean_mask(recon, map);
  detail::check_map_matches(map, recon.width, recon.height, "boundary_mask");
  return boundary_mask(map);
}

// 8-bit rendering (value × 255, rounded) for inspection.
inline FrameY render_mask(const Mask& mask) {
  FrameY f(mask.width, mask.height);
  for (std::size_t i = 0; i < mask.values.size(); ++i)
    f.pixels[i] = static_cast<std::uint8_t>(std::clamp(std::lround(mask.values[i] * 255.0), 0L, 255L));
  return f;
}

}  // namespace pgen

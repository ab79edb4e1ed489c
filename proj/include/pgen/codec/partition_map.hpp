#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "pgen/common/error.hpp"
#include "pgen/codec/frame.hpp"

namespace pgen {

struct Leaf {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t size = 0;

  friend bool operator==(const Leaf&, const Leaf&) = default;
};

// Raster order: ascending (y, x).
inline bool leaf_before(const Leaf& a, const Leaf& b) { return std::tie(a.y, a.x) < std::tie(b.y, b.x); }

inline bool is_power_of_two(std::size_t v) { return v != 0 && (v & (v - 1)) == 0; }

// Quadtree leaf set of one frame. ctu_size/min_cu describe the tree the
// leaves came from and are carried into the text format.
struct PartitionMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::size_t ctu_size = 64;
  std::size_t min_cu = 8;
  std::vector<Leaf> leaves;

  void sort_leaves() { std::sort(leaves.begin(), leaves.end(), leaf_before); }

  friend bool operator==(const PartitionMap&, const PartitionMap&) = default;
};

// Per-pixel index into map.leaves. Assumes the map is valid.
inline std::vector<std::uint32_t> leaf_index_plane(const PartitionMap& map) {
  std::vector<std::uint32_t> plane(map.width * map.height, 0);
  for (std::size_t i = 0; i < map.leaves.size(); ++i) {
    const Leaf& l = map.leaves[i];
    for (std::size_t y = l.y; y < l.y + l.size; ++y)
      std::fill_n(plane.begin() + static_cast<std::ptrdiff_t>(y * map.width + l.x), l.size, static_cast<std::uint32_t>(i));
  }
  return plane;
}

// Throws ValidationError unless the leaves are aligned powers of two within
// [min_cu, ctu_size] that cover every pixel exactly once.
inline void validate(const PartitionMap& map) {
  if (map.width == 0 || map.height == 0) throw ValidationError("partition map has empty frame dimensions");
  if (!is_power_of_two(map.ctu_size) || !is_power_of_two(map.min_cu) || map.min_cu > map.ctu_size)
    throw ValidationError("partition map has invalid ctu/min_cu " + std::to_string(map.ctu_size) + "/" +
                          std::to_string(map.min_cu));
  std::vector<std::uint8_t> covered(map.width * map.height, 0);
  std::size_t area = 0;
  for (const Leaf& l : map.leaves) {
    const std::string where = "leaf (" + std::to_string(l.x) + ", " + std::to_string(l.y) + ", " + std::to_string(l.size) + ")";
    if (!is_power_of_two(l.size) || l.size < map.min_cu || l.size > map.ctu_size)
      throw ValidationError(where + ": size outside powers of two in [min_cu, ctu_size]");
    if (l.x % l.size != 0 || l.y % l.size != 0) throw ValidationError(where + ": not aligned to its size");
    if (l.x + l.size > map.width || l.y + l.size > map.height) throw ValidationError(where + ": extends past the frame");
    for (std::size_t y = l.y; y < l.y + l.size; ++y) {
      for (std::size_t x = l.x; x < l.x + l.size; ++x) {
        std::uint8_t& c = covered[y * map.width + x];
        if (c) throw ValidationError(where + ": overlaps another leaf at pixel (" + std::to_string(x) + ", " + std::to_string(y) + ")");
        c = 1;
      }
    }
    area += l.size * l.size;
  }
  if (area != map.width * map.height)
    throw ValidationError("partition map leaves cover " + std::to_string(area) + " of " +
                          std::to_string(map.width * map.height) + " pixels");
}

}  // namespace pgen

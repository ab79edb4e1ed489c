#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pgen/codec/frame.hpp"
#include "pgen/codec/partition_map.hpp"
#include "pgen/codec/transform.hpp"
#include "pgen/common/parallel.hpp"
#include "pgen/eval/psnr.hpp"

namespace pgen {

struct CodecConfig {
  std::size_t ctu_size = 64;
  std::size_t min_cu = 8;
  int qp = 37;
  double lambda_scale = 0.85;
};

inline void validate(const CodecConfig& config) {
  if (!is_power_of_two(config.ctu_size) || !is_power_of_two(config.min_cu))
    throw ConfigError("ctu_size and min_cu must be powers of two");
  if (config.min_cu > config.ctu_size) throw ConfigError("min_cu exceeds ctu_size");
  if (!is_supported_transform_size(config.min_cu) || !is_supported_transform_size(config.ctu_size))
    throw ConfigError("block sizes must lie in {8, 16, 32, 64}");
  if (!(config.lambda_scale > 0.0)) throw ConfigError("lambda_scale must be positive");
  qp_to_qstep(config.qp);
}

// Lagrange multiplier λ = lambda_scale · 2^((qp − 12) / 3).
inline double rd_lambda(int qp, double lambda_scale) { return lambda_scale * std::exp2((qp - 12) / 3.0); }

struct RDPoint {
  double rate = 0.0;  // bits
  double psnr = 0.0;  // dB
};

struct LeafResult {
  double cost = 0.0;
  double sse = 0.0;
  std::uint64_t bits = 0;
  std::vector<std::uint8_t> recon;  // size×size, row-major
};

// Codes one square block as a leaf: transform, quantize, reconstruct.
// block holds size×size pixels, row-major.
inline LeafResult leaf_cost(std::span<const std::uint8_t> block, std::size_t size, int qp, const CodecConfig& config) {
  if (block.size() != size * size) throw ShapeError("leaf_cost: block holds " + std::to_string(block.size()) + " pixels, expected " + std::to_string(size * size));
  const double qstep = qp_to_qstep(qp);
  TransformMatrix pixels(size, size);
  for (std::size_t i = 0; i < block.size(); ++i) pixels.data()[i] = block[i];

  const std::vector<std::int32_t> levels = quantize(dct2d(pixels), qstep);
  const TransformMatrix rec = idct2d(dequantize(levels, size, qstep));

  LeafResult r;
  r.recon.resize(block.size());
  for (std::size_t i = 0; i < block.size(); ++i) {
    const double v = std::clamp(std::round(rec.data()[i]), 0.0, 255.0);
    r.recon[i] = static_cast<std::uint8_t>(v);
    const double d = static_cast<double>(block[i]) - v;
    r.sse += d * d;
  }
  r.bits = level_bits(levels, size);
  r.cost = r.sse + rd_lambda(qp, config.lambda_scale) * static_cast<double>(r.bits);
  return r;
}

struct PartitionResult {
  PartitionMap map;
  FrameY recon;
  std::uint64_t total_bits = 0;
  std::uint64_t split_flag_bits = 0;
};

namespace detail {

struct NodeOutcome {
  double cost = 0.0;
  std::uint64_t bits = 0;
  std::uint64_t flag_bits = 0;
  std::vector<Leaf> leaves;
};

class CtuSearch {
 public:
  CtuSearch(const FrameY& frame, const CodecConfig& config, FrameY& recon)
      : frame_(frame), config_(config), recon_(recon), lambda_(rd_lambda(config.qp, config.lambda_scale)) {}

  // Best coding of the square at (x, y). Blocks that extend past the frame
  // are split without a flag; blocks entirely outside contribute nothing.
  NodeOutcome search(std::size_t x, std::size_t y, std::size_t size) {
    NodeOutcome out;
    if (x >= frame_.width || y >= frame_.height) return out;
    const bool fits = x + size <= frame_.width && y + size <= frame_.height;
    if (!fits) {
      if (size <= config_.min_cu) throw ShapeError("partition_frame: frame dimensions are not multiples of min_cu");
      accumulate_children(x, y, size, out);
      return out;
    }

    std::vector<std::uint8_t> block(size * size);
    for (std::size_t r = 0; r < size; ++r)
      std::copy_n(frame_.pixels.begin() + static_cast<std::ptrdiff_t>((y + r) * frame_.width + x), size,
                  block.begin() + static_cast<std::ptrdiff_t>(r * size));
    LeafResult leaf = leaf_cost(block, size, config_.qp, config_);

    if (size > config_.min_cu) {
      NodeOutcome split;
      accumulate_children(x, y, size, split);
      // Ties keep the shallower tree.
      if (split.cost < leaf.cost) {
        out = std::move(split);
        out.cost += lambda_;
        out.bits += 1;
        out.flag_bits += 1;
        return out;
      }
      out.cost = leaf.cost + lambda_;
      out.bits = leaf.bits + 1;
      out.flag_bits = 1;
    } else {
      out.cost = leaf.cost;
      out.bits = leaf.bits;
    }
    write_recon(x, y, size, leaf.recon);
    out.leaves.push_back({x, y, size});
    return out;
  }

 private:
  void accumulate_children(std::size_t x, std::size_t y, std::size_t size, NodeOutcome& out) {
    const std::size_t half = size / 2;
    for (std::size_t q = 0; q < 4; ++q) {
      NodeOutcome child = search(x + (q % 2) * half, y + (q / 2) * half, half);
      out.cost += child.cost;
      out.bits += child.bits;
      out.flag_bits += child.flag_bits;
      out.leaves.insert(out.leaves.end(), child.leaves.begin(), child.leaves.end());
    }
  }

  void write_recon(std::size_t x, std::size_t y, std::size_t size, const std::vector<std::uint8_t>& block) {
    for (std::size_t r = 0; r < size; ++r)
      std::copy_n(block.begin() + static_cast<std::ptrdiff_t>(r * size), size,
                  recon_.pixels.begin() + static_cast<std::ptrdiff_t>((y + r) * recon_.width + x));
  }

  const FrameY& frame_;
  const CodecConfig& config_;
  FrameY& recon_;
  double lambda_;
};

}  // namespace detail

// Rate-distortion quadtree search per CTU. Each decision node above min_cu
// costs one split-flag bit; forced splits at the frame edge cost none.
inline PartitionResult partition_frame(const FrameY& frame, const CodecConfig& config) {
  validate(config);
  if (frame.width == 0 || frame.height == 0 || frame.width % config.min_cu != 0 || frame.height % config.min_cu != 0)
    throw DataError("partition_frame: frame " + dims_string(frame.width, frame.height) +
                    " is not a multiple of min_cu " + std::to_string(config.min_cu) + "; crop it first");

  const std::size_t ctus_x = (frame.width + config.ctu_size - 1) / config.ctu_size;
  const std::size_t ctus_y = (frame.height + config.ctu_size - 1) / config.ctu_size;
  PartitionResult result;
  result.recon = FrameY(frame.width, frame.height);
  std::vector<detail::NodeOutcome> outcomes(ctus_x * ctus_y);
  // CTUs write disjoint recon regions.
  parallel_for(outcomes.size(), [&](std::size_t i) {
    detail::CtuSearch search(frame, config, result.recon);
    outcomes[i] = search.search((i % ctus_x) * config.ctu_size, (i / ctus_x) * config.ctu_size, config.ctu_size);
  });

  result.map.width = frame.width;
  result.map.height = frame.height;
  result.map.ctu_size = config.ctu_size;
  result.map.min_cu = config.min_cu;
  for (const auto& o : outcomes) {
    result.total_bits += o.bits;
    result.split_flag_bits += o.flag_bits;
    result.map.leaves.insert(result.map.leaves.end(), o.leaves.begin(), o.leaves.end());
  }
  result.map.sort_leaves();
  return result;
}

struct EncodeResult {
  FrameY recon;
  PartitionMap map;
  RDPoint rd;
};

inline EncodeResult encode_decode(const FrameY& frame, const CodecConfig& config) {
  PartitionResult p = partition_frame(frame, config);
  EncodeResult r;
  r.rd.rate = static_cast<double>(p.total_bits);
  r.rd.psnr = psnr(frame, p.recon);
  r.recon = std::move(p.recon);
  r.map = std::move(p.map);
  return r;
}

}  // namespace pgen

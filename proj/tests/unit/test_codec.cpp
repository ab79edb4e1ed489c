#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <tuple>

#include "oracles.hpp"
#include "pgen/codec/codec.hpp"

using namespace pgen;

namespace {

std::vector<std::uint8_t> block_at(const FrameY& f, std::size_t x, std::size_t y, std::size_t size) {
  std::vector<std::uint8_t> b(size * size);
  for (std::size_t r = 0; r < size; ++r)
    for (std::size_t c = 0; c < size; ++c) b[r * size + c] = f.at(x + c, y + r);
  return b;
}

// Coverage bitmap and alignment checks, independent of validate().
void expect_tiling(const PartitionMap& map) {
  std::vector<int> cover(map.width * map.height, 0);
  std::size_t area = 0;
  for (const Leaf& l : map.leaves) {
    EXPECT_EQ(l.x % l.size, 0u);
    EXPECT_EQ(l.y % l.size, 0u);
    EXPECT_GE(l.size, map.min_cu);
    EXPECT_LE(l.size, map.ctu_size);
    ASSERT_LE(l.x + l.size, map.width);
    ASSERT_LE(l.y + l.size, map.height);
    area += l.size * l.size;
    for (std::size_t y = l.y; y < l.y + l.size; ++y)
      for (std::size_t x = l.x; x < l.x + l.size; ++x) ++cover[y * map.width + x];
  }
  EXPECT_EQ(area, map.width * map.height);
  for (int c : cover) ASSERT_EQ(c, 1);
}

// Split flags implied by the leaf set: one per in-frame node above min_cu
// that was a real decision (the node fits inside the frame).
std::uint64_t implied_flags(const PartitionMap& map) {
  std::uint64_t flags = 0;
  for (const Leaf& l : map.leaves) {
    if (l.size > map.min_cu) ++flags;  // a leaf above min_cu chose "no split"
    // ancestors that split: count each once via the top-left child rule
    for (std::size_t s = l.size * 2; s <= map.ctu_size; s *= 2) {
      const std::size_t ax = l.x / s * s, ay = l.y / s * s;
      if (l.x != ax || l.y != ay) break;  // only the top-left descendant reports
      if (ax + s <= map.width && ay + s <= map.height) ++flags;
    }
  }
  return flags;
}

}  // namespace

TEST(Quant, QstepSpotValues) {
  EXPECT_EQ(qp_to_qstep(4), 1.0);
  EXPECT_EQ(qp_to_qstep(10), 2.0);
  EXPECT_NEAR(qp_to_qstep(37), std::pow(2.0, 33.0 / 6.0), 1e-12);
  EXPECT_NEAR(qp_to_qstep(37), 45.25, 0.01);
  EXPECT_THROW(qp_to_qstep(-1), ConfigError);
  EXPECT_THROW(qp_to_qstep(52), ConfigError);
}

TEST(Transform, ConstantBlockHasOnlyDc) {
  TransformMatrix b = TransformMatrix::Constant(8, 8, 128.0);
  const TransformMatrix c = dct2d(b);
  EXPECT_NEAR(c(0, 0), 1024.0, 1e-9);
  for (Eigen::Index i = 0; i < c.size(); ++i)
    if (i != 0) {
      EXPECT_NEAR(c.data()[i], 0.0, 1e-9);
    }
}

TEST(Transform, MatchesDirectSummation) {
  Rng rng(1);
  for (std::size_t n : {8u, 16u}) {
    std::vector<double> x(n * n);
    TransformMatrix b(n, n);
    for (std::size_t i = 0; i < x.size(); ++i) b.data()[i] = x[i] = static_cast<double>(rng.below(256));
    const std::vector<double> ref = oracle::direct_dct2d(x, n);
    const TransformMatrix c = dct2d(b);
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(c.data()[i], ref[i], 1e-6) << n << " @" << i;
  }
}

TEST(Transform, RoundTripAndNormPreservation) {
  Rng rng(2);
  for (std::size_t n : {8u, 16u, 32u, 64u}) {
    for (int t = 0; t < 20; ++t) {
      TransformMatrix b(n, n);
      for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = static_cast<double>(rng.below(256));
      const TransformMatrix c = dct2d(b);
      EXPECT_LT((idct2d(c) - b).cwiseAbs().maxCoeff(), 1e-3);
      EXPECT_NEAR(c.norm(), b.norm(), 1e-6 * b.norm());
    }
  }
}

TEST(Transform, UnsupportedSizeIsConfigError) {
  EXPECT_THROW(dct2d(TransformMatrix::Zero(4, 4)), ConfigError);
  EXPECT_THROW(dct2d(TransformMatrix::Zero(12, 12)), ConfigError);
  EXPECT_THROW(idct2d(TransformMatrix::Zero(128, 128)), ConfigError);
}

TEST(Quant, RoundingRules) {
  TransformMatrix c(1, 6);
  c << 0.0, 2.4, 2.5, -2.5, -0.49, 7.51;
  const auto levels = quantize(c, 1.0);
  EXPECT_EQ(levels, (std::vector<std::int32_t>{0, 2, 3, -3, 0, 8}));
}

TEST(Quant, ReconstructionWithinHalfStep) {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const double qstep = qp_to_qstep(static_cast<int>(rng.below(52)));
    TransformMatrix c(8, 8);
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = rng.uniform(-3000.0, 3000.0);
    const TransformMatrix r = dequantize(quantize(c, qstep), 8, qstep);
    EXPECT_LE((r - c).cwiseAbs().maxCoeff(), qstep / 2 + 1e-9);
  }
}

TEST(Rate, ExpGolombLengths) {
  EXPECT_EQ(signed_exp_golomb_length(0), 1u);
  EXPECT_EQ(signed_exp_golomb_length(1), 3u);
  EXPECT_EQ(signed_exp_golomb_length(-1), 3u);
  EXPECT_EQ(signed_exp_golomb_length(2), 5u);
  for (int v = -300; v <= 300; ++v) EXPECT_EQ(signed_exp_golomb_length(v), oracle::exp_golomb_bits(v)) << v;
}

TEST(Rate, ZigZagIsAPermutation) {
  for (std::size_t n : {8u, 16u, 32u, 64u}) {
    const auto& z = zigzag_scan(n);
    EXPECT_EQ(std::set<std::size_t>(z.begin(), z.end()).size(), n * n);
  }
  const auto& z8 = zigzag_scan(8);
  EXPECT_EQ(z8[0], 0u);
  EXPECT_EQ(z8[1], 1u);  // (0,1)
  EXPECT_EQ(z8[2], 8u);  // (1,0)
  EXPECT_EQ(z8[3], 16u);
}

TEST(Leaf, ConstantBlockAtFineQstepIsLossless) {
  const CodecConfig cfg;
  for (int qp : {0, 4}) {
    const std::vector<std::uint8_t> b(64, 77);
    EXPECT_EQ(leaf_cost(b, 8, qp, cfg).sse, 0.0);
  }
}

TEST(Leaf, ZeroBlockCostsOneBitPerCoefficientPlusTerminator) {
  // 64 levels coded as se(0) = "1", one bit each, plus the terminator.
  const std::vector<std::uint8_t> b(64, 0);
  const LeafResult r = leaf_cost(b, 8, 37, CodecConfig{});
  EXPECT_EQ(r.bits, 64u + 1u);
  EXPECT_EQ(r.sse, 0.0);
}

TEST(Leaf, MatchesDefinitionOracle) {
  Rng rng(4);
  CodecConfig cfg;
  for (int t = 0; t < 20; ++t) {
    const FrameY f = oracle::random_frame(16, 16, rng);
    const int qp = static_cast<int>(rng.below(52));
    for (std::size_t n : {8u, 16u}) {
      const auto block = block_at(f, 0, 0, n);
      const LeafResult r = leaf_cost(block, n, qp, cfg);
      const oracle::LeafOracle o = oracle::leaf_oracle(block, n, qp, cfg.lambda_scale);
      EXPECT_EQ(r.bits, o.bits);
      EXPECT_NEAR(r.cost, o.cost, 1e-6 * o.cost);
      EXPECT_EQ(r.recon, o.recon);
    }
  }
}

TEST(Leaf, CostNonDecreasingInLambda) {
  Rng rng(5);
  const auto block = block_at(oracle::random_frame(8, 8, rng), 0, 0, 8);
  double prev = -1.0;
  for (double s : {0.1, 0.5, 0.85, 1.0, 2.0, 10.0}) {
    CodecConfig cfg;
    cfg.lambda_scale = s;
    const double c = leaf_cost(block, 8, 30, cfg).cost;
    EXPECT_GE(c, prev);
    prev = c;
  }
}

TEST(Partition, FlatFrameIsOneLeaf) {
  const FrameY f(64, 64, 100);
  const PartitionResult r = partition_frame(f, CodecConfig{});
  ASSERT_EQ(r.map.leaves.size(), 1u);
  EXPECT_EQ(r.map.leaves[0].size, 64u);
  EXPECT_EQ(r.recon, f);
}

TEST(Partition, SixteenBySixteenMatchesExhaustiveSearch) {
  CodecConfig cfg;
  cfg.ctu_size = 16;
  cfg.min_cu = 8;
  Rng rng(6);
  int splits = 0, leaves = 0;
  for (int t = 0; t < 60; ++t) {
    FrameY f(16, 16);
    const bool checker = t % 3 == 0;
    for (std::size_t y = 0; y < 16; ++y)
      for (std::size_t x = 0; x < 16; ++x) {
        if (checker) f.at(x, y) = ((x / 2 + y / 2) % 2) ? 230 : 20;
        else if (t % 3 == 1) f.at(x, y) = static_cast<std::uint8_t>(rng.below(256));
        else f.at(x, y) = static_cast<std::uint8_t>(x < 8 ? 40 + rng.below(10) : 200 + 3 * y);
      }
    cfg.qp = 22 + static_cast<int>(rng.below(30));
    const double lambda = cfg.lambda_scale * std::pow(2.0, (cfg.qp - 12) / 3.0);

    // The two configurations: one 16×16 leaf, or four 8×8 leaves. Either way
    // the root decision carries one flag bit.
    const auto whole = oracle::leaf_oracle(block_at(f, 0, 0, 16), 16, cfg.qp, cfg.lambda_scale);
    double split_cost = 0.0;
    std::uint64_t split_bits = 0;
    FrameY split_recon(16, 16);
    for (std::size_t q = 0; q < 4; ++q) {
      const std::size_t x = (q % 2) * 8, y = (q / 2) * 8;
      const auto leaf = oracle::leaf_oracle(block_at(f, x, y, 8), 8, cfg.qp, cfg.lambda_scale);
      split_cost += leaf.cost;
      split_bits += leaf.bits;
      for (std::size_t r = 0; r < 8; ++r)
        for (std::size_t c = 0; c < 8; ++c) split_recon.at(x + c, y + r) = leaf.recon[r * 8 + c];
    }
    const bool oracle_split = split_cost + lambda < whole.cost + lambda;

    const PartitionResult r = partition_frame(f, cfg);
    EXPECT_EQ(r.map.leaves.size(), oracle_split ? 4u : 1u) << "trial " << t;
    EXPECT_EQ(r.total_bits, (oracle_split ? split_bits : whole.bits) + 1);
    EXPECT_EQ(r.split_flag_bits, 1u);
    if (oracle_split) {
      EXPECT_EQ(r.recon, split_recon);
    }
    (oracle_split ? splits : leaves) += 1;
  }
  // Both outcomes are exercised.
  EXPECT_GT(splits, 0);
  EXPECT_GT(leaves, 0);
}

TEST(Partition, RightStripIsForceSplit) {
  Rng rng(7);
  const FrameY f = oracle::natural_frame(72, 64, rng);
  const PartitionResult r = partition_frame(f, CodecConfig{});
  expect_tiling(r.map);
  std::size_t strip_area = 0;
  for (const Leaf& l : r.map.leaves)
    if (l.x >= 64) {
      EXPECT_LE(l.size, 8u);
      strip_area += l.size * l.size;
    }
  EXPECT_EQ(strip_area, 8u * 64u);
}

TEST(Partition, TilingAlignmentAndRateOnRandomFrames) {
  Rng rng(8);
  for (int t = 0; t < 12; ++t) {
    const std::size_t w = 8 * (1 + rng.below(20)), h = 8 * (1 + rng.below(12));
    const FrameY f = t % 2 ? oracle::random_frame(w, h, rng) : oracle::natural_frame(w, h, rng);
    for (int qp : {22, 27, 32, 37}) {
      CodecConfig cfg;
      cfg.qp = qp;
      const PartitionResult r = partition_frame(f, cfg);
      expect_tiling(r.map);
      EXPECT_NO_THROW(validate(r.map));
      std::uint64_t leaf_bits = 0;
      for (const Leaf& l : r.map.leaves) leaf_bits += leaf_cost(block_at(f, l.x, l.y, l.size), l.size, qp, cfg).bits;
      EXPECT_EQ(r.split_flag_bits, implied_flags(r.map));
      EXPECT_EQ(r.total_bits, leaf_bits + r.split_flag_bits);
      EXPECT_GT(r.total_bits, 0u);
    }
  }
}

TEST(Partition, RejectsUnalignedDimensions) {
  EXPECT_THROW(partition_frame(FrameY(20, 16), CodecConfig{}), DataError);
}

TEST(Partition, DeterministicAndThreadIndependent) {
  Rng rng(9);
  const FrameY f = oracle::natural_frame(200, 136, rng);
  const PartitionResult a = partition_frame(f, CodecConfig{});
  set_thread_count(3);
  const PartitionResult b = partition_frame(f, CodecConfig{});
  set_thread_count(1);
  EXPECT_EQ(a.recon, b.recon);
  EXPECT_EQ(a.map, b.map);
  EXPECT_EQ(a.total_bits, b.total_bits);
}

TEST(Encode, NearLosslessAtQpZero) {
  Rng rng(10);
  const FrameY f = oracle::natural_frame(128, 96, rng);
  CodecConfig cfg;
  cfg.qp = 0;
  EXPECT_GT(encode_decode(f, cfg).rd.psnr, 50.0);
}

TEST(Encode, QualityFallsAndRateShrinksWithQp) {
  Rng rng(11);
  for (int t = 0; t < 3; ++t) {
    const FrameY f = oracle::natural_frame(128, 128, rng);
    double prev_psnr = 1e9, prev_rate = 1e18;
    for (int qp : {22, 27, 32, 37}) {
      CodecConfig cfg;
      cfg.qp = qp;
      const EncodeResult r = encode_decode(f, cfg);
      EXPECT_LE(r.rd.psnr, prev_psnr);
      EXPECT_LE(r.rd.rate, prev_rate);
      EXPECT_EQ(r.rd.rate, static_cast<double>(partition_frame(f, cfg).total_bits));
      prev_psnr = r.rd.psnr;
      prev_rate = r.rd.rate;
    }
  }
}

TEST(Codec, ConfigValidation) {
  CodecConfig c;
  c.ctu_size = 48;
  EXPECT_THROW(validate(c), ConfigError);
  c = CodecConfig{};
  c.min_cu = 128;
  EXPECT_THROW(validate(c), ConfigError);
  c = CodecConfig{};
  c.qp = 60;
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(Frame, CropToMultiple) {
  const FrameY f(21, 19, 5);
  const FrameY c = crop_to_multiple(f, 8);
  EXPECT_EQ(c.width, 16u);
  EXPECT_EQ(c.height, 16u);
}

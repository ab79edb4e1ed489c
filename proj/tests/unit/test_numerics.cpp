#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "pgen/numerics/adam.hpp"
#include "pgen/numerics/batchnorm.hpp"
#include "pgen/numerics/conv.hpp"
#include "pgen/numerics/elementwise.hpp"

using namespace pgen;
using oracle::max_abs_diff;
using oracle::numeric_gradient;
using oracle::random_tensor;
using oracle::weighted_sum;

namespace {

ConvParams<double> random_conv(std::size_t cin, std::size_t cout, std::size_t k, Rng& rng) {
  ConvParams<double> p(cin, cout, k);
  p.weights = random_tensor<double>(p.weights.shape(), rng);
  p.bias = random_tensor<double>(p.bias.shape(), rng);
  return p;
}

}  // namespace

TEST(Conv, DeltaKernelIsIdentity) {
  Rng rng(1);
  const Tensor<double> x = random_tensor<double>({1, 1, 3, 3}, rng);
  ConvParams<double> p(1, 1, 3);
  p.weights.at(0, 0, 1, 1) = 1.0;
  EXPECT_EQ(conv2d_forward(x, p), x);
}

TEST(Conv, OnesKernelOnTwoByTwo) {
  const Tensor<double> x(1, 1, 2, 2, 1.0);
  ConvParams<double> p(1, 1, 3);
  p.weights.fill(1.0);
  const Tensor<double> y = conv2d_forward(x, p);
  const Tensor<double> ref = oracle::naive_conv(x, p.weights, p.bias);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(ref[i], 4.0);
    EXPECT_DOUBLE_EQ(y[i], ref[i]);
  }
}

TEST(Conv, MatchesNaiveLoopOnRandomShapes) {
  Rng rng(2);
  const auto check = [&](Shape s, std::size_t cout) {
    const Tensor<double> x = random_tensor<double>(s, rng);
    const ConvParams<double> p = random_conv(s.c, cout, 3, rng);
    const Tensor<double> y = conv2d_forward(x, p);
    const Tensor<double> ref = oracle::naive_conv(x, p.weights, p.bias);
    ASSERT_EQ(y.shape(), ref.shape());
    for (std::size_t i = 0; i < y.size(); ++i)
      ASSERT_NEAR(y[i], ref[i], 1e-5 * std::max(1.0, std::abs(ref[i]))) << to_string(s) << " at " << i;
  };
  check({2, 3, 5, 5}, 4);
  for (int t = 0; t < 40; ++t) {
    const Shape s{1 + rng.below(4), 1 + rng.below(8), 1 + rng.below(9), 1 + rng.below(9)};
    check(s, 1 + rng.below(8));
  }
}

TEST(Conv, FloatMatchesNaiveLoop) {
  Rng rng(3);
  const Tensor<double> x = random_tensor<double>({2, 5, 9, 7}, rng);
  const ConvParams<double> p = random_conv(5, 6, 3, rng);
  ConvParams<float> pf(5, 6, 3);
  pf.weights = p.weights.cast<float>();
  pf.bias = p.bias.cast<float>();
  const Tensor<float> y = conv2d_forward(x.cast<float>(), pf);
  const Tensor<double> ref = oracle::naive_conv(x, p.weights, p.bias);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y[i], ref[i], 1e-5 * std::max(1.0, std::abs(ref[i])));
}

TEST(Conv, ChannelMismatchNamesBothShapes) {
  const Tensor<double> x(1, 2, 4, 4);
  const ConvParams<double> p(3, 1, 3);
  try {
    conv2d_forward(x, p);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find(to_string(x.shape())), std::string::npos) << msg;
    EXPECT_NE(msg.find(to_string(p.weights.shape())), std::string::npos) << msg;
  }
}

TEST(Conv, ZeroGradOutGivesZeroGradients) {
  Rng rng(4);
  const Tensor<double> x = random_tensor<double>({2, 3, 5, 5}, rng);
  const ConvParams<double> p = random_conv(3, 4, 3, rng);
  const ConvGrads<double> g = conv2d_backward(x, p, Tensor<double>(2, 4, 5, 5));
  for (const auto* t : {&g.input, &g.weights, &g.bias})
    for (double v : t->values()) EXPECT_EQ(v, 0.0);
}

TEST(Conv, DeltaKernelPassesGradientThrough) {
  const Tensor<double> x(1, 1, 1, 1, 0.7);
  ConvParams<double> p(1, 1, 3);
  p.weights.at(0, 0, 1, 1) = 1.0;
  const Tensor<double> go(1, 1, 1, 1, -2.5);
  EXPECT_EQ(conv2d_backward(x, p, go).input, go);
}

TEST(Conv, BackwardMatchesFiniteDifferences) {
  Rng rng(5);
  Tensor<double> x = random_tensor<double>({2, 3, 5, 4}, rng);
  ConvParams<double> p = random_conv(3, 2, 3, rng);
  const Tensor<double> w = random_tensor<double>({2, 2, 5, 4}, rng);
  const auto loss = [&] { return weighted_sum(conv2d_forward(x, p), w); };
  const ConvGrads<double> g = conv2d_backward(x, p, w);
  EXPECT_LT(max_abs_diff(numeric_gradient(x, loss), g.input), 1e-6);
  EXPECT_LT(max_abs_diff(numeric_gradient(p.weights, loss), g.weights), 1e-6);
  EXPECT_LT(max_abs_diff(numeric_gradient(p.bias, loss), g.bias), 1e-6);
}

TEST(Conv, ThreadCountDoesNotChangeResults) {
  Rng rng(6);
  const Tensor<float> x = random_tensor<float>({5, 4, 12, 12}, rng);
  ConvParams<float> p(4, 6, 3);
  p.weights = random_tensor<float>(p.weights.shape(), rng);
  const Tensor<float> go = random_tensor<float>({5, 6, 12, 12}, rng);
  set_thread_count(1);
  const auto y1 = conv2d_forward(x, p);
  const auto g1 = conv2d_backward(x, p, go);
  set_thread_count(3);
  const auto y3 = conv2d_forward(x, p);
  const auto g3 = conv2d_backward(x, p, go);
  set_thread_count(1);
  EXPECT_EQ(y1, y3);
  EXPECT_EQ(g1.input, g3.input);
  for (std::size_t i = 0; i < g1.weights.size(); ++i) EXPECT_NEAR(g1.weights[i], g3.weights[i], 1e-4);
  // Repeat runs at a fixed thread count are bit-identical.
  EXPECT_EQ(conv2d_backward(x, p, go).weights, g1.weights);
}

TEST(BatchNorm, ConstantChannelNormalizesToZero) {
  BatchNormParams<double> p(2);
  const Tensor<double> x(3, 2, 4, 4, 5.0);
  const Tensor<double> y = batchnorm_forward(x, p, Mode::Train);
  for (double v : y.values()) EXPECT_EQ(v, 0.0);
}

TEST(BatchNorm, TrainOutputHasZeroMeanUnitVariance) {
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    BatchNormParams<double> p(3);
    const Tensor<double> x = random_tensor<double>({4, 3, 6, 5}, rng, -3.0, 7.0);
    const Tensor<double> y = batchnorm_forward(x, p, Mode::Train);
    for (std::size_t c = 0; c < 3; ++c) {
      double s = 0.0, sq = 0.0;
      const double n = 4 * 30;
      for (std::size_t b = 0; b < 4; ++b)
        for (std::size_t i = 0; i < 30; ++i) s += y.plane(b, c)[i];
      const double mean = s / n;
      for (std::size_t b = 0; b < 4; ++b)
        for (std::size_t i = 0; i < 30; ++i) sq += (y.plane(b, c)[i] - mean) * (y.plane(b, c)[i] - mean);
      EXPECT_LT(std::abs(mean), 1e-5);
      EXPECT_NEAR(sq / n, 1.0, 1e-3);
    }
  }
}

TEST(BatchNorm, RunningStatisticsFollowMomentum) {
  BatchNormParams<double> p(1);
  Tensor<double> x(1, 1, 1, 4);
  x[0] = 1.0, x[1] = 2.0, x[2] = 3.0, x[3] = 6.0;  // mean 3, unbiased variance 14/3
  batchnorm_forward(x, p, Mode::Train);
  EXPECT_NEAR(p.running_mean[0], 0.1 * 3.0, 1e-12);
  EXPECT_NEAR(p.running_var[0], 0.9 * 1.0 + 0.1 * 14.0 / 3.0, 1e-12);
  const Tensor<double> y = batchnorm_forward(x, p, Mode::Infer);
  EXPECT_NEAR(y[0], (1.0 - p.running_mean[0]) / std::sqrt(p.running_var[0] + p.epsilon), 1e-12);
}

TEST(BatchNorm, TrainModeRejectsSingleValue) {
  BatchNormParams<double> p(1);
  EXPECT_THROW(batchnorm_forward(Tensor<double>(1, 1, 1, 1), p, Mode::Train), ShapeError);
  EXPECT_THROW(batchnorm_forward(Tensor<double>(1, 2, 3, 3), p, Mode::Train), ShapeError);
}

TEST(BatchNorm, BackwardMatchesFiniteDifferences) {
  Rng rng(8);
  BatchNormParams<double> p(3);
  p.gamma = random_tensor<double>(p.gamma.shape(), rng, 0.5, 1.5);
  p.beta = random_tensor<double>(p.beta.shape(), rng);
  Tensor<double> x = random_tensor<double>({2, 3, 4, 3}, rng);
  const Tensor<double> w = random_tensor<double>(x.shape(), rng);
  const auto loss = [&] { return weighted_sum(batchnorm_forward(x, p, Mode::Train), w); };
  BatchStats<double> stats;
  batchnorm_forward(x, p, Mode::Train, &stats);
  const BatchNormGrads<double> g = batchnorm_backward(stats, p, w);
  EXPECT_LT(max_abs_diff(numeric_gradient(x, loss), g.input), 1e-6);
  EXPECT_LT(max_abs_diff(numeric_gradient(p.gamma, loss), g.gamma), 1e-6);
  EXPECT_LT(max_abs_diff(numeric_gradient(p.beta, loss), g.beta), 1e-6);
}

TEST(BatchNorm, InferBackwardMatchesFiniteDifferences) {
  Rng rng(9);
  BatchNormParams<double> p(2);
  p.gamma = random_tensor<double>(p.gamma.shape(), rng, 0.5, 1.5);
  p.running_mean = random_tensor<double>(p.running_mean.shape(), rng);
  p.running_var = random_tensor<double>(p.running_var.shape(), rng, 0.5, 2.0);
  Tensor<double> x = random_tensor<double>({2, 2, 3, 3}, rng);
  const Tensor<double> w = random_tensor<double>(x.shape(), rng);
  const auto loss = [&] { return weighted_sum(batchnorm_forward(x, p, Mode::Infer), w); };
  EXPECT_LT(max_abs_diff(numeric_gradient(x, loss), batchnorm_backward_infer(p, w)), 1e-6);
}

TEST(Relu, SignCases) {
  const Tensor<double> neg(1, 2, 3, 3, -0.5);
  const Tensor<double> out = relu_forward(neg);
  for (double v : out.values()) EXPECT_EQ(v, 0.0);
  Rng rng(10);
  const Tensor<double> pos = random_tensor<double>({1, 2, 3, 3}, rng, 0.1, 2.0);
  EXPECT_EQ(relu_forward(pos), pos);
}

TEST(Relu, BackwardMatchesFiniteDifferencesAwayFromZero) {
  Rng rng(11);
  Tensor<double> x = random_tensor<double>({2, 2, 3, 3}, rng);
  for (double& v : x.values())
    if (std::abs(v) < 0.05) v = 0.3;
  const Tensor<double> w = random_tensor<double>(x.shape(), rng);
  const auto loss = [&] { return weighted_sum(relu_forward(x), w); };
  const Tensor<double> g = relu_backward(relu_forward(x), w);
  EXPECT_LT(max_abs_diff(numeric_gradient(x, loss), g), 1e-6);
}

TEST(Add, IdentityCommutativityAndGradient) {
  Rng rng(12);
  Tensor<double> a = random_tensor<double>({2, 3, 4, 4}, rng);
  Tensor<double> b = random_tensor<double>(a.shape(), rng);
  EXPECT_EQ(add_forward(a, Tensor<double>(a.shape())), a);
  EXPECT_EQ(add_forward(a, b), add_forward(b, a));
  const Tensor<double> s = add_forward(a, b);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_EQ(s[i], a[i] + b[i]);
  const Tensor<double> w = random_tensor<double>(a.shape(), rng);
  const auto loss = [&] { return weighted_sum(add_forward(a, b), w); };
  const AddGrads<double> g = add_backward(w);
  EXPECT_LT(max_abs_diff(numeric_gradient(a, loss), g.a), 1e-6);
  EXPECT_LT(max_abs_diff(numeric_gradient(b, loss), g.b), 1e-6);
  EXPECT_THROW(add_forward(a, Tensor<double>(1, 1, 1, 1)), ShapeError);
}

TEST(Concat, PlanesPreservedAndSliceRoundTrip) {
  Rng rng(13);
  Tensor<double> a = random_tensor<double>({2, 1, 3, 4}, rng);
  Tensor<double> b = random_tensor<double>({2, 2, 3, 4}, rng);
  const Tensor<double> c = concat_channels(a, b);
  ASSERT_EQ(c.shape(), (Shape{2, 3, 3, 4}));
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t i = 0; i < 12; ++i) {
      EXPECT_EQ(c.plane(n, 0)[i], a.plane(n, 0)[i]);
      EXPECT_EQ(c.plane(n, 2)[i], b.plane(n, 1)[i]);
    }
  EXPECT_EQ(slice_channels(c, 0, 1), a);
  EXPECT_EQ(slice_channels(c, 1, 2), b);

  const Tensor<double> w = random_tensor<double>(c.shape(), rng);
  const auto loss = [&] { return weighted_sum(concat_channels(a, b), w); };
  const AddGrads<double> g = concat_backward(w, 1);
  EXPECT_LT(max_abs_diff(numeric_gradient(a, loss), g.a), 1e-6);
  EXPECT_LT(max_abs_diff(numeric_gradient(b, loss), g.b), 1e-6);
  EXPECT_THROW(concat_channels(a, Tensor<double>(1, 1, 3, 4)), ShapeError);
}

TEST(Mse, KnownValuesAndGradient) {
  Rng rng(14);
  Tensor<double> p = random_tensor<double>({2, 1, 3, 3}, rng);
  EXPECT_EQ(mse_loss(p, p).loss, 0.0);
  Tensor<double> shifted = p;
  for (double& v : shifted.values()) v += 1.0;
  EXPECT_DOUBLE_EQ(mse_loss(shifted, p).loss, 1.0);
  const Tensor<double> t = random_tensor<double>(p.shape(), rng);
  const auto loss = [&] { return mse_loss(p, t).loss; };
  EXPECT_LT(max_abs_diff(numeric_gradient(p, loss), mse_loss(p, t).grad), 1e-6);
}

TEST(Adam, ZeroGradientLeavesParametersAndAdvancesStep) {
  Tensor<double> w(1, 1, 2, 2, 0.25);
  const Tensor<double> g(1, 1, 2, 2);
  OptimizerState<double> st;
  adam_step<double>({{"w", &w, &g}}, st);
  EXPECT_EQ(st.step, 1u);
  for (double v : w.values()) EXPECT_EQ(v, 0.25);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  // m̂ = g and v̂ = g² after one step, so Δ = lr·g/(|g| + ε).
  for (double g0 : {0.5, 3.0, 1e-3}) {
    Tensor<double> w(1, 1, 1, 1, 1.0);
    const Tensor<double> g(1, 1, 1, 1, g0);
    OptimizerState<double> st;
    st.learning_rate = 1e-3;
    adam_step<double>({{"w", &w, &g}}, st);
    const double expected = 1.0 - 1e-3 * g0 / (g0 + st.epsilon);
    EXPECT_NEAR(w[0], expected, 1e-15);
    EXPECT_NEAR(1.0 - w[0], 1e-3, 1e-8);
  }
}

TEST(Adam, ScalarsUpdateIndependently) {
  Tensor<double> a(1, 1, 1, 1, 1.0), b(1, 1, 1, 1, 1.0);
  const Tensor<double> ga(1, 1, 1, 1, 2.0), gb(1, 1, 1, 1, -0.1);
  OptimizerState<double> joint;
  for (int i = 0; i < 3; ++i) adam_step<double>({{"a", &a, &ga}, {"b", &b, &gb}}, joint);

  Tensor<double> a2(1, 1, 1, 1, 1.0), b2(1, 1, 1, 1, 1.0);
  OptimizerState<double> sa, sb;
  for (int i = 0; i < 3; ++i) {
    adam_step<double>({{"a", &a2, &ga}}, sa);
    adam_step<double>({{"b", &b2, &gb}}, sb);
  }
  EXPECT_EQ(a[0], a2[0]);
  EXPECT_EQ(b[0], b2[0]);
}

TEST(Adam, NonFiniteGradientNamesParameterAndWritesNothing) {
  Tensor<double> a(1, 1, 1, 2, 1.0), b(1, 1, 1, 2, 1.0);
  const Tensor<double> ga(1, 1, 1, 2, 0.5);
  Tensor<double> gb(1, 1, 1, 2, 0.5);
  gb[1] = std::numeric_limits<double>::quiet_NaN();
  OptimizerState<double> st;
  try {
    adam_step<double>({{"layer.weight", &a, &ga}, {"layer.bias", &b, &gb}}, st);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("layer.bias"), std::string::npos);
  }
  EXPECT_EQ(a[0], 1.0);
  EXPECT_EQ(st.step, 0u);
}

TEST(Ops, RepeatedRunsAreBitIdentical) {
  Rng r1(15), r2(15);
  const Tensor<float> x1 = random_tensor<float>({3, 4, 8, 8}, r1);
  const Tensor<float> x2 = random_tensor<float>({3, 4, 8, 8}, r2);
  ASSERT_EQ(x1, x2);
  ConvParams<float> p(4, 4, 3);
  p.weights = random_tensor<float>(p.weights.shape(), r1);
  BatchNormParams<float> bn1(4), bn2(4);
  EXPECT_EQ(batchnorm_forward(conv2d_forward(x1, p), bn1, Mode::Train),
            batchnorm_forward(conv2d_forward(x2, p), bn2, Mode::Train));
  EXPECT_EQ(bn1.running_var, bn2.running_var);
}

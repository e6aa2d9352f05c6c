// Copyright 2026 The binet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "binet/autograd.hpp"
#include "binet/error.hpp"
#include "binet/ops.hpp"
#include "binet/optim.hpp"
#include "binet/tensor.hpp"
#include "oracles.hpp"

namespace {

using namespace binet;

TEST(Tensor, ShapeMustMatchData) {
  EXPECT_THROW(Tensor({2, 3}, std::vector<float>(5)), ShapeError);
  Tensor t({2, 3}, std::vector<float>(6, 1.0f));
  EXPECT_EQ(t.numel(), 6u);
  EXPECT_THROW(t.reshaped({4}), ShapeError);
  EXPECT_EQ(t.reshaped({3, 2}).shape(), (Shape{3, 2}));
}

TEST(Tensor, ItemNeedsOneElement) {
  EXPECT_FLOAT_EQ(Tensor::from({1}, {3.5f}).item(), 3.5f);
  EXPECT_THROW(Tensor::zeros({2}).item(), ShapeError);
}

TEST(Conv2d, ScalarProduct) {
  const Tensor x = Tensor::from({1, 1, 1, 1}, {2.0f});
  const Tensor w = Tensor::from({1, 1, 1, 1}, {3.0f});
  const Tensor y = conv2d_forward(x, w, {});
  ASSERT_EQ(y.shape(), (Shape{1, 1, 1, 1}));
  EXPECT_FLOAT_EQ(y[0], 6.0f);
}

TEST(Conv2d, SumOfOnes) {
  const Tensor y = conv2d_forward(Tensor::ones({1, 1, 2, 2}), Tensor::ones({1, 1, 2, 2}), {});
  ASSERT_EQ(y.numel(), 1u);
  EXPECT_FLOAT_EQ(y[0], 4.0f);
}

TEST(Conv2d, RejectsChannelMismatch) {
  EXPECT_THROW(conv2d_forward(Tensor::ones({1, 2, 4, 4}), Tensor::ones({1, 3, 3, 3}), {}),
               ShapeError);
  EXPECT_THROW(conv2d_forward(Tensor::ones({1, 1, 2, 2}), Tensor::ones({1, 1, 3, 3}), {}),
               ShapeError);
}

TEST(Conv2d, MatchesSixLoopReferenceOnFixedCase) {
  std::mt19937_64 rng(11);
  const Tensor x = Tensor::randn({1, 3, 8, 8}, rng);
  const Tensor w = Tensor::randn({4, 3, 3, 3}, rng);
  const Tensor y = conv2d_forward(x, w, {});
  const auto ref = oracle::conv2d(oracle::DTensor(x), oracle::DTensor(w), {});
  ASSERT_EQ(y.shape(), ref.shape);
  for (std::size_t i = 0; i < y.numel(); ++i) EXPECT_NEAR(y[i], ref[i], 1e-5);
}

TEST(Conv2d, MatchesSixLoopReferenceOnRandomGeometries) {
  std::mt19937_64 rng(2024);
  auto pick = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = pick(1, 3), c = pick(1, 6), o = pick(1, 6), k = pick(1, 4);
    const std::size_t stride = pick(1, 3), pad = pick(0, 2);
    const std::size_t h = pick(k, 10), w = pick(k, 10);
    const Tensor x = Tensor::randn({n, c, h, w}, rng);
    const Tensor wt = Tensor::randn({o, c, k, k}, rng);
    const Tensor y = conv2d_forward(x, wt, Conv2dGeometry::square(stride, pad));
    const auto ref = oracle::conv2d(oracle::DTensor(x), oracle::DTensor(wt),
                                    {stride, stride, pad, pad});
    ASSERT_EQ(y.shape(), ref.shape) << "trial " << trial;
    for (std::size_t i = 0; i < y.numel(); ++i) {
      ASSERT_LE(std::fabs(y[i] - ref[i]), 1e-5) << "trial " << trial << " index " << i;
    }
  }
}

TEST(Hardtanh, Clamps) {
  const Tensor y = hardtanh_forward(Tensor::from({3}, {0.3f, 2.0f, -5.0f}));
  EXPECT_FLOAT_EQ(y[0], 0.3f);
  EXPECT_FLOAT_EQ(y[1], 1.0f);
  EXPECT_FLOAT_EQ(y[2], -1.0f);
}

TEST(CrossEntropy, UniformLogitsGiveLn2) {
  const Var z = Var::constant(Tensor::from({1, 2}, {0.0f, 0.0f}));
  const int label = 0;
  EXPECT_NEAR(cross_entropy(z, {&label, 1}).value().item(), std::log(2.0), 1e-6);
}

TEST(CrossEntropy, RejectsOutOfRangeLabel) {
  const Var z = Var::constant(Tensor::zeros({1, 3}));
  const int bad = 3;
  EXPECT_THROW(cross_entropy(z, {&bad, 1}), ValueError);
  const int negative = -1;
  EXPECT_THROW(cross_entropy(z, {&negative, 1}), ValueError);
}

TEST(BatchNorm, StandardizedBatchIsUnchanged) {
  // Two samples per channel at -1 and +1: batch mean 0, variance 1.
  const Tensor x = Tensor::from({2, 2}, {-1.0f, 1.0f, 1.0f, -1.0f});
  BatchNormStats stats(2);
  const Var y = batch_norm(Var::constant(x), Var::constant(Tensor::ones({2})),
                           Var::constant(Tensor::zeros({2})), stats, true);
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_NEAR(y.value()[i], x[i], 1e-5);
}

TEST(BatchNorm, EvalFoldMatchesFormula) {
  BatchNormStats stats(1);
  stats.running_mean[0] = 2.0f;
  stats.running_var[0] = 4.0f;
  const Tensor gamma = Tensor::from({1}, {3.0f});
  const Tensor beta = Tensor::from({1}, {0.5f});
  const Var y = batch_norm(Var::constant(Tensor::from({1, 1}, {6.0f})), Var::constant(gamma),
                           Var::constant(beta), stats, false);
  EXPECT_NEAR(y.value()[0], (6.0 - 2.0) / std::sqrt(4.0 + 1e-5) * 3.0 + 0.5, 1e-5);
}

TEST(CustomGrad, SignWithIdentityBackward) {
  const Var x = Var::leaf(Tensor::from({1}, {0.7f}));
  const Var y = custom_grad(
      x, [](float v) { return v >= 0.0f ? 1.0f : -1.0f; }, [](float) { return 1.0f; });
  EXPECT_FLOAT_EQ(y.value()[0], 1.0f);
  backward(scale(sum(y), 2.0f));
  EXPECT_FLOAT_EQ(x.grad()[0], 2.0f);
}

TEST(CustomGrad, SignWithZeroBackward) {
  const Var x = Var::leaf(Tensor::from({1}, {0.7f}));
  const Var y = custom_grad(
      x, [](float v) { return v >= 0.0f ? 1.0f : -1.0f; }, [](float) { return 0.0f; });
  backward(sum(y));
  EXPECT_FLOAT_EQ(x.grad()[0], 0.0f);
}

TEST(CustomGrad, ScaledTanhDerivativeMatchesCentralDifference) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> xs(-2.0, 2.0), ts(0.1, 5.0);
  for (int i = 0; i < 100; ++i) {
    const double t = ts(rng), k = std::max(1.0 / t, 1.0);
    const float x0 = static_cast<float>(xs(rng));
    const Var x = Var::leaf(Tensor::from({1}, {x0}));
    const Var y = custom_grad(
        x, [&](float v) { return static_cast<float>(k * std::tanh(t * v)); },
        [&](float v) {
          const double th = std::tanh(t * v);
          return static_cast<float>(k * t * (1.0 - th * th));
        });
    backward(sum(y));
    const double h = 1e-4;
    const double fd = (k * std::tanh(t * (x0 + h)) - k * std::tanh(t * (x0 - h))) / (2.0 * h);
    const double analytic = x.grad()[0];
    EXPECT_LE(std::fabs(analytic - fd), 1e-4 * std::max(std::fabs(fd), 1e-3)) << "t=" << t;
  }
}

TEST(Backward, SumGivesOnes) {
  const Var w = Var::leaf(Tensor::from({3}, {1.0f, -2.0f, 5.0f}));
  backward(sum(w));
  for (float g : w.grad().data()) EXPECT_FLOAT_EQ(g, 1.0f);
}

TEST(Backward, SumOfSquares) {
  const Var w = Var::leaf(Tensor::from({2}, {1.0f, 2.0f}));
  backward(sum(mul(w, w)));
  EXPECT_FLOAT_EQ(w.grad()[0], 2.0f);
  EXPECT_FLOAT_EQ(w.grad()[1], 4.0f);
}

TEST(Backward, FanOutAccumulates) {
  const Var w = Var::leaf(Tensor::from({1}, {3.0f}));
  backward(sum(add(w, add(w, w))));
  EXPECT_FLOAT_EQ(w.grad()[0], 3.0f);
}

TEST(Backward, RejectsNonScalarLoss) {
  const Var w = Var::leaf(Tensor::from({2}, {1.0f, 2.0f}));
  EXPECT_THROW(backward(w), ShapeError);
}

TEST(Backward, NoGradGuardSkipsTape) {
  const Var w = Var::leaf(Tensor::from({1}, {1.0f}));
  NoGradGuard guard;
  EXPECT_FALSE(mul(w, w).requires_grad());
}

TEST(CosineLr, Endpoints) {
  EXPECT_NEAR(cosine_lr(0, 400, 0.1), 0.1, 1e-12);
  EXPECT_NEAR(cosine_lr(200, 400, 0.1), 0.05, 1e-12);
  EXPECT_NEAR(cosine_lr(400, 400, 0.1), 0.0, 1e-12);
  EXPECT_THROW(cosine_lr(0, 0, 0.1), ValueError);
  EXPECT_THROW(cosine_lr(0, 10, -0.1), ValueError);
}

TEST(SgdStep, MomentumAndWeightDecay) {
  Tensor p = Tensor::from({1}, {1.0f});
  Tensor v = Tensor::zeros({1});
  const Tensor g = Tensor::from({1}, {0.5f});
  sgd_step(p, g, v, 0.1, 0.9, 0.01);
  // v = 0.5 + 0.01 * 1 = 0.51; p = 1 - 0.051
  EXPECT_NEAR(v[0], 0.51, 1e-7);
  EXPECT_NEAR(p[0], 0.949, 1e-7);
  sgd_step(p, g, v, 0.1, 0.9, 0.01);
  const double v2 = 0.9 * 0.51 + 0.5 + 0.01 * 0.949;
  EXPECT_NEAR(v[0], v2, 1e-6);
  EXPECT_NEAR(p[0], 0.949 - 0.1 * v2, 1e-6);
  EXPECT_THROW(sgd_step(p, g, v, -0.1, 0.9, 0.0), ValueError);
}

TEST(Backward, IdenticalSeedsGiveBitIdenticalGradients) {
  auto run = [] {
    std::mt19937_64 rng(99);
    const Var x = Var::constant(Tensor::randn({4, 2, 6, 6}, rng));
    const Var w = Var::leaf(Tensor::randn({3, 2, 3, 3}, rng));
    const Var v = Var::leaf(Tensor::randn({5, 3 * 4 * 4}, rng));
    BatchNormStats stats(3);
    const Var y = hardtanh(batch_norm(conv2d(x, w, {}), Var::constant(Tensor::ones({3})),
                                      Var::constant(Tensor::zeros({3})), stats, true));
    const std::vector<int> labels{0, 1, 2, 3};
    backward(cross_entropy(linear(flatten(y), v), labels));
    return std::make_pair(w.grad(), v.grad());
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

}  // namespace

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

#include "binet/dte.hpp"
#include "binet/error.hpp"
#include "oracles.hpp"

namespace {

using namespace binet;
using namespace binet::dte;

EstimatorState state(double t, double k, EstimatorMode mode = EstimatorMode::dte) {
  EstimatorState s;
  s.mode = mode;
  s.t = t;
  s.k = k;
  return s;
}

Tensor standard_normal(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return Tensor::randn({n}, rng);
}

TEST(RawSchedule, Endpoints) {
  EXPECT_NEAR(raw_schedule(0, 400, 0.1, 10.0), 0.1, 1e-12);
  EXPECT_NEAR(raw_schedule(200, 400, 0.1, 10.0), 1.0, 1e-12);
  EXPECT_NEAR(raw_schedule(400, 400, 0.1, 10.0), 10.0, 1e-12);
  EXPECT_THROW(raw_schedule(0, 0, 0.1, 10.0), ValueError);
  EXPECT_THROW(raw_schedule(5, 4, 0.1, 10.0), ValueError);
}

TEST(QuantileAbs, NearestRank) {
  const Tensor a = Tensor::from({4}, {1.0f, -1.0f, 3.0f, -3.0f});
  EXPECT_EQ(quantile_abs(a.data(), 0.5), 1.0);
  const Tensor b = Tensor::from({4}, {-3.0f, -1.0f, 1.0f, 3.0f});
  EXPECT_EQ(quantile_abs(b.data(), 1.0), 3.0);
  const Tensor c(Shape{7}, -2.5f);
  for (double q : {0.01, 0.3, 0.5, 1.0}) EXPECT_EQ(quantile_abs(c.data(), q), 2.5);
  EXPECT_THROW(quantile_abs(a.data(), 0.0), ValueError);
  EXPECT_THROW(quantile_abs(a.data(), -0.1), ValueError);
  EXPECT_THROW(quantile_abs(a.data(), 1.5), ValueError);
}

TEST(ClampBounds, GaussianSampleLiteral) {
  const Tensor x = standard_normal(100000, 15);
  const auto b = clamp_bounds(x, 0.1, ClampMode::literal);
  EXPECT_NEAR(b.t_eps, oracle::normal_abs_quantile(0.1), 0.01);
  EXPECT_NEAR(b.t_eps, 0.125, 0.01);
  EXPECT_GE(b.t_100, 4.0);
  EXPECT_LE(b.t_100, 5.0);
  EXPECT_EQ(b.mode, ClampMode::literal);
}

TEST(ClampBounds, GaussianSampleActiveRegion) {
  const Tensor x = standard_normal(100000, 15);
  const auto b = clamp_bounds(x, 0.1, ClampMode::active_region, 0.1);
  EXPECT_NEAR(b.t_100, 1.0 / oracle::normal_abs_quantile(0.1), 0.5);
  EXPECT_NEAR(b.t_100, 8.0, 0.5);
  EXPECT_EQ(b.t_eps, 0.1);
}

TEST(ClampBounds, ConstantTensor) {
  const auto b = clamp_bounds(Tensor(Shape{10}, 0.7f), 0.1, ClampMode::literal);
  EXPECT_FLOAT_EQ(static_cast<float>(b.t_eps), 0.7f);
  EXPECT_FLOAT_EQ(static_cast<float>(b.t_100), 0.7f);
}

TEST(EffectiveT, Examples) {
  const ClampBounds b{0.125, 4.0, ClampMode::literal};
  auto lo = effective_t(0.1, b);
  EXPECT_DOUBLE_EQ(lo.t, 0.125);
  EXPECT_DOUBLE_EQ(lo.k, 8.0);
  auto hi = effective_t(10.0, b);
  EXPECT_DOUBLE_EQ(hi.t, 4.0);
  EXPECT_DOUBLE_EQ(hi.k, 1.0);
  auto mid = effective_t(1.0, ClampBounds{0.01, 100.0, ClampMode::literal});
  EXPECT_DOUBLE_EQ(mid.t, 1.0);
  EXPECT_DOUBLE_EQ(mid.k, 1.0);
}

TEST(EffectiveT, MonotoneInEpoch) {
  const ClampBounds b{0.3, 4.0, ClampMode::literal};
  double prev = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double t = effective_t(raw_schedule(i, 100, 0.1, 10.0), b).t;
    EXPECT_GE(t, prev);
    prev = t;
  }
}

TEST(Derivative, Examples) {
  EXPECT_FLOAT_EQ(state(1.0, 1.0).derivative(0.0f), 1.0f);
  EXPECT_FLOAT_EQ(state(0.1, 10.0).derivative(0.0f), 1.0f);
  const double expected = 10.0 * (1.0 - std::pow(std::tanh(5.0), 2));
  EXPECT_NEAR(state(10.0, 1.0).derivative(0.5f), expected, 1e-7);
  EXPECT_NEAR(expected, 0.00181, 1e-5);
}

TEST(Derivative, Baselines) {
  EXPECT_EQ(state(5.0, 1.0, EstimatorMode::identity).derivative(3.0f), 1.0f);
  EXPECT_EQ(state(5.0, 1.0, EstimatorMode::clip).derivative(0.9f), 1.0f);
  EXPECT_EQ(state(5.0, 1.0, EstimatorMode::clip).derivative(1.1f), 0.0f);
}

TEST(Derivative, MatchesFiniteDifferenceOfForward) {
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> ts(-1.0, 1.0), us(-4.0, 4.0);
  for (int i = 0; i < 1000; ++i) {
    const double t = std::pow(10.0, ts(rng));
    const double k = k_for(t);
    // Beyond |t x| ~ 4 the tanh differences drop under double resolution.
    const double x = static_cast<float>(us(rng) / t);
    const double h = 1e-5 / t;
    const double fd = (k * std::tanh(t * (x + h)) - k * std::tanh(t * (x - h))) / (2.0 * h);
    const double analytic = state(t, k).derivative(static_cast<float>(x));
    EXPECT_LE(std::fabs(analytic - fd) / fd, 1e-4) << "t=" << t << " x=" << x;
  }
}

TEST(Derivative, PeakSymmetryAndContinuity) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ts(-1.0, 1.0), xs(-5.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    const double t = std::pow(10.0, ts(rng));
    const auto s = state(t, k_for(t));
    EXPECT_NEAR(s.peak(), std::max(1.0, t), 1e-12);
    EXPECT_NEAR(s.derivative(0.0f), s.peak(), 1e-6 * s.peak());
    const float x = static_cast<float>(xs(rng));
    EXPECT_EQ(s.derivative(x), s.derivative(-x));
    EXPECT_GE(s.derivative(x), 0.0f);
    EXPECT_LE(s.derivative(x), s.derivative(0.0f));
  }
  EXPECT_DOUBLE_EQ(k_for(1.0), 1.0);
  EXPECT_NEAR(state(1.0 - 1e-9, k_for(1.0 - 1e-9)).derivative(0.3f),
              state(1.0 + 1e-9, k_for(1.0 + 1e-9)).derivative(0.3f), 1e-6);
}

TEST(Forward, Examples) {
  EXPECT_NEAR(state(1.0, 1.0).surrogate(20.0f), 1.0, 1e-6);
  for (double t : {0.1, 1.0, 10.0}) EXPECT_EQ(state(t, k_for(t)).surrogate(0.0f), 0.0f);
  const Tensor x = Tensor::from({3}, {-1.0f, 0.0f, 1.0f});
  const Tensor y = dte_forward(x, state(2.0, 1.0));
  EXPECT_NEAR(y[0], -std::tanh(2.0), 1e-6);
  const Tensor d = dte_derivative(x, state(2.0, 1.0));
  EXPECT_NEAR(d[2], 2.0 * (1.0 - std::pow(std::tanh(2.0), 2)), 1e-6);
}

TEST(UpdatableFraction, NearOneInStageOne) {
  const Tensor x = standard_normal(100000, 18);
  for (double t : {0.1, 0.5, 1.0}) {
    const double width = std::atanh(std::sqrt(1.0 - 0.1)) / t;
    const double expected = oracle::normal_abs_cdf(width);
    const double f = updatable_fraction(x, state(t, k_for(t)), 0.1);
    EXPECT_NEAR(f, expected, 0.01) << "t=" << t;
    EXPECT_GE(f, 0.93);
  }
}

TEST(UpdatableFraction, SteepStageMatchesGaussianCdf) {
  const Tensor x = standard_normal(100000, 19);
  const double width = std::atanh(std::sqrt(0.9)) / 10.0;
  EXPECT_NEAR(width, 0.182, 1e-3);
  const double expected = oracle::normal_abs_cdf(width);
  EXPECT_NEAR(expected, 0.144, 1e-3);
  EXPECT_NEAR(updatable_fraction(x, state(10.0, 1.0), 0.1), expected, 0.005);
}

TEST(UpdatableFraction, ZeroWeightsAllAtPeak) {
  EXPECT_EQ(updatable_fraction(Tensor::zeros({16}), state(10.0, 1.0), 0.1), 1.0);
}

TEST(UpdatableFraction, ActiveRegionThresholdSelectsUnitBand) {
  // |t x| <= 1 exactly when 1 - tanh^2(t x) >= 1 - tanh^2(1).
  const Tensor x = standard_normal(20000, 20);
  const double t = 3.0;
  std::size_t inside = 0;
  for (float v : x.data()) inside += std::fabs(t * v) <= 1.0 ? 1 : 0;
  EXPECT_NEAR(updatable_fraction(x, state(t, 1.0), kActiveRegionDelta),
              static_cast<double>(inside) / 20000.0, 1e-3);
}

TEST(StateForEpoch, ActiveRegionKeepsEpsilonUpdatable) {
  ScheduleConfig cfg;
  cfg.clamp = ClampMode::active_region;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Tensor w = standard_normal(4096, 100 + seed);
    for (int epoch = 0; epoch <= 50; ++epoch) {
      const auto s = state_for_epoch(cfg, epoch, 50, w);
      EXPECT_GE(updatable_fraction(w, s, kActiveRegionDelta), cfg.epsilon);
      EXPECT_NEAR(s.k * s.t, std::max(1.0, s.t), 1e-12);
    }
  }
}

TEST(StateForEpoch, EdeIsUnclamped) {
  ScheduleConfig cfg;
  cfg.mode = EstimatorMode::ede;
  const Tensor w = standard_normal(4096, 21);
  const auto s = state_for_epoch(cfg, 50, 50, w);
  EXPECT_DOUBLE_EQ(s.t, 10.0);
  EXPECT_LT(updatable_fraction(w, s, kActiveRegionDelta), 0.1);
}

TEST(Names, RoundTrip) {
  for (auto m : {EstimatorMode::dte, EstimatorMode::ede, EstimatorMode::clip,
                 EstimatorMode::identity}) {
    EXPECT_EQ(parse_estimator_mode(to_string(m)), m);
  }
  for (auto c : {ClampMode::literal, ClampMode::active_region}) {
    EXPECT_EQ(parse_clamp_mode(to_string(c)), c);
  }
  EXPECT_THROW(parse_estimator_mode("ste"), ConfigError);
  EXPECT_THROW(parse_clamp_mode("both"), ConfigError);
}

}  // namespace

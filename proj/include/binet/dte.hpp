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

#pragma once

#include <span>
#include <string>
#include <string_view>

#include "binet/tensor.hpp"

/// Backward surrogates for sign(): the distribution-sensitive two-stage
/// estimator g(x) = k * tanh(t * x) with its epoch schedule and quantile
/// clamps, plus the EDE / Clip / Identity baselines used in ablations.
namespace binet::dte {

enum class EstimatorMode {
  dte,       ///< clamped schedule
  ede,       ///< the same schedule without distribution clamps
  clip,      ///< g'(x) = 1 on |x| <= 1, else 0
  identity,  ///< g'(x) = 1
};

enum class ClampMode {
  literal,        ///< t in [q_eps(|w|), max|w|]
  active_region,  ///< t in [t_min, 1 / q_eps(|w|)]
};

std::string_view to_string(EstimatorMode m) noexcept;
std::string_view to_string(ClampMode m) noexcept;
/// Throw ConfigError on unknown names.
EstimatorMode parse_estimator_mode(std::string_view name);
ClampMode parse_clamp_mode(std::string_view name);

inline constexpr double kDefaultEpsilon = 0.1;
inline constexpr double kDefaultTMin = 0.1;
inline constexpr double kDefaultTMax = 10.0;
inline constexpr double kDefaultDelta = 0.1;
/// 1 - tanh^2(1), rounded down in the fifth digit. With this threshold the
/// updatable set is exactly the active region {|x| <= 1/t}.
inline constexpr double kActiveRegionDelta = 0.41997;

/// t_min * 10^((i/N) * log10(t_max / t_min)). Throws ValueError for N <= 0
/// or i outside [0, N].
double raw_schedule(int epoch, int total, double t_min, double t_max);

/// Nearest-rank quantile of |x|: the ceil(q * n)-th smallest magnitude.
/// Throws ValueError for q <= 0, q > 1 or empty input.
double quantile_abs(std::span<const float> x, double q);

struct ClampBounds {
  double t_eps = 0.0;
  double t_100 = 0.0;
  ClampMode mode = ClampMode::literal;
};

ClampBounds clamp_bounds(const Tensor& w_std, double epsilon, ClampMode mode,
                         double t_min = kDefaultTMin);

struct Temperature {
  double t = 1.0;
  double k = 1.0;
};

/// k for a given t: max(1/t, 1).
inline double k_for(double t) noexcept { return t < 1.0 ? 1.0 / t : 1.0; }

/// t = min(t_100, max(t_raw, t_eps)), k = max(1/t, 1). Degenerate bounds
/// (t_100 <= 0, from an all-zero tensor) leave t_raw unclamped.
Temperature effective_t(double t_raw, const ClampBounds& bounds);

struct EstimatorState {
  EstimatorMode mode = EstimatorMode::dte;
  double t = 1.0;
  double k = 1.0;
  int epoch = 0;
  int total = 1;
  double epsilon = kDefaultEpsilon;
  double t_min = kDefaultTMin;
  double t_max = kDefaultTMax;
  ClampBounds bounds{};

  /// g'(x) for this mode.
  float derivative(float x) const noexcept;
  /// g(x) for this mode (k tanh(tx), x, or hardtanh(x)).
  float surrogate(float x) const noexcept;
  /// max_x g'(x).
  double peak() const noexcept;
};

struct ScheduleConfig {
  EstimatorMode mode = EstimatorMode::dte;
  ClampMode clamp = ClampMode::literal;
  double epsilon = kDefaultEpsilon;
  double t_min = kDefaultTMin;
  double t_max = kDefaultTMax;
};

/// Finalizes one layer's estimator for `epoch` of `total` from its current
/// standardized weights.
EstimatorState state_for_epoch(const ScheduleConfig& cfg, int epoch, int total,
                               const Tensor& w_std);

/// Elementwise g'(x) = k t (1 - tanh^2(t x)) (or the baseline rule).
Tensor dte_derivative(const Tensor& x, const EstimatorState& state);
/// Elementwise g(x) = k tanh(t x) (or the baseline rule).
Tensor dte_forward(const Tensor& x, const EstimatorState& state);

/// Fraction of elements whose g' is at least delta times the peak g'.
double updatable_fraction(const Tensor& w_std, const EstimatorState& state,
                          double delta = kDefaultDelta);

}  // namespace binet::dte

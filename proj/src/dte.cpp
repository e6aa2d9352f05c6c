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

#include "binet/dte.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "binet/error.hpp"

namespace binet::dte {

std::string_view to_string(EstimatorMode m) noexcept {
  switch (m) {
    case EstimatorMode::dte: return "dte";
    case EstimatorMode::ede: return "ede";
    case EstimatorMode::clip: return "clip";
    case EstimatorMode::identity: return "identity";
  }
  return "dte";
}

std::string_view to_string(ClampMode m) noexcept {
  return m == ClampMode::literal ? "literal" : "active-region";
}

EstimatorMode parse_estimator_mode(std::string_view name) {
  if (name == "dte") return EstimatorMode::dte;
  if (name == "ede") return EstimatorMode::ede;
  if (name == "clip") return EstimatorMode::clip;
  if (name == "identity") return EstimatorMode::identity;
  throw ConfigError("unknown estimator '" + std::string(name) +
                    "' (expected dte, ede, clip or identity)");
}

ClampMode parse_clamp_mode(std::string_view name) {
  if (name == "literal") return ClampMode::literal;
  if (name == "active-region") return ClampMode::active_region;
  throw ConfigError("unknown clamp mode '" + std::string(name) +
                    "' (expected literal or active-region)");
}

double raw_schedule(int epoch, int total, double t_min, double t_max) {
  if (total <= 0) throw ValueError("raw_schedule: total epochs must be positive");
  if (epoch < 0 || epoch > total) {
    throw ValueError("raw_schedule: epoch " + std::to_string(epoch) + " outside [0, " +
                     std::to_string(total) + "]");
  }
  const double frac = static_cast<double>(epoch) / static_cast<double>(total);
  return t_min * std::pow(10.0, frac * std::log10(t_max / t_min));
}

double quantile_abs(std::span<const float> x, double q) {
  if (!(q > 0.0) || q > 1.0) {
    throw ValueError("quantile_abs: q must lie in (0, 1], got " + std::to_string(q));
  }
  if (x.empty()) throw ValueError("quantile_abs: empty tensor");
  std::vector<float> mags(x.size());
  std::transform(x.begin(), x.end(), mags.begin(), [](float v) { return std::fabs(v); });
  const auto n = static_cast<double>(mags.size());
  // Nudge before ceil so products like 0.5 * 4 that land a hair above an
  // integer in binary do not skip a rank.
  auto rank = static_cast<std::size_t>(std::ceil(q * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, mags.size());
  auto nth = mags.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(mags.begin(), nth, mags.end());
  return *nth;
}

ClampBounds clamp_bounds(const Tensor& w_std, double epsilon, ClampMode mode, double t_min) {
  const double q_eps = quantile_abs(w_std.data(), epsilon);
  if (mode == ClampMode::literal) {
    return {q_eps, quantile_abs(w_std.data(), 1.0), mode};
  }
  const double cap = q_eps > 0.0 ? 1.0 / q_eps : std::numeric_limits<double>::infinity();
  return {t_min, cap, mode};
}

Temperature effective_t(double t_raw, const ClampBounds& bounds) {
  double t = t_raw;
  if (bounds.t_100 > 0.0) t = std::min(bounds.t_100, std::max(t_raw, bounds.t_eps));
  return {t, k_for(t)};
}

float EstimatorState::derivative(float x) const noexcept {
  switch (mode) {
    case EstimatorMode::identity: return 1.0f;
    case EstimatorMode::clip: return std::fabs(x) <= 1.0f ? 1.0f : 0.0f;
    case EstimatorMode::dte:
    case EstimatorMode::ede: break;
  }
  // 1 - tanh^2(y) written as 4z / (1 + z)^2 with z = exp(-2|y|): one exp
  // instead of a tanh, and no cancellation for large |y|.
  const double z = std::exp(-2.0 * std::fabs(t * static_cast<double>(x)));
  const double d = 1.0 + z;
  return static_cast<float>(k * t * (4.0 * z / (d * d)));
}

float EstimatorState::surrogate(float x) const noexcept {
  switch (mode) {
    case EstimatorMode::identity: return x;
    case EstimatorMode::clip: return std::clamp(x, -1.0f, 1.0f);
    case EstimatorMode::dte:
    case EstimatorMode::ede: break;
  }
  return static_cast<float>(k * std::tanh(t * static_cast<double>(x)));
}

double EstimatorState::peak() const noexcept {
  if (mode == EstimatorMode::identity || mode == EstimatorMode::clip) return 1.0;
  return k * t;
}

EstimatorState state_for_epoch(const ScheduleConfig& cfg, int epoch, int total,
                               const Tensor& w_std) {
  EstimatorState s;
  s.mode = cfg.mode;
  s.epoch = epoch;
  s.total = total;
  s.epsilon = cfg.epsilon;
  s.t_min = cfg.t_min;
  s.t_max = cfg.t_max;
  if (cfg.mode == EstimatorMode::identity || cfg.mode == EstimatorMode::clip) return s;

  const double t_raw = raw_schedule(std::min(epoch, total), total, cfg.t_min, cfg.t_max);
  if (cfg.mode == EstimatorMode::dte) {
    s.bounds = clamp_bounds(w_std, cfg.epsilon, cfg.clamp, cfg.t_min);
    const Temperature tk = effective_t(t_raw, s.bounds);
    s.t = tk.t;
    s.k = tk.k;
  } else {
    s.t = t_raw;
    s.k = k_for(t_raw);
  }
  return s;
}

Tensor dte_derivative(const Tensor& x, const EstimatorState& state) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) out[i] = state.derivative(x[i]);
  return out;
}

Tensor dte_forward(const Tensor& x, const EstimatorState& state) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) out[i] = state.surrogate(x[i]);
  return out;
}

double updatable_fraction(const Tensor& w_std, const EstimatorState& state, double delta) {
  if (w_std.empty()) return 0.0;
  std::size_t count = 0;
  switch (state.mode) {
    case EstimatorMode::identity:
      return 1.0;
    case EstimatorMode::clip:
      for (float v : w_std.data()) count += std::fabs(v) <= 1.0f ? 1 : 0;
      break;
    case EstimatorMode::dte:
    case EstimatorMode::ede:
      // g'(x) / peak = 1 - tanh^2(t x), compared in double.
      for (float v : w_std.data()) {
        const double th = std::tanh(state.t * static_cast<double>(v));
        count += (1.0 - th * th) >= delta ? 1 : 0;
      }
      break;
  }
  return static_cast<double>(count) / static_cast<double>(w_std.numel());
}

}  // namespace binet::dte

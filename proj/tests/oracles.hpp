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

// Reference computations used as test oracles. Everything here is written
// directly from the textbook definitions in 64-bit arithmetic and shares no
// code with the library paths it checks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "binet/tensor.hpp"

namespace oracle {

using binet::Shape;
using binet::Tensor;

struct DTensor {
  Shape shape;
  std::vector<double> v;

  DTensor() = default;
  explicit DTensor(Shape s, double fill = 0.0) : shape(std::move(s)), v(numel(shape), fill) {}
  explicit DTensor(const Tensor& t) : shape(t.shape()), v(t.data().begin(), t.data().end()) {}

  static std::size_t numel(const Shape& s) {
    std::size_t n = 1;
    for (auto d : s) n *= d;
    return n;
  }
  std::size_t dim(std::size_t i) const { return shape.at(i); }
  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }
};

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// P(|Z| <= a) for a standard normal Z.
inline double normal_abs_cdf(double a) { return 2.0 * normal_cdf(a) - 1.0; }

/// Quantile of |Z| by bisection on normal_abs_cdf.
inline double normal_abs_quantile(double q) {
  double lo = 0.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_abs_cdf(mid) < q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double bernoulli_entropy(double p) {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log(p);
  if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
  return h;
}

/// (w - mean) / population std, all in double.
inline std::vector<double> standardize(const std::vector<double>& w) {
  double mean = 0.0;
  for (double x : w) mean += x;
  mean /= static_cast<double>(w.size());
  double var = 0.0;
  for (double x : w) var += (x - mean) * (x - mean);
  var /= static_cast<double>(w.size());
  const double sd = std::max(std::sqrt(var), 1e-12);
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = (w[i] - mean) / sd;
  return out;
}

/// Integer s minimizing sum (x - sign(x) 2^s)^2, by scanning every s in
/// [-40, 40]. Ties go to the smaller s.
inline int brute_force_shift(const std::vector<double>& x) {
  int best = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (int s = -40; s <= 40; ++s) {
    const double scale = std::ldexp(1.0, s);
    double err = 0.0;
    for (double v : x) {
      const double q = (v >= 0.0 ? 1.0 : -1.0) * scale;
      err += (v - q) * (v - q);
    }
    if (err < best_err) {
      best_err = err;
      best = s;
    }
  }
  return best;
}

struct ConvParams {
  std::size_t stride_h = 1, stride_w = 1, pad_h = 0, pad_w = 0;
};

/// Direct six-loop cross-correlation, NCHW x OIHW, zero padding.
inline DTensor conv2d(const DTensor& x, const DTensor& w, const ConvParams& p) {
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), wd = x.dim(3);
  const std::size_t o = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  const std::size_t oh = (h + 2 * p.pad_h - kh) / p.stride_h + 1;
  const std::size_t ow = (wd + 2 * p.pad_w - kw) / p.stride_w + 1;
  DTensor y({n, o, oh, ow});
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t oc = 0; oc < o; ++oc)
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
          double acc = 0.0;
          for (std::size_t ic = 0; ic < c; ++ic)
            for (std::size_t u = 0; u < kh; ++u)
              for (std::size_t v = 0; v < kw; ++v) {
                const long yy = static_cast<long>(i * p.stride_h + u) - static_cast<long>(p.pad_h);
                const long xx = static_cast<long>(j * p.stride_w + v) - static_cast<long>(p.pad_w);
                if (yy < 0 || xx < 0 || yy >= static_cast<long>(h) || xx >= static_cast<long>(wd)) continue;
                acc += x[((b * c + ic) * h + yy) * wd + xx] * w[((oc * c + ic) * kh + u) * kw + v];
              }
          y[((b * o + oc) * oh + i) * ow + j] = acc;
        }
  return y;
}

/// x: N x I, w: O x I.
inline DTensor linear(const DTensor& x, const DTensor& w) {
  const std::size_t n = x.dim(0), in = w.dim(1), o = w.dim(0);
  DTensor y({n, o});
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t k = 0; k < o; ++k) {
      double acc = 0.0;
      for (std::size_t i = 0; i < in; ++i) acc += x[b * in + i] * w[k * in + i];
      y[b * o + k] = acc;
    }
  return y;
}

inline DTensor hardtanh(const DTensor& x) {
  DTensor y = x;
  for (double& v : y.v) v = std::clamp(v, -1.0, 1.0);
  return y;
}

/// Training-mode batch norm over N x C (x H x W) with biased batch variance.
inline DTensor batch_norm_train(const DTensor& x, const std::vector<double>& gamma,
                                const std::vector<double>& beta, double eps) {
  const std::size_t n = x.dim(0), c = x.dim(1);
  const std::size_t hw = x.shape.size() == 4 ? x.dim(2) * x.dim(3) : 1;
  DTensor y(x.shape);
  for (std::size_t ch = 0; ch < c; ++ch) {
    double mean = 0.0;
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t p = 0; p < hw; ++p) mean += x[(b * c + ch) * hw + p];
    mean /= static_cast<double>(n * hw);
    double var = 0.0;
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t p = 0; p < hw; ++p) {
        const double d = x[(b * c + ch) * hw + p] - mean;
        var += d * d;
      }
    var /= static_cast<double>(n * hw);
    const double inv = 1.0 / std::sqrt(var + eps);
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t p = 0; p < hw; ++p) {
        const std::size_t i = (b * c + ch) * hw + p;
        y[i] = (x[i] - mean) * inv * gamma[ch] + beta[ch];
      }
  }
  return y;
}

inline DTensor max_pool(const DTensor& x, std::size_t k, std::size_t s) {
  const std::size_t n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t oh = (h - k) / s + 1, ow = (w - k) / s + 1;
  DTensor y({n, c, oh, ow});
  for (std::size_t pl = 0; pl < n * c; ++pl)
    for (std::size_t i = 0; i < oh; ++i)
      for (std::size_t j = 0; j < ow; ++j) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t u = 0; u < k; ++u)
          for (std::size_t v = 0; v < k; ++v) m = std::max(m, x[(pl * h + i * s + u) * w + j * s + v]);
        y[(pl * oh + i) * ow + j] = m;
      }
  return y;
}

inline DTensor global_avg_pool(const DTensor& x) {
  const std::size_t n = x.dim(0), c = x.dim(1), hw = x.dim(2) * x.dim(3);
  DTensor y({n, c});
  for (std::size_t pl = 0; pl < n * c; ++pl) {
    double acc = 0.0;
    for (std::size_t p = 0; p < hw; ++p) acc += x[pl * hw + p];
    y[pl] = acc / static_cast<double>(hw);
  }
  return y;
}

/// Mean softmax cross-entropy.
inline double cross_entropy(const DTensor& logits, const std::vector<int>& labels) {
  const std::size_t n = logits.dim(0), c = logits.dim(1);
  double total = 0.0;
  for (std::size_t b = 0; b < n; ++b) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < c; ++k) m = std::max(m, logits[b * c + k]);
    double z = 0.0;
    for (std::size_t k = 0; k < c; ++k) z += std::exp(logits[b * c + k] - m);
    total += std::log(z) + m - logits[b * c + static_cast<std::size_t>(labels[b])];
  }
  return total / static_cast<double>(n);
}

inline double dot(const DTensor& a, const DTensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Central differences of f at x with step h, every coordinate.
inline std::vector<double> central_difference(const std::function<double(const DTensor&)>& f,
                                              DTensor x, double h = 1e-3) {
  std::vector<double> g(x.v.size());
  for (std::size_t i = 0; i < x.v.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f(x);
    x[i] = keep - h;
    const double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

/// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
inline double relative_error(std::span<const float> analytic, const std::vector<double>& numeric) {
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    const double a = analytic[i];
    diff += (a - numeric[i]) * (a - numeric[i]);
    na += a * a;
    nn += numeric[i] * numeric[i];
  }
  const double denom = std::sqrt(std::max(na, nn));
  return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

}  // namespace oracle

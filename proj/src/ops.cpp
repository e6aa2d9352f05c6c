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

#include "binet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "binet/error.hpp"
#include "binet/kernels/gemm.hpp"

namespace binet {
namespace {

struct ConvDims {
  std::size_t n, c, h, w;
  std::size_t o, kh, kw;
  std::size_t oh, ow;
  std::size_t ckk() const { return c * kh * kw; }
  std::size_t pixels() const { return oh * ow; }
};

ConvDims conv_dims(const Tensor& input, const Tensor& weight, const Conv2dGeometry& g) {
  if (input.rank() != 4 || weight.rank() != 4) {
    throw ShapeError("conv2d expects NCHW input and OIHW weight, got " +
                     shape_str(input.shape()) + " and " + shape_str(weight.shape()));
  }
  if (input.dim(1) != weight.dim(1)) {
    throw ShapeError("conv2d channel mismatch: input " + shape_str(input.shape()) +
                     ", weight " + shape_str(weight.shape()));
  }
  if (g.stride_h == 0 || g.stride_w == 0) throw ShapeError("conv2d stride must be positive");
  ConvDims d{input.dim(0), input.dim(1), input.dim(2), input.dim(3), weight.dim(0),
             weight.dim(2), weight.dim(3), 0, 0};
  d.oh = conv_out_extent(d.h, d.kh, g.stride_h, g.pad_h);
  d.ow = conv_out_extent(d.w, d.kw, g.stride_w, g.pad_w);
  return d;
}

// col is (C*KH*KW) x (N*OH*OW).
std::vector<float> im2col(const Tensor& input, const ConvDims& d, const Conv2dGeometry& g) {
  const std::size_t np = d.n * d.pixels();
  std::vector<float> col(d.ckk() * np, 0.0f);
  const float* x = input.ptr();
  for (std::size_t c = 0; c < d.c; ++c) {
    for (std::size_t ky = 0; ky < d.kh; ++ky) {
      for (std::size_t kx = 0; kx < d.kw; ++kx) {
        float* row = col.data() + ((c * d.kh + ky) * d.kw + kx) * np;
        for (std::size_t n = 0; n < d.n; ++n) {
          const float* plane = x + (n * d.c + c) * d.h * d.w;
          float* dst = row + n * d.pixels();
          for (std::size_t oy = 0; oy < d.oh; ++oy) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride_h + ky) -
                                      static_cast<std::ptrdiff_t>(g.pad_h);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(d.h)) continue;
            const float* src = plane + static_cast<std::size_t>(iy) * d.w;
            for (std::size_t ox = 0; ox < d.ow; ++ox) {
              const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride_w + kx) -
                                        static_cast<std::ptrdiff_t>(g.pad_w);
              if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(d.w)) {
                dst[oy * d.ow + ox] = src[ix];
              }
            }
          }
        }
      }
    }
  }
  return col;
}

void col2im_add(const std::vector<float>& col, const ConvDims& d, const Conv2dGeometry& g,
                Tensor& dx) {
  const std::size_t np = d.n * d.pixels();
  float* x = dx.ptr();
  for (std::size_t c = 0; c < d.c; ++c) {
    for (std::size_t ky = 0; ky < d.kh; ++ky) {
      for (std::size_t kx = 0; kx < d.kw; ++kx) {
        const float* row = col.data() + ((c * d.kh + ky) * d.kw + kx) * np;
        for (std::size_t n = 0; n < d.n; ++n) {
          float* plane = x + (n * d.c + c) * d.h * d.w;
          const float* src = row + n * d.pixels();
          for (std::size_t oy = 0; oy < d.oh; ++oy) {
            const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride_h + ky) -
                                      static_cast<std::ptrdiff_t>(g.pad_h);
            if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(d.h)) continue;
            float* dst = plane + static_cast<std::size_t>(iy) * d.w;
            for (std::size_t ox = 0; ox < d.ow; ++ox) {
              const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride_w + kx) -
                                        static_cast<std::ptrdiff_t>(g.pad_w);
              if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(d.w)) dst[ix] += src[oy * d.ow + ox];
            }
          }
        }
      }
    }
  }
}

Tensor conv_from_col(const std::vector<float>& col, const Tensor& weight, const ConvDims& d) {
  const std::size_t np = d.n * d.pixels();
  std::vector<float> y(d.o * np);
  kernels::sgemm(d.o, np, d.ckk(), weight.ptr(), d.ckk(), col.data(), np, y.data(), np, false);
  Tensor out({d.n, d.o, d.oh, d.ow});
  float* dst = out.ptr();
  for (std::size_t n = 0; n < d.n; ++n) {
    for (std::size_t o = 0; o < d.o; ++o) {
      std::copy_n(y.data() + o * np + n * d.pixels(), d.pixels(),
                  dst + (n * d.o + o) * d.pixels());
    }
  }
  return out;
}

std::size_t channels_of(const Tensor& x) {
  if (x.rank() != 2 && x.rank() != 4) {
    throw ShapeError("expected N x C or N x C x H x W, got " + shape_str(x.shape()));
  }
  return x.dim(1);
}

std::size_t spatial_of(const Tensor& x) { return x.rank() == 4 ? x.dim(2) * x.dim(3) : 1; }

}  // namespace

std::size_t conv_out_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                            std::size_t pad) {
  if (kernel == 0 || in + 2 * pad < kernel) {
    throw ShapeError("convolution window " + std::to_string(kernel) + " does not fit extent " +
                     std::to_string(in) + " with padding " + std::to_string(pad));
  }
  return (in + 2 * pad - kernel) / stride + 1;
}

void transpose(const float* src, std::size_t rows, std::size_t cols, float* dst) {
  constexpr std::size_t kBlock = 32;
  for (std::size_t r0 = 0; r0 < rows; r0 += kBlock) {
    for (std::size_t c0 = 0; c0 < cols; c0 += kBlock) {
      const std::size_t r1 = std::min(rows, r0 + kBlock);
      const std::size_t c1 = std::min(cols, c0 + kBlock);
      for (std::size_t r = r0; r < r1; ++r) {
        for (std::size_t c = c0; c < c1; ++c) dst[c * rows + r] = src[r * cols + c];
      }
    }
  }
}

Tensor conv2d_forward(const Tensor& input, const Tensor& weight, const Conv2dGeometry& geom) {
  const ConvDims d = conv_dims(input, weight, geom);
  return conv_from_col(im2col(input, d, geom), weight, d);
}

Var conv2d(const Var& input, const Var& weight, const Conv2dGeometry& geom) {
  const ConvDims d = conv_dims(input.value(), weight.value(), geom);
  std::vector<float> col = im2col(input.value(), d, geom);
  Tensor out = conv_from_col(col, weight.value(), d);
  if (!tracks_grad({input, weight})) return Var::make(std::move(out), {}, "conv2d", nullptr);

  return Var::make(
      std::move(out), {input, weight}, "conv2d",
      [d, geom, col = std::move(col)](Node& self) {
        Node& in = *self.parents[0];
        Node& w = *self.parents[1];
        const std::size_t np = d.n * d.pixels();
        const float* g = self.grad.ptr();
        if (w.requires_grad) {
          // dW^T = col * dY^T; transposing dY is far cheaper than transposing col.
          std::vector<float> dy_t(np * d.o);
          for (std::size_t n = 0; n < d.n; ++n) {
            transpose(g + n * d.o * d.pixels(), d.o, d.pixels(), dy_t.data() + n * d.pixels() * d.o);
          }
          std::vector<float> wg_t(d.ckk() * d.o);
          kernels::sgemm(d.ckk(), d.o, np, col.data(), np, dy_t.data(), d.o, wg_t.data(), d.o,
                         false);
          Tensor& wg = w.grad_buffer();
          for (std::size_t o = 0; o < d.o; ++o) {
            for (std::size_t j = 0; j < d.ckk(); ++j) wg[o * d.ckk() + j] += wg_t[j * d.o + o];
          }
        }
        if (in.requires_grad) {
          std::vector<float> dy(d.o * np);
          for (std::size_t n = 0; n < d.n; ++n) {
            for (std::size_t o = 0; o < d.o; ++o) {
              std::copy_n(g + (n * d.o + o) * d.pixels(), d.pixels(),
                          dy.data() + o * np + n * d.pixels());
            }
          }
          std::vector<float> w_t(d.o * d.ckk());
          transpose(w.value.ptr(), d.o, d.ckk(), w_t.data());
          std::vector<float> dcol(d.ckk() * np);
          kernels::sgemm(d.ckk(), np, d.o, w_t.data(), d.o, dy.data(), np, dcol.data(), np,
                         false);
          col2im_add(dcol, d, geom, in.grad_buffer());
        }
      });
}

Tensor linear_forward(const Tensor& input, const Tensor& weight) {
  if (input.rank() < 1 || weight.rank() != 2) {
    throw ShapeError("linear expects N x I input and O x I weight");
  }
  const std::size_t n = input.dim(0);
  const std::size_t in_features = n ? input.numel() / n : 0;
  if (in_features != weight.dim(1)) {
    throw ShapeError("linear feature mismatch: input " + shape_str(input.shape()) +
                     ", weight " + shape_str(weight.shape()));
  }
  const std::size_t out_features = weight.dim(0);
  std::vector<float> w_t(weight.numel());
  transpose(weight.ptr(), out_features, in_features, w_t.data());
  Tensor out({n, out_features});
  kernels::sgemm(n, out_features, in_features, input.ptr(), in_features, w_t.data(),
                 out_features, out.ptr(), out_features, false);
  return out;
}

Var linear(const Var& input, const Var& weight) {
  Tensor out = linear_forward(input.value(), weight.value());
  const std::size_t n = input.value().dim(0);
  const std::size_t in_features = weight.value().dim(1);
  const std::size_t out_features = weight.value().dim(0);
  return Var::make(std::move(out), {input, weight}, "linear",
                   [n, in_features, out_features](Node& self) {
                     Node& in = *self.parents[0];
                     Node& w = *self.parents[1];
                     if (in.requires_grad) {
                       // dX = dY * W
                       Tensor& ig = in.grad_buffer();
                       kernels::sgemm(n, in_features, out_features, self.grad.ptr(),
                                      out_features, w.value.ptr(), in_features, ig.ptr(),
                                      in_features, true);
                     }
                     if (w.requires_grad) {
                       // dW = dY^T * X
                       std::vector<float> dy_t(n * out_features);
                       transpose(self.grad.ptr(), n, out_features, dy_t.data());
                       Tensor& wg = w.grad_buffer();
                       kernels::sgemm(out_features, in_features, n, dy_t.data(), n,
                                      in.value.ptr(), in_features, wg.ptr(), in_features, true);
                     }
                   });
}

std::pair<Tensor, Tensor> batch_norm_fold(const Tensor& gamma, const Tensor& beta,
                                          const BatchNormStats& stats) {
  const std::size_t c = gamma.numel();
  Tensor scale_t({c});
  Tensor shift_t({c});
  for (std::size_t i = 0; i < c; ++i) {
    const float inv = 1.0f / std::sqrt(stats.running_var[i] + stats.eps);
    scale_t[i] = gamma[i] * inv;
    shift_t[i] = beta[i] - stats.running_mean[i] * scale_t[i];
  }
  return {std::move(scale_t), std::move(shift_t)};
}

Tensor channel_affine(const Tensor& x, std::span<const float> scale_c,
                      std::span<const float> shift_c) {
  const std::size_t c = channels_of(x);
  if (scale_c.size() != c || shift_c.size() != c) {
    throw ShapeError("channel affine expects " + std::to_string(c) + " channels");
  }
  const std::size_t n = x.dim(0);
  const std::size_t hw = spatial_of(x);
  Tensor y(x.shape());
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const float* src = x.ptr() + (b * c + ch) * hw;
      float* dst = y.ptr() + (b * c + ch) * hw;
      const float s = scale_c[ch];
      const float t = shift_c[ch];
      for (std::size_t i = 0; i < hw; ++i) dst[i] = src[i] * s + t;
    }
  }
  return y;
}

Var batch_norm(const Var& input, const Var& gamma, const Var& beta, BatchNormStats& stats,
               bool training) {
  const Tensor& x = input.value();
  const std::size_t c = channels_of(x);
  if (gamma.value().numel() != c || beta.value().numel() != c ||
      stats.running_mean.numel() != c) {
    throw ShapeError("batch_norm parameter count does not match " + std::to_string(c) +
                     " channels");
  }
  if (!training) {
    auto [s, t] = batch_norm_fold(gamma.value(), beta.value(), stats);
    Tensor y = channel_affine(x, s.data(), t.data());
    const std::size_t n = x.dim(0);
    const std::size_t hw = spatial_of(x);
    return Var::make(std::move(y), {input, gamma, beta}, "batch_norm_eval",
                     [s, n, c, hw](Node& self) {
                       Node& in = *self.parents[0];
                       if (!in.requires_grad) return;
                       Tensor& ig = in.grad_buffer();
                       for (std::size_t b = 0; b < n; ++b) {
                         for (std::size_t ch = 0; ch < c; ++ch) {
                           const std::size_t off = (b * c + ch) * hw;
                           for (std::size_t i = 0; i < hw; ++i) {
                             ig[off + i] += self.grad[off + i] * s[ch];
                           }
                         }
                       }
                     });
  }

  const std::size_t n = x.dim(0);
  const std::size_t hw = spatial_of(x);
  const std::size_t count = n * hw;
  if (count < 2) throw ShapeError("batch_norm in train mode needs more than one value per channel");
  Tensor xhat(x.shape());
  Tensor inv_std({c});
  Tensor y(x.shape());
  for (std::size_t ch = 0; ch < c; ++ch) {
    double sum = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      const float* src = x.ptr() + (b * c + ch) * hw;
      for (std::size_t i = 0; i < hw; ++i) sum += src[i];
    }
    const double mean = sum / static_cast<double>(count);
    double sq = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      const float* src = x.ptr() + (b * c + ch) * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        const double dv = src[i] - mean;
        sq += dv * dv;
      }
    }
    const double var = sq / static_cast<double>(count);
    const double inv = 1.0 / std::sqrt(var + stats.eps);
    inv_std[ch] = static_cast<float>(inv);
    const float g = gamma.value()[ch];
    const float bt = beta.value()[ch];
    for (std::size_t b = 0; b < n; ++b) {
      const std::size_t off = (b * c + ch) * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        const float xh = static_cast<float>((x[off + i] - mean) * inv);
        xhat[off + i] = xh;
        y[off + i] = g * xh + bt;
      }
    }
    const double unbiased = sq / static_cast<double>(count - 1);
    stats.running_mean[ch] = static_cast<float>((1.0 - stats.momentum) * stats.running_mean[ch] +
                                                stats.momentum * mean);
    stats.running_var[ch] = static_cast<float>((1.0 - stats.momentum) * stats.running_var[ch] +
                                               stats.momentum * unbiased);
  }

  return Var::make(
      std::move(y), {input, gamma, beta}, "batch_norm",
      [xhat = std::move(xhat), inv_std, n, c, hw](Node& self) {
        Node& in = *self.parents[0];
        Node& gm = *self.parents[1];
        Node& bt = *self.parents[2];
        const double count = static_cast<double>(n * hw);
        for (std::size_t ch = 0; ch < c; ++ch) {
          double sum_dy = 0.0;
          double sum_dy_xhat = 0.0;
          for (std::size_t b = 0; b < n; ++b) {
            const std::size_t off = (b * c + ch) * hw;
            for (std::size_t i = 0; i < hw; ++i) {
              sum_dy += self.grad[off + i];
              sum_dy_xhat += static_cast<double>(self.grad[off + i]) * xhat[off + i];
            }
          }
          if (gm.requires_grad) gm.grad_buffer()[ch] += static_cast<float>(sum_dy_xhat);
          if (bt.requires_grad) bt.grad_buffer()[ch] += static_cast<float>(sum_dy);
          if (in.requires_grad) {
            Tensor& ig = in.grad_buffer();
            const double k = gm.value[ch] * inv_std[ch] / count;
            for (std::size_t b = 0; b < n; ++b) {
              const std::size_t off = (b * c + ch) * hw;
              for (std::size_t i = 0; i < hw; ++i) {
                ig[off + i] += static_cast<float>(
                    k * (count * self.grad[off + i] - sum_dy - xhat[off + i] * sum_dy_xhat));
              }
            }
          }
        }
      });
}

Tensor hardtanh_forward(const Tensor& x) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.numel(); ++i) y[i] = std::clamp(x[i], -1.0f, 1.0f);
  return y;
}

Var hardtanh(const Var& input) {
  return Var::make(hardtanh_forward(input.value()), {input}, "hardtanh", [](Node& self) {
    Node& in = *self.parents[0];
    Tensor& ig = in.grad_buffer();
    for (std::size_t i = 0; i < ig.numel(); ++i) {
      const float v = in.value[i];
      if (v > -1.0f && v < 1.0f) ig[i] += self.grad[i];
    }
  });
}

namespace {

struct PoolDims {
  std::size_t n, c, h, w, oh, ow;
};

PoolDims pool_dims(const Tensor& x, std::size_t kernel, std::size_t stride) {
  if (x.rank() != 4) throw ShapeError("max_pool2d expects NCHW, got " + shape_str(x.shape()));
  if (stride == 0) throw ShapeError("max_pool2d stride must be positive");
  return {x.dim(0), x.dim(1), x.dim(2), x.dim(3), conv_out_extent(x.dim(2), kernel, stride, 0),
          conv_out_extent(x.dim(3), kernel, stride, 0)};
}

Tensor max_pool_impl(const Tensor& x, std::size_t kernel, std::size_t stride,
                     std::vector<std::size_t>* argmax) {
  const PoolDims d = pool_dims(x, kernel, stride);
  Tensor y({d.n, d.c, d.oh, d.ow});
  if (argmax) argmax->resize(y.numel());
  std::size_t out_i = 0;
  for (std::size_t plane = 0; plane < d.n * d.c; ++plane) {
    const std::size_t base = plane * d.h * d.w;
    for (std::size_t oy = 0; oy < d.oh; ++oy) {
      for (std::size_t ox = 0; ox < d.ow; ++ox, ++out_i) {
        std::size_t best = base + oy * stride * d.w + ox * stride;
        for (std::size_t ky = 0; ky < kernel; ++ky) {
          for (std::size_t kx = 0; kx < kernel; ++kx) {
            const std::size_t idx = base + (oy * stride + ky) * d.w + ox * stride + kx;
            if (x[idx] > x[best]) best = idx;
          }
        }
        y[out_i] = x[best];
        if (argmax) (*argmax)[out_i] = best;
      }
    }
  }
  return y;
}

}  // namespace

Tensor max_pool2d_forward(const Tensor& input, std::size_t kernel, std::size_t stride) {
  return max_pool_impl(input, kernel, stride, nullptr);
}

Var max_pool2d(const Var& input, std::size_t kernel, std::size_t stride) {
  std::vector<std::size_t> argmax;
  Tensor y = max_pool_impl(input.value(), kernel, stride, &argmax);
  return Var::make(std::move(y), {input}, "max_pool2d",
                   [argmax = std::move(argmax)](Node& self) {
                     Tensor& ig = self.parents[0]->grad_buffer();
                     for (std::size_t i = 0; i < argmax.size(); ++i) ig[argmax[i]] += self.grad[i];
                   });
}

Tensor global_avg_pool_forward(const Tensor& x) {
  if (x.rank() != 4) throw ShapeError("global_avg_pool expects NCHW, got " + shape_str(x.shape()));
  const std::size_t hw = x.dim(2) * x.dim(3);
  Tensor y({x.dim(0), x.dim(1)});
  for (std::size_t p = 0; p < y.numel(); ++p) {
    double s = 0.0;
    for (std::size_t i = 0; i < hw; ++i) s += x[p * hw + i];
    y[p] = static_cast<float>(s / static_cast<double>(hw));
  }
  return y;
}

Var global_avg_pool(const Var& input) {
  const std::size_t hw = input.value().rank() == 4 ? input.value().dim(2) * input.value().dim(3) : 1;
  return Var::make(global_avg_pool_forward(input.value()), {input}, "global_avg_pool",
                   [hw](Node& self) {
                     Tensor& ig = self.parents[0]->grad_buffer();
                     const float inv = 1.0f / static_cast<float>(hw);
                     for (std::size_t p = 0; p < self.grad.numel(); ++p) {
                       for (std::size_t i = 0; i < hw; ++i) ig[p * hw + i] += self.grad[p] * inv;
                     }
                   });
}

Var flatten(const Var& input) {
  const std::size_t n = input.value().dim(0);
  const std::size_t rest = n ? input.value().numel() / n : 0;
  return Var::make(input.value().reshaped({n, rest}), {input}, "flatten", [](Node& self) {
    Tensor& ig = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < ig.numel(); ++i) ig[i] += self.grad[i];
  });
}

Var add(const Var& a, const Var& b) {
  require_same_shape(a.value(), b.value(), "add");
  Tensor y = a.value();
  y.add_(b.value());
  return Var::make(std::move(y), {a, b}, "add", [](Node& self) {
    for (auto& p : self.parents) {
      if (p->requires_grad) p->accumulate(self.grad);
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a.value(), b.value(), "mul");
  Tensor y(a.shape());
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] = a.value()[i] * b.value()[i];
  return Var::make(std::move(y), {a, b}, "mul", [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    // Read both values before writing: a and b may be the same node.
    Tensor ga(self.grad.shape());
    Tensor gb(self.grad.shape());
    for (std::size_t i = 0; i < ga.numel(); ++i) {
      ga[i] = self.grad[i] * pb.value[i];
      gb[i] = self.grad[i] * pa.value[i];
    }
    if (pa.requires_grad) pa.accumulate(ga);
    if (pb.requires_grad) pb.accumulate(gb);
  });
}

Var scale(const Var& x, float factor) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] = x.value()[i] * factor;
  return Var::make(std::move(y), {x}, "scale", [factor](Node& self) {
    Tensor& ig = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < ig.numel(); ++i) ig[i] += self.grad[i] * factor;
  });
}

Var tanh(const Var& x) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] = std::tanh(x.value()[i]);
  return Var::make(std::move(y), {x}, "tanh", [](Node& self) {
    Tensor& ig = self.parents[0]->grad_buffer();
    for (std::size_t i = 0; i < ig.numel(); ++i) {
      const float t = self.value[i];
      ig[i] += self.grad[i] * (1.0f - t * t);
    }
  });
}

Var sum(const Var& x) {
  double s = 0.0;
  for (float v : x.value().data()) s += v;
  return Var::make(Tensor({1}, static_cast<float>(s)), {x}, "sum", [](Node& self) {
    Tensor& ig = self.parents[0]->grad_buffer();
    const float g = self.grad[0];
    for (std::size_t i = 0; i < ig.numel(); ++i) ig[i] += g;
  });
}

Var cross_entropy(const Var& logits, std::span<const int> labels) {
  const Tensor& z = logits.value();
  if (z.rank() != 2) throw ShapeError("cross_entropy expects N x C logits");
  const std::size_t n = z.dim(0);
  const std::size_t c = z.dim(1);
  if (labels.size() != n) {
    throw ShapeError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(n) + " rows");
  }
  Tensor probs(z.shape());
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= c) {
      throw ValueError("label " + std::to_string(label) + " out of range [0, " +
                       std::to_string(c) + ")");
    }
    const float* row = z.ptr() + i * c;
    const float mx = *std::max_element(row, row + c);
    double denom = 0.0;
    for (std::size_t j = 0; j < c; ++j) denom += std::exp(static_cast<double>(row[j] - mx));
    for (std::size_t j = 0; j < c; ++j) {
      probs[i * c + j] = static_cast<float>(std::exp(static_cast<double>(row[j] - mx)) / denom);
    }
    loss += std::log(denom) - static_cast<double>(row[label] - mx);
  }
  loss /= static_cast<double>(n);
  std::vector<int> saved(labels.begin(), labels.end());
  return Var::make(Tensor({1}, static_cast<float>(loss)), {logits}, "cross_entropy",
                   [probs = std::move(probs), saved = std::move(saved), n, c](Node& self) {
                     Tensor& ig = self.parents[0]->grad_buffer();
                     const float g = self.grad[0] / static_cast<float>(n);
                     for (std::size_t i = 0; i < n; ++i) {
                       for (std::size_t j = 0; j < c; ++j) {
                         const float onehot = static_cast<std::size_t>(saved[i]) == j ? 1.0f : 0.0f;
                         ig[i * c + j] += g * (probs[i * c + j] - onehot);
                       }
                     }
                   });
}

}  // namespace binet

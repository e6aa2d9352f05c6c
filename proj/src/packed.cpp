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

#include "binet/packed.hpp"

#include <bit>
#include <cmath>

#include "binet/binio.hpp"
#include "binet/data.hpp"
#include "binet/error.hpp"
#include "binet/kernels/bitops.hpp"

namespace binet::packed {
namespace {

std::uint64_t tail_mask(std::size_t bits) noexcept {
  const std::size_t r = bits % 64;
  return r == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << r) - 1;
}

void require_sign(float v, std::size_t i) {
  if (v != 1.0f && v != -1.0f) {
    throw ValueError("pack: element " + std::to_string(i) + " is " + std::to_string(v) +
                     ", expected -1 or +1");
  }
}

void set_bit(std::uint64_t* row, std::size_t i) noexcept { row[i / 64] |= std::uint64_t{1} << (i % 64); }

}  // namespace

PackedBitTensor PackedBitTensor::pack(const Tensor& signs) {
  PackedBitTensor p;
  p.shape_ = signs.shape();
  p.len_ = signs.numel();
  p.words_.assign(words_for(p.len_), 0);
  for (std::size_t i = 0; i < p.len_; ++i) {
    require_sign(signs[i], i);
    if (signs[i] > 0.0f) set_bit(p.words_.data(), i);
  }
  return p;
}

Tensor PackedBitTensor::unpack() const {
  Tensor t(shape_);
  for (std::size_t i = 0; i < len_; ++i) t[i] = (words_[i / 64] >> (i % 64)) & 1 ? 1.0f : -1.0f;
  return t;
}

std::int64_t xnor_dot(const PackedBitTensor& p, const PackedBitTensor& q) {
  if (p.logical_len() != q.logical_len()) {
    throw ShapeError("xnor_dot: lengths " + std::to_string(p.logical_len()) + " and " +
                     std::to_string(q.logical_len()) + " differ");
  }
  const std::size_t n = p.logical_len();
  if (n == 0) return 0;
  const std::size_t full = n / 64;
  const auto a = p.words();
  const auto b = q.words();
  std::uint64_t diff = kernels::xor_popcount(a.data(), b.data(), full);
  if (n % 64) diff += std::popcount((a[full] ^ b[full]) & tail_mask(n));
  return static_cast<std::int64_t>(n) - 2 * static_cast<std::int64_t>(diff);
}

BitMatrix pack_rows_by_sign(const Tensor& x, std::size_t rows) {
  BitMatrix m;
  m.rows = rows;
  m.cols = rows ? x.numel() / rows : 0;
  if (rows && m.cols * rows != x.numel()) {
    throw ShapeError("cannot view " + shape_str(x.shape()) + " as " + std::to_string(rows) + " rows");
  }
  m.stride = words_for(m.cols);
  m.words.assign(m.rows * m.stride, 0);
  for (std::size_t r = 0; r < rows; ++r) {
    const float* src = x.ptr() + r * m.cols;
    std::uint64_t* dst = m.row(r);
    for (std::size_t c = 0; c < m.cols; ++c) {
      if (src[c] >= 0.0f) set_bit(dst, c);
    }
  }
  return m;
}

BitMatrix pack_rows(const Tensor& signs, std::size_t rows) {
  for (std::size_t i = 0; i < signs.numel(); ++i) require_sign(signs[i], i);
  return pack_rows_by_sign(signs, rows);
}

Tensor unpack_rows(const BitMatrix& m) {
  Tensor t({m.rows, m.cols});
  for (std::size_t r = 0; r < m.rows; ++r) {
    const std::uint64_t* src = m.row(r);
    for (std::size_t c = 0; c < m.cols; ++c) {
      t[r * m.cols + c] = (src[c / 64] >> (c % 64)) & 1 ? 1.0f : -1.0f;
    }
  }
  return t;
}

PackedIm2Row pack_im2row(const Tensor& input, std::size_t kernel, const Conv2dGeometry& geom) {
  if (input.rank() != 4) throw ShapeError("pack_im2row expects NCHW, got " + shape_str(input.shape()));
  const std::size_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  PackedIm2Row out;
  out.batch = n;
  out.out_h = conv_out_extent(h, kernel, geom.stride_h, geom.pad_h);
  out.out_w = conv_out_extent(w, kernel, geom.stride_w, geom.pad_w);
  const std::size_t pixels = out.out_h * out.out_w;
  const std::size_t cols = c * kernel * kernel;
  const std::size_t stride = words_for(cols);
  const bool padded = geom.pad_h || geom.pad_w;

  out.bits.rows = n * pixels;
  out.bits.cols = cols;
  out.bits.stride = stride;
  out.bits.words.assign(out.bits.rows * stride, 0);
  out.valid.assign(pixels, static_cast<std::uint32_t>(cols));
  if (padded) {
    out.mask.rows = pixels;
    out.mask.cols = cols;
    out.mask.stride = stride;
    out.mask.words.assign(pixels * stride, 0);
  }

  for (std::size_t oy = 0; oy < out.out_h; ++oy) {
    for (std::size_t ox = 0; ox < out.out_w; ++ox) {
      const std::size_t p = oy * out.out_w + ox;
      std::uint32_t valid = 0;
      for (std::size_t ky = 0; ky < kernel; ++ky) {
        const auto iy = static_cast<std::ptrdiff_t>(oy * geom.stride_h + ky) -
                        static_cast<std::ptrdiff_t>(geom.pad_h);
        if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
        for (std::size_t kx = 0; kx < kernel; ++kx) {
          const auto ix = static_cast<std::ptrdiff_t>(ox * geom.stride_w + kx) -
                          static_cast<std::ptrdiff_t>(geom.pad_w);
          if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
          const std::size_t off = static_cast<std::size_t>(iy) * w + static_cast<std::size_t>(ix);
          for (std::size_t ch = 0; ch < c; ++ch) {
            const std::size_t bit = (ch * kernel + ky) * kernel + kx;
            if (padded) set_bit(out.mask.row(p), bit);
            ++valid;
            for (std::size_t img = 0; img < n; ++img) {
              if (input[((img * c + ch) * h) * w + off] >= 0.0f) {
                set_bit(out.bits.row(img * pixels + p), bit);
              }
            }
          }
        }
      }
      out.valid[p] = valid;
    }
  }
  return out;
}

BinaryWeights make_binary_weights(const Tensor& signs, int shift, const Conv2dGeometry& geom,
                                  bool linear) {
  BinaryWeights w;
  w.linear = linear;
  w.shift = shift;
  w.geometry = linear ? Conv2dGeometry{} : geom;
  if (linear) {
    if (signs.rank() != 2) throw ShapeError("binary linear weights must be O x I");
    w.out_channels = signs.dim(0);
    w.in_channels = signs.dim(1);
    w.kernel = 1;
  } else {
    if (signs.rank() != 4 || signs.dim(2) != signs.dim(3)) {
      throw ShapeError("binary conv weights must be O x I x K x K, got " + shape_str(signs.shape()));
    }
    w.out_channels = signs.dim(0);
    w.in_channels = signs.dim(1);
    w.kernel = signs.dim(2);
  }
  w.bits = pack_rows(signs, w.out_channels);
  return w;
}

IntTensor packed_conv2d_int(const PackedIm2Row& input, const BinaryWeights& w) {
  if (input.bits.cols != w.bits.cols) {
    throw ShapeError("packed conv: input rows hold " + std::to_string(input.bits.cols) +
                     " bits, weight rows " + std::to_string(w.bits.cols));
  }
  const std::size_t pixels = input.out_h * input.out_w;
  const std::size_t oc = w.out_channels;
  const std::size_t words = w.bits.stride;
  const bool masked = !input.mask.words.empty();
  IntTensor out;
  out.shape = {input.batch, oc, input.out_h, input.out_w};
  out.values.resize(input.batch * oc * pixels);
  for (std::size_t img = 0; img < input.batch; ++img) {
    for (std::size_t p = 0; p < pixels; ++p) {
      const std::uint64_t* a = input.bits.row(img * pixels + p);
      const auto valid = static_cast<std::int64_t>(input.valid[p]);
      std::int64_t* dst = out.values.data() + img * oc * pixels + p;
      if (masked) {
        const std::uint64_t* m = input.mask.row(p);
        for (std::size_t o = 0; o < oc; ++o) {
          const auto diff = kernels::xor_popcount_masked(a, w.bits.row(o), m, words);
          dst[o * pixels] = valid - 2 * static_cast<std::int64_t>(diff);
        }
      } else {
        for (std::size_t o = 0; o < oc; ++o) {
          const auto diff = kernels::xor_popcount(a, w.bits.row(o), words);
          dst[o * pixels] = valid - 2 * static_cast<std::int64_t>(diff);
        }
      }
    }
  }
  return out;
}

Tensor shift_scale(const IntTensor& acc, int shift) {
  Tensor out(acc.shape);
  if (shift >= 0) {
    const std::int64_t mul = std::int64_t{1} << shift;
    for (std::size_t i = 0; i < acc.values.size(); ++i) {
      out[i] = static_cast<float>(acc.values[i] * mul);
    }
  } else {
    for (std::size_t i = 0; i < acc.values.size(); ++i) {
      out[i] = std::ldexp(static_cast<float>(acc.values[i]), shift);
    }
  }
  return out;
}

Tensor packed_conv2d(const Tensor& input, const BinaryWeights& w) {
  if (w.linear) throw ShapeError("packed_conv2d called with linear weights");
  if (input.rank() != 4 || input.dim(1) != w.in_channels) {
    throw ShapeError("packed conv expects N x " + std::to_string(w.in_channels) +
                     " x H x W input, got " + shape_str(input.shape()));
  }
  return shift_scale(packed_conv2d_int(pack_im2row(input, w.kernel, w.geometry), w), w.shift);
}

namespace {

IntTensor packed_linear_int(const Tensor& input, const BinaryWeights& w) {
  const std::size_t n = input.rank() ? input.dim(0) : 0;
  if (!w.linear || n == 0 || input.numel() != n * w.in_channels) {
    throw ShapeError("packed linear expects N x " + std::to_string(w.in_channels) +
                     " input, got " + shape_str(input.shape()));
  }
  const BitMatrix a = pack_rows_by_sign(input, n);
  IntTensor out;
  out.shape = {n, w.out_channels};
  out.values.resize(n * w.out_channels);
  const auto len = static_cast<std::int64_t>(w.in_channels);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t o = 0; o < w.out_channels; ++o) {
      const auto diff = kernels::xor_popcount(a.row(i), w.bits.row(o), w.bits.stride);
      out.values[i * w.out_channels + o] = len - 2 * static_cast<std::int64_t>(diff);
    }
  }
  return out;
}

}  // namespace

Tensor packed_linear(const Tensor& input, const BinaryWeights& w) {
  return shift_scale(packed_linear_int(input, w), w.shift);
}

Tensor naive_conv2d(const Tensor& input, const Tensor& weight, const Conv2dGeometry& geom) {
  if (input.rank() != 4 || weight.rank() != 4 || input.dim(1) != weight.dim(1)) {
    throw ShapeError("naive_conv2d: incompatible " + shape_str(input.shape()) + " and " +
                     shape_str(weight.shape()));
  }
  const std::size_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  const std::size_t o = weight.dim(0), kh = weight.dim(2), kw = weight.dim(3);
  const std::size_t oh = conv_out_extent(h, kh, geom.stride_h, geom.pad_h);
  const std::size_t ow = conv_out_extent(w, kw, geom.stride_w, geom.pad_w);
  Tensor out({n, o, oh, ow});
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t oc = 0; oc < o; ++oc) {
      for (std::size_t y = 0; y < oh; ++y) {
        for (std::size_t x = 0; x < ow; ++x) {
          float acc = 0.0f;
          for (std::size_t ic = 0; ic < c; ++ic) {
            for (std::size_t ky = 0; ky < kh; ++ky) {
              const auto iy = static_cast<std::ptrdiff_t>(y * geom.stride_h + ky) -
                              static_cast<std::ptrdiff_t>(geom.pad_h);
              if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
              for (std::size_t kx = 0; kx < kw; ++kx) {
                const auto ix = static_cast<std::ptrdiff_t>(x * geom.stride_w + kx) -
                                static_cast<std::ptrdiff_t>(geom.pad_w);
                if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
                acc += input[((b * c + ic) * h + static_cast<std::size_t>(iy)) * w +
                             static_cast<std::size_t>(ix)] *
                       weight[((oc * c + ic) * kh + ky) * kw + kx];
              }
            }
          }
          out[((b * o + oc) * oh + y) * ow + x] = acc;
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Executor

namespace {

// Activations flowing between ops. For a negative shift the integer result
// of a binarized layer is carried unscaled and 2^s is applied later, folded
// into the next batch-norm scale when there is one.
struct Flow {
  Tensor x;
  int pending = 0;
};

void settle(Flow& f) {
  if (f.pending == 0) return;
  for (float& v : f.x.data()) v = std::ldexp(v, f.pending);
  f.pending = 0;
}

Tensor dense_weights(const BinaryWeights& w) {
  Tensor t = unpack_rows(w.bits);
  const float s = std::ldexp(1.0f, w.shift);
  for (float& v : t.data()) v *= s;
  if (w.linear) return t.reshaped({w.out_channels, w.in_channels});
  return t.reshaped({w.out_channels, w.in_channels, w.kernel, w.kernel});
}

Tensor run_ops(const std::vector<PackedOp>& ops, Tensor input);

void apply(const PackedOp& op, Flow& f) {
  switch (op.kind) {
    case OpKind::fp_conv:
      settle(f);
      f.x = conv2d_forward(f.x, op.weight, op.geometry);
      break;
    case OpKind::fp_linear:
      settle(f);
      f.x = linear_forward(f.x, op.weight);
      break;
    case OpKind::bin_conv:
    case OpKind::bin_linear: {
      settle(f);
      const BinaryWeights& w = op.binary;
      if (!op.binarize_activations) {
        // 1-bit weights with real activations: no dedicated kernel.
        f.x = w.linear ? linear_forward(f.x, dense_weights(w))
                       : conv2d_forward(f.x, dense_weights(w), w.geometry);
        break;
      }
      if (w.linear) {
        f.x = shift_scale(packed_linear_int(f.x, w), std::max(w.shift, 0));
      } else {
        if (f.x.rank() != 4 || f.x.dim(1) != w.in_channels) {
          throw ShapeError("packed conv expects " + std::to_string(w.in_channels) +
                           " channels, got " + shape_str(f.x.shape()));
        }
        f.x = shift_scale(packed_conv2d_int(pack_im2row(f.x, w.kernel, w.geometry), w),
                          std::max(w.shift, 0));
      }
      f.pending = std::min(w.shift, 0);
      break;
    }
    case OpKind::affine: {
      std::vector<float> scale(op.scale.data().begin(), op.scale.data().end());
      if (f.pending) {
        for (float& s : scale) s = std::ldexp(s, f.pending);
        f.pending = 0;
      }
      f.x = channel_affine(f.x, scale, op.shift.data());
      break;
    }
    case OpKind::hardtanh:
      settle(f);
      f.x = hardtanh_forward(f.x);
      break;
    case OpKind::max_pool:
      // Max commutes with a positive power-of-two scale.
      f.x = max_pool2d_forward(f.x, op.kernel, op.stride);
      break;
    case OpKind::avg_pool:
      settle(f);
      f.x = global_avg_pool_forward(f.x);
      break;
    case OpKind::flatten: {
      const std::size_t n = f.x.dim(0);
      f.x = f.x.reshaped({n, n ? f.x.numel() / n : 0});
      break;
    }
    case OpKind::residual: {
      settle(f);
      Tensor main = run_ops(op.main, f.x);
      Tensor skip = op.shortcut.empty() ? f.x : run_ops(op.shortcut, f.x);
      require_same_shape(main, skip, "residual add");
      main.add_(skip);
      f.x = hardtanh_forward(main);
      break;
    }
  }
}

Tensor run_ops(const std::vector<PackedOp>& ops, Tensor input) {
  Flow f{std::move(input), 0};
  for (const PackedOp& op : ops) apply(op, f);
  settle(f);
  return std::move(f.x);
}

}  // namespace

PackedModel::PackedModel(std::string name, Shape input, std::size_t classes,
                         std::vector<PackedOp> ops)
    : name_(std::move(name)), input_(std::move(input)), classes_(classes), ops_(std::move(ops)) {}

Tensor PackedModel::run(const Tensor& x) const {
  if (x.rank() != input_.size() + 1 ||
      !std::equal(input_.begin(), input_.end(), x.shape().begin() + 1)) {
    throw ShapeError("packed model '" + name_ + "' expects N x " + shape_str(input_) +
                     " input, got " + shape_str(x.shape()));
  }
  return run_ops(ops_, x);
}

namespace {

void accumulate_size(const std::vector<PackedOp>& ops, SizeReport& r) {
  for (const PackedOp& op : ops) {
    switch (op.kind) {
      case OpKind::fp_conv:
      case OpKind::fp_linear: r.float_weights += op.weight.numel(); break;
      case OpKind::bin_conv:
      case OpKind::bin_linear: r.binary_weights += op.binary.bits.rows * op.binary.bits.cols; break;
      case OpKind::affine: r.bn_parameters += op.scale.numel() + op.shift.numel(); break;
      case OpKind::residual:
        accumulate_size(op.main, r);
        accumulate_size(op.shortcut, r);
        break;
      default: break;
    }
  }
}

// Walks the graph with a per-sample (C, H, W) or (F) shape.
Shape count_ops_in(const std::vector<PackedOp>& ops, Shape shape, ScalingStyle style, OpCounts& c) {
  for (const PackedOp& op : ops) {
    switch (op.kind) {
      case OpKind::fp_conv:
      case OpKind::bin_conv: {
        const std::size_t k = op.kind == OpKind::fp_conv ? op.weight.dim(2) : op.binary.kernel;
        const Conv2dGeometry g = op.kind == OpKind::fp_conv ? op.geometry : op.binary.geometry;
        const std::size_t oc = op.kind == OpKind::fp_conv ? op.weight.dim(0) : op.binary.out_channels;
        const std::size_t oh = conv_out_extent(shape.at(1), k, g.stride_h, g.pad_h);
        const std::size_t ow = conv_out_extent(shape.at(2), k, g.stride_w, g.pad_w);
        if (op.kind == OpKind::bin_conv) {
          const std::uint64_t c1 = oc * oh * ow;
          const std::uint64_t c2 = op.binary.in_channels * k * k;
          c.bitwise_ops += c1 * c2 + c1;
          if (style == ScalingStyle::xnor) c.float_ops += c1;
        }
        shape = {oc, oh, ow};
        break;
      }
      case OpKind::fp_linear: shape = {op.weight.dim(0)}; break;
      case OpKind::bin_linear: {
        const std::uint64_t c1 = op.binary.out_channels;
        c.bitwise_ops += c1 * op.binary.in_channels + c1;
        if (style == ScalingStyle::xnor) c.float_ops += c1;
        shape = {op.binary.out_channels};
        break;
      }
      case OpKind::max_pool:
        shape = {shape.at(0), conv_out_extent(shape.at(1), op.kernel, op.stride, 0),
                 conv_out_extent(shape.at(2), op.kernel, op.stride, 0)};
        break;
      case OpKind::avg_pool: shape = {shape.at(0)}; break;
      case OpKind::flatten: shape = {shape_numel(shape)}; break;
      case OpKind::residual: {
        const Shape out = count_ops_in(op.main, shape, style, c);
        count_ops_in(op.shortcut, shape, style, c);
        shape = out;
        break;
      }
      default: break;
    }
  }
  return shape;
}

}  // namespace

SizeReport PackedModel::size_report() const {
  SizeReport r;
  accumulate_size(ops_, r);
  return r;
}

OpCounts PackedModel::count_ops(ScalingStyle style) const {
  OpCounts c;
  count_ops_in(ops_, input_, style, c);
  return c;
}

// ---------------------------------------------------------------------------
// Export

namespace {

PackedOp affine_of(BatchNorm& bn) {
  PackedOp op;
  op.kind = OpKind::affine;
  auto [scale, shift] = batch_norm_fold(bn.gamma().value(), bn.beta().value(), bn.stats());
  op.scale = std::move(scale);
  op.shift = std::move(shift);
  return op;
}

PackedOp export_module(Module& m, const BinarizeOptions& opt) {
  PackedOp op;
  if (auto* b = dynamic_cast<BinaryLayer*>(&m)) {
    const imb::QuantizedWeights q = b->quantize(opt.binarizer);
    op.kind = b->is_linear() ? OpKind::bin_linear : OpKind::bin_conv;
    op.binary = make_binary_weights(q.signs, q.shift, b->geometry(), b->is_linear());
    op.binarize_activations = opt.binarize_activations;
  } else if (auto* conv = dynamic_cast<Conv2d*>(&m)) {
    op.kind = OpKind::fp_conv;
    op.weight = conv->weight().value();
    op.geometry = conv->geometry();
  } else if (auto* lin = dynamic_cast<Linear*>(&m)) {
    op.kind = OpKind::fp_linear;
    op.weight = lin->weight().value();
  } else if (auto* bn = dynamic_cast<BatchNorm*>(&m)) {
    op = affine_of(*bn);
  } else if (dynamic_cast<Hardtanh*>(&m)) {
    op.kind = OpKind::hardtanh;
  } else if (auto* pool = dynamic_cast<MaxPool*>(&m)) {
    op.kind = OpKind::max_pool;
    op.kernel = pool->kernel();
    op.stride = pool->stride();
  } else if (dynamic_cast<GlobalAvgPool*>(&m)) {
    op.kind = OpKind::avg_pool;
  } else if (dynamic_cast<Flatten*>(&m)) {
    op.kind = OpKind::flatten;
  } else if (auto* res = dynamic_cast<ResidualUnit*>(&m)) {
    op.kind = OpKind::residual;
    op.main.push_back(export_module(res->conv(), opt));
    op.main.push_back(affine_of(res->bn()));
    if (res->shortcut_conv()) {
      op.shortcut.push_back(export_module(*res->shortcut_conv(), opt));
      op.shortcut.push_back(affine_of(*res->shortcut_bn()));
    }
  } else {
    throw ValueError("export: unsupported module type");
  }
  return op;
}

}  // namespace

PackedModel export_model(const Model& model) {
  // Export only reads; the module accessors are non-const.
  Model& m = const_cast<Model&>(model);
  std::vector<PackedOp> ops;
  for (std::size_t i = 0; i < m.size(); ++i) ops.push_back(export_module(m.module(i), model.binarize_options()));
  return PackedModel(model.spec().name, model.spec().input, model.spec().classes, std::move(ops));
}

// ---------------------------------------------------------------------------
// File format

namespace {

constexpr std::array<char, 4> kMagic = {'B', 'N', 'E', 'T'};
constexpr std::uint16_t kTagMeta = 1;
constexpr std::uint16_t kTagOp = 2;

void write_geometry(binio::Writer& w, const Conv2dGeometry& g) {
  w.u64(g.stride_h);
  w.u64(g.stride_w);
  w.u64(g.pad_h);
  w.u64(g.pad_w);
}

Conv2dGeometry read_geometry(binio::Reader& r) {
  Conv2dGeometry g;
  g.stride_h = r.u64();
  g.stride_w = r.u64();
  g.pad_h = r.u64();
  g.pad_w = r.u64();
  if (g.stride_h == 0 || g.stride_w == 0) throw FormatError("zero stride in packed model");
  return g;
}

void write_op(binio::Writer& w, const PackedOp& op) {
  w.u16(static_cast<std::uint16_t>(op.kind));
  switch (op.kind) {
    case OpKind::fp_conv:
      write_geometry(w, op.geometry);
      w.tensor(op.weight);
      break;
    case OpKind::fp_linear: w.tensor(op.weight); break;
    case OpKind::bin_conv:
    case OpKind::bin_linear: {
      const BinaryWeights& b = op.binary;
      w.u64(b.in_channels);
      w.u64(b.out_channels);
      w.u64(b.kernel);
      write_geometry(w, b.geometry);
      w.i32(b.shift);
      w.u8(op.binarize_activations ? 1 : 0);
      w.u64(b.bits.cols);
      w.u64s(b.bits.words);
      break;
    }
    case OpKind::affine:
      w.tensor(op.scale);
      w.tensor(op.shift);
      break;
    case OpKind::max_pool:
      w.u64(op.kernel);
      w.u64(op.stride);
      break;
    case OpKind::residual:
      w.u32(static_cast<std::uint32_t>(op.main.size()));
      for (const PackedOp& o : op.main) write_op(w, o);
      w.u32(static_cast<std::uint32_t>(op.shortcut.size()));
      for (const PackedOp& o : op.shortcut) write_op(w, o);
      break;
    default: break;
  }
}

PackedOp read_op(binio::Reader& r, int depth) {
  if (depth > 4) throw FormatError("packed model nests too deeply");
  PackedOp op;
  const std::uint16_t kind = r.u16();
  if (kind < 1 || kind > static_cast<std::uint16_t>(OpKind::residual)) {
    throw FormatError("unknown packed op kind " + std::to_string(kind));
  }
  op.kind = static_cast<OpKind>(kind);
  switch (op.kind) {
    case OpKind::fp_conv:
      op.geometry = read_geometry(r);
      op.weight = r.tensor();
      if (op.weight.rank() != 4) throw FormatError("conv weight must be 4-D");
      break;
    case OpKind::fp_linear:
      op.weight = r.tensor();
      if (op.weight.rank() != 2) throw FormatError("linear weight must be 2-D");
      break;
    case OpKind::bin_conv:
    case OpKind::bin_linear: {
      BinaryWeights& b = op.binary;
      b.linear = op.kind == OpKind::bin_linear;
      b.in_channels = r.u64();
      b.out_channels = r.u64();
      b.kernel = r.u64();
      b.geometry = read_geometry(r);
      b.shift = r.i32();
      op.binarize_activations = r.u8() != 0;
      b.bits.rows = b.out_channels;
      b.bits.cols = r.u64();
      b.bits.stride = words_for(b.bits.cols);
      b.bits.words = r.u64s();
      if (b.bits.cols != b.in_channels * b.kernel * b.kernel ||
          b.bits.words.size() != b.bits.rows * b.bits.stride) {
        throw FormatError("binary layer record has inconsistent sizes");
      }
      if (b.shift < -60 || b.shift > 60) throw FormatError("shift out of range");
      break;
    }
    case OpKind::affine:
      op.scale = r.tensor();
      op.shift = r.tensor();
      if (op.scale.shape() != op.shift.shape()) throw FormatError("affine scale/shift mismatch");
      break;
    case OpKind::max_pool:
      op.kernel = r.u64();
      op.stride = r.u64();
      if (op.kernel == 0 || op.stride == 0) throw FormatError("bad pooling record");
      break;
    case OpKind::residual: {
      const std::uint32_t nm = r.u32();
      for (std::uint32_t i = 0; i < nm; ++i) op.main.push_back(read_op(r, depth + 1));
      const std::uint32_t ns = r.u32();
      for (std::uint32_t i = 0; i < ns; ++i) op.shortcut.push_back(read_op(r, depth + 1));
      break;
    }
    default: break;
  }
  return op;
}

}  // namespace

std::vector<std::uint8_t> encode_packed(const PackedModel& m) {
  std::vector<binio::Record> recs;
  binio::Writer w;
  w.str(m.name());
  w.u32(static_cast<std::uint32_t>(m.input_shape().size()));
  for (std::size_t d : m.input_shape()) w.u64(d);
  w.u64(m.classes());
  recs.push_back({kTagMeta, w.take()});
  for (const PackedOp& op : m.ops()) {
    write_op(w, op);
    recs.push_back({kTagOp, w.take()});
  }
  return binio::encode_container(kMagic, kPackedVersion, recs);
}

PackedModel decode_packed(std::span<const std::uint8_t> bytes) {
  std::string name;
  Shape input;
  std::size_t classes = 0;
  bool have_meta = false;
  std::vector<PackedOp> ops;
  for (const binio::Record& rec : binio::decode_container(bytes, kMagic, kPackedVersion)) {
    binio::Reader r(rec.value);
    if (rec.tag == kTagMeta) {
      name = r.str();
      const std::uint32_t rank = r.u32();
      if (rank > 8) throw FormatError("input rank out of range");
      input.resize(rank);
      for (auto& d : input) d = r.u64();
      classes = r.u64();
      have_meta = true;
    } else if (rec.tag == kTagOp) {
      ops.push_back(read_op(r, 0));
    } else {
      throw FormatError("unknown packed record tag " + std::to_string(rec.tag));
    }
    if (!r.done()) throw FormatError("packed record has trailing bytes");
  }
  if (!have_meta) throw FormatError("packed model has no header record");
  return PackedModel(std::move(name), std::move(input), classes, std::move(ops));
}

void save_packed(const std::filesystem::path& path, const PackedModel& m) {
  binio::write_file_atomic(path, encode_packed(m));
}

PackedModel load_packed(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = data::read_file(path);
  return decode_packed(bytes);
}

}  // namespace binet::packed

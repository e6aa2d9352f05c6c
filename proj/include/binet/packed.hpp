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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "binet/model.hpp"
#include "binet/ops.hpp"
#include "binet/tensor.hpp"

namespace binet::packed {

/// A {-1,+1} tensor stored one bit per element, LSB first, bit 1 = +1.
/// Bits past logical_len in the last word are kept zero by pack().
class PackedBitTensor {
 public:
  PackedBitTensor() = default;

  /// Throws ValueError unless every element is exactly -1 or +1.
  static PackedBitTensor pack(const Tensor& signs);
  Tensor unpack() const;

  const Shape& shape() const noexcept { return shape_; }
  std::size_t logical_len() const noexcept { return len_; }
  std::span<const std::uint64_t> words() const noexcept { return words_; }
  /// Raw access, e.g. for tests that scribble on the tail bits.
  std::span<std::uint64_t> mutable_words() noexcept { return words_; }

  friend bool operator==(const PackedBitTensor&, const PackedBitTensor&) = default;

 private:
  Shape shape_;
  std::size_t len_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Sum of p_i * q_i over the logical range. Tail bits are masked off, so
/// their contents never matter. Throws ShapeError on a length mismatch.
std::int64_t xnor_dot(const PackedBitTensor& p, const PackedBitTensor& q);

inline std::size_t words_for(std::size_t bits) noexcept { return (bits + 63) / 64; }

/// Row-major bit matrix; each row starts on a word boundary.
struct BitMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t stride = 0;  ///< words per row
  std::vector<std::uint64_t> words;

  const std::uint64_t* row(std::size_t r) const noexcept { return words.data() + r * stride; }
  std::uint64_t* row(std::size_t r) noexcept { return words.data() + r * stride; }
  friend bool operator==(const BitMatrix&, const BitMatrix&) = default;
};

/// Packs a tensor viewed as rows x (numel / rows) by the sign of each
/// element (x >= 0 -> 1).
BitMatrix pack_rows_by_sign(const Tensor& x, std::size_t rows);
/// As above but rejects anything that is not -1 or +1.
BitMatrix pack_rows(const Tensor& signs, std::size_t rows);
Tensor unpack_rows(const BitMatrix& m);

/// Binarized input lowered for convolution: one row per (image, output
/// pixel) holding the receptive field in channel-major order (c, kh, kw),
/// which matches an OIHW weight row. Positions that fall in the zero
/// padding are cleared in a per-pixel mask and excluded from the dot.
struct PackedIm2Row {
  std::size_t batch = 0;
  std::size_t out_h = 0;
  std::size_t out_w = 0;
  BitMatrix bits;                     ///< batch * out_h * out_w rows
  BitMatrix mask;                     ///< out_h * out_w rows, empty when no padding
  std::vector<std::uint32_t> valid;   ///< in-bounds taps per output pixel
};

/// Signs of an N x C x H x W input (x >= 0 -> +1), lowered for a kernel x
/// kernel convolution.
PackedIm2Row pack_im2row(const Tensor& input, std::size_t kernel, const Conv2dGeometry& geom);

/// Integer-valued N x O x OH x OW result of a packed convolution.
struct IntTensor {
  Shape shape;
  std::vector<std::int64_t> values;
};

/// Weights of one binarized conv or linear layer.
struct BinaryWeights {
  std::size_t in_channels = 0;   ///< input features for linear layers
  std::size_t out_channels = 0;
  std::size_t kernel = 1;
  Conv2dGeometry geometry{};
  bool linear = false;
  BitMatrix bits;  ///< out_channels rows of in_channels * kernel^2 bits
  int shift = 0;

  friend bool operator==(const BinaryWeights&, const BinaryWeights&) = default;
};

/// Builds packed weights from a {-1,+1} OIHW (or O x I) tensor.
BinaryWeights make_binary_weights(const Tensor& signs, int shift, const Conv2dGeometry& geom,
                                  bool linear);

/// Dot products of every lowered row against every weight row.
/// Throws ShapeError when the row widths disagree.
IntTensor packed_conv2d_int(const PackedIm2Row& input, const BinaryWeights& w);

/// value * 2^s: an integer left shift for s >= 0, exact power-of-two
/// scaling for s < 0.
Tensor shift_scale(const IntTensor& acc, int shift);

/// sign(input) convolved with the packed weights, then scaled by 2^s.
/// Throws ShapeError when the input channels differ from the layer's.
Tensor packed_conv2d(const Tensor& input, const BinaryWeights& w);
/// N x I input against O x I packed weights.
Tensor packed_linear(const Tensor& input, const BinaryWeights& w);

/// Straightforward float convolution, used as the oracle and as the
/// benchmark baseline.
Tensor naive_conv2d(const Tensor& input, const Tensor& weight, const Conv2dGeometry& geom);

// ---------------------------------------------------------------------------
// Deployment model

enum class OpKind : std::uint16_t {
  fp_conv = 1,
  fp_linear = 2,
  bin_conv = 3,
  bin_linear = 4,
  affine = 5,  ///< folded batch norm
  hardtanh = 6,
  max_pool = 7,
  avg_pool = 8,
  flatten = 9,
  residual = 10,
};

struct PackedOp {
  OpKind kind = OpKind::hardtanh;
  // fp_conv / fp_linear
  Tensor weight;
  Conv2dGeometry geometry{};
  // bin_conv / bin_linear
  BinaryWeights binary{};
  bool binarize_activations = true;
  // affine
  Tensor scale;
  Tensor shift;
  // max_pool
  std::size_t kernel = 0;
  std::size_t stride = 0;
  // residual: hardtanh(main(x) + shortcut(x)); an empty shortcut is identity
  std::vector<PackedOp> main;
  std::vector<PackedOp> shortcut;

  friend bool operator==(const PackedOp&, const PackedOp&) = default;
};

inline constexpr std::uint16_t kPackedVersion = 1;

struct SizeReport {
  std::uint64_t binary_weights = 0;   ///< counted at 1 bit each
  std::uint64_t float_weights = 0;    ///< full-precision layers, 32 bits each
  std::uint64_t bn_parameters = 0;    ///< folded scale + shift, 32 bits each
  std::uint64_t bits() const noexcept {
    return binary_weights + 32 * (float_weights + bn_parameters);
  }
  double megabits() const noexcept { return static_cast<double>(bits()) / 1e6; }
};

struct OpCounts {
  std::uint64_t float_ops = 0;    ///< extra 32-bit multiplies in binarized layers
  std::uint64_t bitwise_ops = 0;
};

/// Scaling style assumed for operation accounting.
enum class ScalingStyle {
  imb,   ///< power-of-two shift: no float work in the binarized layer
  xnor,  ///< one float scale per output element
};

/// Immutable inference graph: binarized layers as bit matrices with integer
/// shifts, full-precision first/last layers, batch norm folded to affines.
class PackedModel {
 public:
  PackedModel() = default;
  PackedModel(std::string name, Shape input, std::size_t classes, std::vector<PackedOp> ops);

  /// Eval-mode logits. Bit-identical to Model::logits of the exported model.
  Tensor run(const Tensor& x) const;

  const std::string& name() const noexcept { return name_; }
  const Shape& input_shape() const noexcept { return input_; }
  std::size_t classes() const noexcept { return classes_; }
  const std::vector<PackedOp>& ops() const noexcept { return ops_; }

  SizeReport size_report() const;
  OpCounts count_ops(ScalingStyle style = ScalingStyle::imb) const;

  friend bool operator==(const PackedModel&, const PackedModel&) = default;

 private:
  std::string name_;
  Shape input_;
  std::size_t classes_ = 0;
  std::vector<PackedOp> ops_;
};

PackedModel export_model(const Model& model);

std::vector<std::uint8_t> encode_packed(const PackedModel& m);
/// Throws FormatError, VersionError, TruncatedError or ChecksumError.
PackedModel decode_packed(std::span<const std::uint8_t> bytes);
void save_packed(const std::filesystem::path& path, const PackedModel& m);
PackedModel load_packed(const std::filesystem::path& path);

}  // namespace binet::packed

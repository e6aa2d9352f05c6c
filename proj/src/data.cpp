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

#include "binet/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "binet/error.hpp"

namespace binet::data {
namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  if (offset + 4 > bytes.size()) throw TruncatedError("IDX header truncated");
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void normalize(Tensor& images, std::span<const float> mean, std::span<const float> stddev) {
  const std::size_t c = images.dim(1);
  const std::size_t hw = images.dim(2) * images.dim(3);
  for (std::size_t n = 0; n < images.dim(0); ++n) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      float* p = images.ptr() + (n * c + ch) * hw;
      for (std::size_t i = 0; i < hw; ++i) p[i] = (p[i] - mean[ch]) / stddev[ch];
    }
  }
}

}  // namespace

Shape DatasetSplit::sample_shape() const {
  const Shape& s = images.shape();
  if (s.size() != 4) return {};
  return {s[1], s[2], s[3]};
}

void DatasetSplit::validate() const {
  if (images.rank() != 4) throw DataError("images must be N x C x H x W");
  if (images.dim(0) != labels.size()) {
    throw DataError(std::to_string(images.dim(0)) + " images but " +
                    std::to_string(labels.size()) + " labels");
  }
  for (int l : labels) {
    if (l < 0 || static_cast<std::size_t>(l) >= classes) {
      throw DataError("label " + std::to_string(l) + " out of range [0, " +
                      std::to_string(classes) + ")");
    }
  }
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Tensor parse_idx_images(std::span<const std::uint8_t> bytes) {
  const std::uint32_t magic = read_be32(bytes, 0);
  if (magic != 2051) throw FormatError("IDX image magic " + std::to_string(magic) + " != 2051");
  const std::size_t n = read_be32(bytes, 4);
  const std::size_t rows = read_be32(bytes, 8);
  const std::size_t cols = read_be32(bytes, 12);
  const std::size_t expected = 16 + n * rows * cols;
  if (bytes.size() < expected) {
    throw TruncatedError("IDX image file holds " + std::to_string(bytes.size()) +
                         " bytes, header promises " + std::to_string(expected));
  }
  Tensor images({n, 1, rows, cols});
  for (std::size_t i = 0; i < n * rows * cols; ++i) {
    images[i] = static_cast<float>(bytes[16 + i]) / 255.0f;
  }
  return images;
}

std::vector<int> parse_idx_labels(std::span<const std::uint8_t> bytes) {
  const std::uint32_t magic = read_be32(bytes, 0);
  if (magic != 2049) throw FormatError("IDX label magic " + std::to_string(magic) + " != 2049");
  const std::size_t n = read_be32(bytes, 4);
  if (bytes.size() < 8 + n) {
    throw TruncatedError("IDX label file holds " + std::to_string(bytes.size()) +
                         " bytes, header promises " + std::to_string(8 + n));
  }
  return {bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(n)};
}

Dataset load_mnist(const std::filesystem::path& dir) {
  auto split = [&](const char* images, const char* labels) {
    DatasetSplit s;
    s.images = parse_idx_images(read_file(dir / images));
    s.labels = parse_idx_labels(read_file(dir / labels));
    s.classes = 10;
    s.validate();
    const float mean[] = {kMnistMean};
    const float stddev[] = {kMnistStd};
    normalize(s.images, mean, stddev);
    return s;
  };
  return {"mnist", split("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
          split("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte")};
}

DatasetSplit parse_cifar10(std::span<const std::uint8_t> bytes) {
  constexpr std::size_t kRecord = 3073;
  if (bytes.size() % kRecord != 0) {
    throw TruncatedError("CIFAR-10 batch of " + std::to_string(bytes.size()) +
                         " bytes is not a whole number of 3073-byte records");
  }
  const std::size_t n = bytes.size() / kRecord;
  DatasetSplit s;
  s.classes = 10;
  s.images = Tensor({n, 3, 32, 32});
  s.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* rec = bytes.data() + i * kRecord;
    s.labels[i] = rec[0];
    for (std::size_t j = 0; j < 3072; ++j) {
      s.images[i * 3072 + j] = static_cast<float>(rec[1 + j]) / 255.0f;
    }
  }
  s.validate();
  normalize(s.images, kCifarMean, kCifarStd);
  return s;
}

namespace {

DatasetSplit concat(std::vector<DatasetSplit> parts) {
  DatasetSplit out;
  out.classes = 10;
  std::size_t n = 0;
  for (const auto& p : parts) n += p.size();
  out.images = Tensor({n, 3, 32, 32});
  std::size_t offset = 0;
  for (const auto& p : parts) {
    std::copy(p.images.data().begin(), p.images.data().end(), out.images.ptr() + offset);
    offset += p.images.numel();
    out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
  }
  return out;
}

}  // namespace

Dataset load_cifar10(const std::filesystem::path& dir) {
  std::vector<DatasetSplit> train;
  for (int b = 1; b <= 5; ++b) {
    train.push_back(parse_cifar10(read_file(dir / ("data_batch_" + std::to_string(b) + ".bin"))));
  }
  return {"cifar10", concat(std::move(train)), parse_cifar10(read_file(dir / "test_batch.bin"))};
}

Dataset synth_dataset(const std::string& kind, std::uint64_t seed, std::size_t train_size,
                      std::size_t test_size) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> noise(0.0f, 1.0f);
  if (kind == "two-gaussians") {
    if (train_size == 0) train_size = 512;
    if (test_size == 0) test_size = 256;
    // Centers at (+-2, +-2); the margin between them is wide enough that the
    // classes are linearly separable with overwhelming probability.
    auto make = [&](std::size_t n) {
      DatasetSplit s;
      s.classes = 2;
      s.images = Tensor({n, 2, 1, 1});
      s.labels.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % 2);
        const float center = label ? 2.0f : -2.0f;
        s.labels[i] = label;
        s.images[2 * i] = center + 0.5f * noise(rng);
        s.images[2 * i + 1] = center + 0.5f * noise(rng);
      }
      return s;
    };
    DatasetSplit train = make(train_size);
    DatasetSplit test = make(test_size);
    return {kind, std::move(train), std::move(test)};
  }
  if (kind == "patterns") {
    if (train_size == 0) train_size = 1000;
    if (test_size == 0) test_size = 500;
    constexpr std::size_t kSide = 12;
    std::vector<Tensor> templates;
    for (int c = 0; c < 10; ++c) templates.push_back(Tensor::randn({kSide * kSide}, rng));
    auto make = [&](std::size_t n) {
      DatasetSplit s;
      s.classes = 10;
      s.images = Tensor({n, 1, kSide, kSide});
      s.labels.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const int label = static_cast<int>(i % 10);
        s.labels[i] = label;
        for (std::size_t j = 0; j < kSide * kSide; ++j) {
          s.images[i * kSide * kSide + j] = templates[label][j] + 0.8f * noise(rng);
        }
      }
      return s;
    };
    DatasetSplit train = make(train_size);
    DatasetSplit test = make(test_size);
    return {kind, std::move(train), std::move(test)};
  }
  throw ConfigError("unknown synthetic dataset '" + kind +
                    "' (expected two-gaussians or patterns)");
}

Dataset load_dataset(const std::string& name, const std::filesystem::path& dir,
                     std::uint64_t seed) {
  if (name == "mnist") return load_mnist(dir);
  if (name == "cifar10") return load_cifar10(dir);
  return synth_dataset(name, seed);
}

Tensor gather_images(const DatasetSplit& split, std::span<const std::size_t> indices,
                     bool augment, std::mt19937_64* rng) {
  const Shape sample = split.sample_shape();
  const std::size_t c = sample[0];
  const std::size_t h = sample[1];
  const std::size_t w = sample[2];
  const std::size_t per = c * h * w;
  Tensor batch({indices.size(), c, h, w});
  for (std::size_t b = 0; b < indices.size(); ++b) {
    const float* src = split.images.ptr() + indices[b] * per;
    float* dst = batch.ptr() + b * per;
    if (!augment || rng == nullptr) {
      std::copy_n(src, per, dst);
      continue;
    }
    // Digits are not mirror-symmetric, so grayscale images only get small shifts.
    const bool color = c == 3;
    std::uniform_int_distribution<int> offset(color ? -4 : -2, color ? 4 : 2);
    const int dy = offset(*rng);
    const int dx = offset(*rng);
    const bool flip = color && std::bernoulli_distribution(0.5)(*rng);
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
          const int sy = static_cast<int>(y) + dy;
          const int sx0 = static_cast<int>(flip ? w - 1 - x : x) + dx;
          float v = 0.0f;
          if (sy >= 0 && sy < static_cast<int>(h) && sx0 >= 0 && sx0 < static_cast<int>(w)) {
            v = src[(ch * h + static_cast<std::size_t>(sy)) * w + static_cast<std::size_t>(sx0)];
          }
          dst[(ch * h + y) * w + x] = v;
        }
      }
    }
  }
  return batch;
}

std::vector<int> gather_labels(const DatasetSplit& split, std::span<const std::size_t> indices) {
  std::vector<int> out(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) out[i] = split.labels[indices[i]];
  return out;
}

}  // namespace binet::data

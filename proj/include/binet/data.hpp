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
#include <random>
#include <span>
#include <string>
#include <vector>

#include "binet/tensor.hpp"

namespace binet::data {

/// Images are N x C x H x W, already normalized; labels lie in [0, classes).
struct DatasetSplit {
  Tensor images;
  std::vector<int> labels;
  std::size_t classes = 0;

  std::size_t size() const noexcept { return labels.size(); }
  Shape sample_shape() const;
  /// Throws DataError on label/shape inconsistencies.
  void validate() const;
};

struct Dataset {
  std::string name;
  DatasetSplit train;
  DatasetSplit test;
};

inline constexpr float kMnistMean = 0.1307f;
inline constexpr float kMnistStd = 0.3081f;
inline constexpr float kCifarMean[3] = {0.4914f, 0.4822f, 0.4465f};
inline constexpr float kCifarStd[3] = {0.2470f, 0.2435f, 0.2616f};

/// Parses an IDX image file (magic 2051) into N x 1 x rows x cols in [0, 1].
Tensor parse_idx_images(std::span<const std::uint8_t> bytes);
/// Parses an IDX label file (magic 2049).
std::vector<int> parse_idx_labels(std::span<const std::uint8_t> bytes);

/// Reads train-/t10k- images and labels from `dir` and normalizes with the
/// MNIST mean/std. Throws FormatError (bad magic), TruncatedError, DataError.
Dataset load_mnist(const std::filesystem::path& dir);

/// Parses concatenated 3073-byte CIFAR-10 records into normalized images.
DatasetSplit parse_cifar10(std::span<const std::uint8_t> bytes);
/// Reads data_batch_1..5.bin and test_batch.bin from `dir`.
Dataset load_cifar10(const std::filesystem::path& dir);

/// Synthetic sets, deterministic in `seed`:
///   "two-gaussians"  2-D points from two separated Gaussians, 2 classes
///   "patterns"       1 x 12 x 12 noisy class templates, 10 classes
Dataset synth_dataset(const std::string& kind, std::uint64_t seed, std::size_t train_size = 0,
                      std::size_t test_size = 0);

/// Resolves "mnist", "cifar10" (reading `dir`) or a synthetic kind.
Dataset load_dataset(const std::string& name, const std::filesystem::path& dir,
                     std::uint64_t seed);

/// Copies the samples at `indices` into a batch tensor. With `augment`, RGB
/// samples get a random 4-pixel-padded crop and horizontal flip; single-channel
/// samples get a random shift of up to 2 pixels.
Tensor gather_images(const DatasetSplit& split, std::span<const std::size_t> indices,
                     bool augment, std::mt19937_64* rng);
std::vector<int> gather_labels(const DatasetSplit& split, std::span<const std::size_t> indices);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

}  // namespace binet::data

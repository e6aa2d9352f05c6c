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

#include <stdexcept>
#include <string>
#include <string_view>

namespace binet {

/// Broad failure classes. The CLI maps each to a stable exit code and prints
/// the category name on stderr so scripts can branch on it.
enum class ErrorCategory {
  shape,
  value,
  config,
  io,
  format,
  version,
  truncated,
  checksum,
  data,
};

std::string_view category_name(ErrorCategory c) noexcept;
int exit_code(ErrorCategory c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorCategory::shape, what) {}
};

class ValueError : public Error {
 public:
  explicit ValueError(const std::string& what) : Error(ErrorCategory::value, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::io, what) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(ErrorCategory::format, what) {}

 protected:
  FormatError(ErrorCategory c, const std::string& what) : Error(c, what) {}
};

class VersionError : public FormatError {
 public:
  explicit VersionError(const std::string& what)
      : FormatError(ErrorCategory::version, what) {}
};

class TruncatedError : public FormatError {
 public:
  explicit TruncatedError(const std::string& what)
      : FormatError(ErrorCategory::truncated, what) {}
};

class ChecksumError : public FormatError {
 public:
  explicit ChecksumError(const std::string& what)
      : FormatError(ErrorCategory::checksum, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

}  // namespace binet

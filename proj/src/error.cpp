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

#include "binet/error.hpp"

namespace binet {

std::string_view category_name(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::shape: return "shape";
    case ErrorCategory::value: return "value";
    case ErrorCategory::config: return "config";
    case ErrorCategory::io: return "io";
    case ErrorCategory::format: return "format";
    case ErrorCategory::version: return "version";
    case ErrorCategory::truncated: return "truncated";
    case ErrorCategory::checksum: return "checksum";
    case ErrorCategory::data: return "data";
  }
  return "unknown";
}

int exit_code(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::config: return 2;
    case ErrorCategory::io: return 3;
    case ErrorCategory::format: return 4;
    case ErrorCategory::version: return 5;
    case ErrorCategory::truncated: return 6;
    case ErrorCategory::checksum: return 7;
    case ErrorCategory::data: return 8;
    case ErrorCategory::shape: return 9;
    case ErrorCategory::value: return 10;
  }
  return 1;
}

}  // namespace binet

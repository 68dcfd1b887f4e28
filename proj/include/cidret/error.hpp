// Copyright 2026 The cidret Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cidret {

enum class ErrorKind {
  kEmptyText,
  kBadDim,
  kParseError,
  kDuplicateId,
  kEmptyCorpus,
  kUnknownDoc,
  kEmptySet,
  kInvalidPrefix,
  kBeamTooSmall,
  kUnknownCid,
  kDimMismatch,
  kDivergedLoss,
  kEmptyIndex,
  kMissingQrel,
  kMissingCid,
  kIo,
  kBadArgument,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for every domain failure. The kind drives CLI exit
// codes; `line()` is nonzero only for parse errors.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::size_t line = 0);

  ErrorKind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }

  // true for errors caused by unreadable or malformed input files.
  bool is_io() const noexcept {
    return kind_ == ErrorKind::kIo || kind_ == ErrorKind::kParseError ||
           kind_ == ErrorKind::kBadArgument;
  }

 private:
  ErrorKind kind_;
  std::size_t line_;
};

}  // namespace cidret

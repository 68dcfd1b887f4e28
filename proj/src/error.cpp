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

#include "cidret/error.hpp"

namespace cidret {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kEmptyText: return "EmptyText";
    case ErrorKind::kBadDim: return "BadDim";
    case ErrorKind::kParseError: return "ParseError";
    case ErrorKind::kDuplicateId: return "DuplicateId";
    case ErrorKind::kEmptyCorpus: return "EmptyCorpus";
    case ErrorKind::kUnknownDoc: return "UnknownDoc";
    case ErrorKind::kEmptySet: return "EmptySet";
    case ErrorKind::kInvalidPrefix: return "InvalidPrefix";
    case ErrorKind::kBeamTooSmall: return "BeamTooSmall";
    case ErrorKind::kUnknownCid: return "UnknownCid";
    case ErrorKind::kDimMismatch: return "DimMismatch";
    case ErrorKind::kDivergedLoss: return "DivergedLoss";
    case ErrorKind::kEmptyIndex: return "EmptyIndex";
    case ErrorKind::kMissingQrel: return "MissingQrel";
    case ErrorKind::kMissingCid: return "MissingCid";
    case ErrorKind::kIo: return "Io";
    case ErrorKind::kBadArgument: return "BadArgument";
  }
  return "Unknown";
}

namespace {

std::string decorate(ErrorKind kind, const std::string& message,
                     std::size_t line) {
  std::string out(to_string(kind));
  if (line != 0) out += " (line " + std::to_string(line) + ")";
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message, std::size_t line)
    : std::runtime_error(decorate(kind, message, line)),
      kind_(kind),
      line_(line) {}

}  // namespace cidret

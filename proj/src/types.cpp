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

#include "cidret/types.hpp"

namespace cidret {

Digits Cid::path() const {
  if (digits_.empty()) return {};
  return Digits(digits_.begin(), digits_.end() - 1);
}

bool Cid::is_valid(int max_label) const {
  if (digits_.empty() || digits_.back() != kTerminalDigit) return false;
  for (std::size_t i = 0; i + 1 < digits_.size(); ++i) {
    if (digits_[i] < 1 || digits_[i] > max_label) return false;
  }
  return true;
}

std::string Cid::str() const {
  std::string out;
  for (std::size_t i = 0; i < digits_.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(digits_[i]);
  }
  return out;
}

}  // namespace cidret

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

#include "cidret/text.hpp"

#include <cctype>

namespace cidret {

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::string current;
  for (char ch : text) {
    auto uc = static_cast<unsigned char>(ch);
    if (std::isspace(uc)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(static_cast<char>(std::tolower(uc)));
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::string join(const Tokens& tokens, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end && i < tokens.size(); ++i) {
    if (i != begin) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace cidret

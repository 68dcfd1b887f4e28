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

#include <map>
#include <optional>
#include <vector>

#include "cidret/types.hpp"

namespace cidret {

// Set of valid CIDs answering "which digits may follow this prefix". The
// terminal digit 0 is an ordinary edge into a terminal node. Immutable after
// construction.
class PrefixTrie {
 public:
  // Throws EmptySet.
  explicit PrefixTrie(const std::vector<Cid>& cids);

  // Sorted digits extending `prefix` to another valid prefix; empty at a
  // complete CID. Throws InvalidPrefix when `prefix` is not a trie path.
  std::vector<int> valid_next(const Digits& prefix) const;

  bool contains(const Cid& cid) const;
  bool is_prefix(const Digits& prefix) const { return find(prefix).has_value(); }
  std::size_t size() const noexcept { return count_; }
  std::vector<Cid> cids() const;

 private:
  struct Node {
    std::map<int, std::size_t> children;
    bool terminal = false;
  };

  std::optional<std::size_t> find(const Digits& prefix) const;

  std::vector<Node> nodes_;
  std::size_t count_ = 0;
};

inline PrefixTrie build_trie(const std::vector<Cid>& cids) { return PrefixTrie(cids); }

}  // namespace cidret

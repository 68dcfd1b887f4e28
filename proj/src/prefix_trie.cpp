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

#include "cidret/prefix_trie.hpp"

#include "cidret/error.hpp"

namespace cidret {

PrefixTrie::PrefixTrie(const std::vector<Cid>& cids) {
  if (cids.empty()) throw Error(ErrorKind::kEmptySet, "no CIDs to index");
  nodes_.emplace_back();
  for (const auto& cid : cids) {
    std::size_t at = 0;
    for (int d : cid.digits()) {
      auto it = nodes_[at].children.find(d);
      if (it == nodes_[at].children.end()) {
        const std::size_t next = nodes_.size();
        nodes_[at].children.emplace(d, next);
        nodes_.emplace_back();
        at = next;
      } else {
        at = it->second;
      }
    }
    if (!nodes_[at].terminal) {
      nodes_[at].terminal = true;
      ++count_;
    }
  }
}

std::optional<std::size_t> PrefixTrie::find(const Digits& prefix) const {
  std::size_t at = 0;
  for (int d : prefix) {
    auto it = nodes_[at].children.find(d);
    if (it == nodes_[at].children.end()) return std::nullopt;
    at = it->second;
  }
  return at;
}

std::vector<int> PrefixTrie::valid_next(const Digits& prefix) const {
  auto at = find(prefix);
  if (!at) throw Error(ErrorKind::kInvalidPrefix, Cid(prefix).str());
  std::vector<int> out;
  out.reserve(nodes_[*at].children.size());
  for (const auto& [d, idx] : nodes_[*at].children) out.push_back(d);
  return out;
}

bool PrefixTrie::contains(const Cid& cid) const {
  auto at = find(cid.digits());
  return at && nodes_[*at].terminal;
}

std::vector<Cid> PrefixTrie::cids() const {
  std::vector<Cid> out;
  Digits path;
  auto walk = [&](auto&& self, std::size_t at) -> void {
    if (nodes_[at].terminal) out.emplace_back(path);
    for (const auto& [d, child] : nodes_[at].children) {
      path.push_back(d);
      self(self, child);
      path.pop_back();
    }
  };
  walk(walk, 0);
  return out;
}

}  // namespace cidret

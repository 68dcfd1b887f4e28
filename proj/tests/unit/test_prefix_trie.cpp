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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "cidret/prefix_trie.hpp"
#include "../support/expect_error.hpp"
#include "../support/fixtures.hpp"

namespace cidret {
namespace {

using testing::kind_of;

TEST(PrefixTrie, ValidNextOnSmallSet) {
  const PrefixTrie trie({Cid{1, 2, 0}, Cid{1, 3, 0}, Cid{2, 0}});
  EXPECT_EQ(trie.valid_next({}), (std::vector<int>{1, 2}));
  EXPECT_EQ(trie.valid_next({1}), (std::vector<int>{2, 3}));
  EXPECT_EQ(trie.valid_next({1, 2}), (std::vector<int>{0}));
  EXPECT_EQ(trie.valid_next({2}), (std::vector<int>{0}));
  EXPECT_TRUE(trie.valid_next({1, 2, 0}).empty());
  EXPECT_EQ(kind_of([&] { trie.valid_next({3}); }), ErrorKind::kInvalidPrefix);
  EXPECT_EQ(kind_of([&] { trie.valid_next({1, 4}); }), ErrorKind::kInvalidPrefix);
  EXPECT_EQ(trie.size(), 3u);
}

TEST(PrefixTrie, SingleCid) {
  const PrefixTrie trie({Cid{5, 0}});
  EXPECT_EQ(trie.valid_next({}), (std::vector<int>{5}));
  EXPECT_EQ(trie.valid_next({5}), (std::vector<int>{0}));
  EXPECT_TRUE(trie.contains(Cid{5, 0}));
  EXPECT_FALSE(trie.contains(Cid{5, 1, 0}));
}

TEST(PrefixTrie, EmptySetRejected) {
  EXPECT_EQ(kind_of([] { PrefixTrie t(std::vector<Cid>{}); }), ErrorKind::kEmptySet);
}

TEST(PrefixTrie, DuplicatesCollapse) {
  const PrefixTrie trie({Cid{1, 0}, Cid{1, 0}, Cid{2, 0}});
  EXPECT_EQ(trie.size(), 2u);
}

// Enumerating every path from the root yields the input set, and every
// prefix reported by valid_next extends some input CID.
TEST(PrefixTrieProperty, RoundTripAndNoInvalidPaths) {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 100; ++round) {
    const auto cids = testing::random_cids(rng, 4, 5, 0.35, 60);
    const PrefixTrie trie(cids);
    std::set<Cid> input(cids.begin(), cids.end());
    const auto listed = trie.cids();
    EXPECT_EQ(std::set<Cid>(listed.begin(), listed.end()), input);
    EXPECT_EQ(trie.size(), input.size());
    for (const auto& c : cids) EXPECT_TRUE(trie.contains(c));

    // walk every path, checking each extension against the input set
    std::vector<Digits> stack{{}};
    while (!stack.empty()) {
      Digits p = stack.back();
      stack.pop_back();
      for (int d : trie.valid_next(p)) {
        Digits q = p;
        q.push_back(d);
        const bool extends = std::any_of(input.begin(), input.end(), [&](const Cid& c) {
          return c.size() >= q.size() && std::equal(q.begin(), q.end(), c.digits().begin());
        });
        ASSERT_TRUE(extends);
        if (d == kTerminalDigit) {
          EXPECT_TRUE(input.count(Cid(q)));
        } else {
          stack.push_back(q);
        }
      }
    }
  }
}

}  // namespace
}  // namespace cidret

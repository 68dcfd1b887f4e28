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
#include <cmath>
#include <numbers>
#include <random>

#include "cidret/inter_matcher.hpp"
#include "../support/expect_error.hpp"
#include "../support/fixtures.hpp"

namespace cidret {
namespace {

using testing::kind_of;

QueryRepresentation dummy_query(int dim = 4) { return {Vector::Ones(dim), std::nullopt}; }

// Exhaustive oracle: scores every trie entry by its path probability and
// returns the best k under the same key as the decoder.
std::vector<std::pair<Cid, double>> exhaustive_top_k(const QueryRepresentation& q,
                                                     const StepScorer& scorer,
                                                     const PrefixTrie& trie, double alpha,
                                                     int k) {
  std::vector<std::pair<Cid, double>> all;
  for (const auto& c : trie.cids()) all.emplace_back(c, testing::path_log_prob(q, c, scorer, trie));
  auto key = [&](const std::pair<Cid, double>& e) {
    return e.second / std::pow(static_cast<double>(e.first.size()), alpha);
  };
  std::sort(all.begin(), all.end(), [&](const auto& a, const auto& b) {
    if (key(a) != key(b)) return key(a) > key(b);
    return a.first.digits() < b.first.digits();
  });
  if (static_cast<int>(all.size()) > k) all.resize(static_cast<std::size_t>(k));
  return all;
}

TEST(UniformScorer, SpreadsMassEvenly) {
  UniformScorer s;
  const auto dist = s.score_next(dummy_query(), {}, {1, 2, 3, 4});
  ASSERT_EQ(dist.size(), 4u);
  for (const auto& [d, p] : dist) EXPECT_DOUBLE_EQ(p, 0.25);
}

TEST(Decode, SingleCidHasUnitScore) {
  const PrefixTrie trie({Cid{1, 0}});
  const auto out = decode_clusters(dummy_query(), UniformScorer{}, trie, 5, 0.8, 1);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].cid, (Cid{1, 0}));
  EXPECT_DOUBLE_EQ(out[0].s_inter, 1.0);
  EXPECT_DOUBLE_EQ(out[0].log_prob, 0.0);
}

TEST(Decode, UniformCompleteTreeReturnsEveryLeaf) {
  // b = 3, depth 2: nine leaves of probability 1/9
  std::vector<Cid> cids;
  for (int a = 1; a <= 3; ++a) {
    for (int b = 1; b <= 3; ++b) cids.push_back(Cid{a, b, 0});
  }
  const PrefixTrie trie(cids);
  const auto out = decode_clusters(dummy_query(), UniformScorer{}, trie, 9, 0.8, 9);
  ASSERT_EQ(out.size(), 9u);
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i].cid, cids[i]);  // equal scores fall back to lexicographic order
    EXPECT_NEAR(out[i].s_inter, 1.0 / 9.0, 1e-12);
  }
}

TEST(Decode, ReturnsFewerWhenTrieIsSmall) {
  const PrefixTrie trie({Cid{1, 0}, Cid{2, 0}});
  EXPECT_EQ(decode_clusters(dummy_query(), UniformScorer{}, trie, 10, 0.8, 10).size(), 2u);
}

TEST(Decode, ArgumentChecks) {
  const PrefixTrie trie({Cid{1, 0}, Cid{2, 0}});
  EXPECT_EQ(kind_of([&] { decode_clusters(dummy_query(), UniformScorer{}, trie, 2, 0.8, 3); }),
            ErrorKind::kBeamTooSmall);
  EXPECT_EQ(kind_of([&] { decode_clusters(dummy_query(), UniformScorer{}, trie, 2, 0.8, 0); }),
            ErrorKind::kBadArgument);
}

TEST(Decode, GreedyWhenBeamIsOne) {
  std::mt19937_64 rng(3);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto cids = testing::random_cids(rng, 4, 4, 0.3, 50);
    const PrefixTrie trie(cids);
    const testing::RandomScorer scorer(seed);
    const auto q = dummy_query();
    Digits path;
    for (;;) {
      const auto valid = trie.valid_next(path);
      if (valid.empty()) break;
      const auto dist = scorer.score_next(q, path, valid);
      auto best = dist.front();
      for (const auto& e : dist) {
        if (e.second > best.second) best = e;
      }
      path.push_back(best.first);
    }
    const auto out = decode_clusters(q, scorer, trie, 1, 0.8, 1);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].cid, Cid(path)) << "seed " << seed;
  }
}

TEST(Decode, FullBeamMatchesExhaustiveSearch) {
  std::mt19937_64 rng(5);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto cids = testing::random_cids(rng, 4, 4, 0.3, 40);
    const PrefixTrie trie(cids);
    const testing::RandomScorer scorer(seed + 1000);
    const auto q = dummy_query();
    const int beam = static_cast<int>(trie.size());  // at least the prefixes per depth
    for (double alpha : {0.0, 0.8}) {
      const int k = std::min<int>(5, beam);
      const auto got = decode_clusters(q, scorer, trie, beam, alpha, k);
      const auto want = exhaustive_top_k(q, scorer, trie, alpha, k);
      ASSERT_EQ(got.size(), want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_EQ(got[i].cid, want[i].first);
        EXPECT_NEAR(got[i].log_prob, want[i].second, 1e-9);
        EXPECT_NEAR(got[i].s_inter, std::exp(want[i].second), 1e-12);
      }
    }
  }
}

TEST(DecodeProperty, OutputsAreValidDistinctAndSorted) {
  std::mt19937_64 rng(9);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto cids = testing::random_cids(rng, 5, 4, 0.3, 80);
    const PrefixTrie trie(cids);
    const testing::RandomScorer scorer(seed);
    const int k = 1 + static_cast<int>(seed % 6);
    const int beam = k + static_cast<int>(seed % 3);
    const auto out = decode_clusters(dummy_query(), scorer, trie, beam, 0.8, k);
    EXPECT_LE(out.size(), static_cast<std::size_t>(k));
    std::set<Cid> seen;
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& h : out) {
      EXPECT_TRUE(trie.contains(h.cid));
      EXPECT_TRUE(seen.insert(h.cid).second);
      EXPECT_GT(h.s_inter, 0.0);
      EXPECT_LE(h.s_inter, 1.0 + 1e-15);
      const double key = h.log_prob / std::pow(static_cast<double>(h.cid.size()), 0.8);
      EXPECT_LE(key, prev + 1e-15);
      prev = key;
    }
  }
}

// Widening the beam never lowers the score of the best hypothesis, checked
// here with no length normalization, where every step's score only drops.
TEST(DecodeProperty, WiderBeamDoesNotHurtBestScore) {
  std::mt19937_64 rng(21);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto cids = testing::random_cids(rng, 4, 4, 0.3, 60);
    const PrefixTrie trie(cids);
    const testing::RandomScorer scorer(seed);
    double prev = -std::numeric_limits<double>::infinity();
    for (int beam : {1, 2, 4, 8, 16, 64}) {
      const auto out = decode_clusters(dummy_query(), scorer, trie, beam, 0.0, 1);
      ASSERT_FALSE(out.empty());
      const double full = exhaustive_top_k(dummy_query(), scorer, trie, 0.0, 1)[0].second;
      EXPECT_LE(out[0].log_prob, full + 1e-12);
      if (beam >= static_cast<int>(trie.size())) EXPECT_NEAR(out[0].log_prob, full, 1e-12);
      EXPECT_GE(out[0].log_prob, prev - 1e-12) << "seed " << seed << " beam " << beam;
      prev = out[0].log_prob;
    }
  }
}

TEST(CentroidScorerProperty, NormalizedOverValidDigits) {
  const auto store = testing::uniform_points(300, 6, 2);
  const auto tree = build_cluster_tree(store, TreeParams{.k = 4, .expected_clusters = 20});
  const CentroidScorer scorer(tree, 0.1);
  const PrefixTrie trie(tree.cids());
  std::mt19937_64 rng(1);
  std::vector<Digits> prefixes{{}};
  for (std::size_t i = 0; i < prefixes.size(); ++i) {
    for (int d : trie.valid_next(prefixes[i])) {
      if (d == 0) continue;
      Digits p = prefixes[i];
      p.push_back(d);
      prefixes.push_back(p);
    }
  }
  for (const auto& p : prefixes) {
    const auto valid = trie.valid_next(p);
    QueryRepresentation q{Vector::Random(6) * 5.0, std::nullopt};
    const auto dist = scorer.score_next(q, p, valid);
    ASSERT_EQ(dist.size(), valid.size());
    double total = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
      EXPECT_EQ(dist[i].first, valid[i]);
      EXPECT_GT(dist[i].second, 0.0);
      total += dist[i].second;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(CentroidScorer, PrefersCloserCentroidAndRejectsBadInput) {
  const auto store = testing::gaussian_blobs({Vector{{1.0, 0.0}}, Vector{{-1.0, 0.0}}}, 50, 0.05, 3);
  const auto tree = build_cluster_tree(store, TreeParams{.k = 2, .c = 100});
  const CentroidScorer scorer(tree, 0.1);
  const PrefixTrie trie(tree.cids());
  const Cid target = tree.cid_of("p0_0");
  const auto out = decode_clusters({Vector{{1.0, 0.0}}, std::nullopt}, scorer, trie, 2, 0.8, 1);
  EXPECT_EQ(out[0].cid, target);
  EXPECT_EQ(kind_of([&] { scorer.score_next({Vector::Ones(3), std::nullopt}, {}, {1, 2}); }),
            ErrorKind::kDimMismatch);
  EXPECT_EQ(kind_of([&] { CentroidScorer bad(tree, 0.0); }), ErrorKind::kBadArgument);
}

TEST(InterLoss, ClosedForms) {
  std::vector<Cid> binary;
  for (int a = 1; a <= 2; ++a) {
    for (int b = 1; b <= 2; ++b) binary.push_back(Cid{a, b, 0});
  }
  const PrefixTrie trie(binary);
  // uniform binary choices over two levels, then a forced terminal digit
  EXPECT_NEAR(inter_loss(dummy_query(), Cid{1, 2, 0}, UniformScorer{}, trie),
              2.0 * std::numbers::ln2, 1e-12);
  EXPECT_NEAR(inter_loss(dummy_query(), Cid{2, 1, 0}, testing::ForcedScorer(Cid{2, 1, 0}), trie),
              0.0, 1e-12);
  EXPECT_EQ(kind_of([&] { inter_loss(dummy_query(), Cid{3, 0}, UniformScorer{}, trie); }),
            ErrorKind::kUnknownCid);
}

TEST(InterLoss, EqualsNegativePathLogProb) {
  std::mt19937_64 rng(2);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto cids = testing::random_cids(rng, 3, 4, 0.3, 30);
    const PrefixTrie trie(cids);
    const testing::RandomScorer scorer(seed);
    for (const auto& c : cids) {
      EXPECT_NEAR(inter_loss(dummy_query(), c, scorer, trie),
                  -testing::path_log_prob(dummy_query(), c, scorer, trie), 1e-12);
    }
  }
}

}  // namespace
}  // namespace cidret

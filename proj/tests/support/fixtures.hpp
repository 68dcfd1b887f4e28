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

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cidret/cluster_tree.hpp"
#include "cidret/corpus.hpp"
#include "cidret/embed.hpp"
#include "cidret/inter_matcher.hpp"
#include "cidret/prefix_trie.hpp"

namespace cidret::testing {

// Isotropic Gaussian blobs; ids are "<prefix><blob>_<i>".
EmbeddingStore gaussian_blobs(const std::vector<Vector>& centers, int per_blob, double sigma,
                              std::uint64_t seed, const std::string& prefix = "p");

// Uniform random points in [-1, 1]^dim.
EmbeddingStore uniform_points(int n, int dim, std::uint64_t seed);

// Text corpus with latent topics: every document mixes words from its
// topic's vocabulary with shared background words. Each query is relevant
// to `relevant_per_query` documents of one topic and is written from their
// words.
struct TopicCorpusSpec {
  int topics = 10;
  int docs = 1000;
  int queries = 50;
  int relevant_per_query = 5;
  int doc_len = 40;
  int topic_vocab = 80;
  int shared_vocab = 400;
  double topic_share = 0.6;  // fraction of document tokens from the topic vocabulary
  int query_len = 12;
  double query_topic_share = 0.5;  // fraction of query tokens that are topic words
  std::uint64_t seed = 7;
};

struct TopicCorpus {
  Corpus corpus;
  std::vector<QueryRecord> queries;
  std::vector<int> doc_topic;  // aligned with corpus.docs()
};

TopicCorpus make_topic_corpus(const TopicCorpusSpec& spec);

Qrels to_qrels(const std::vector<QueryRecord>& records);

// Random set of distinct CIDs: each node has 1..max_branch children and
// becomes a leaf with probability leaf_prob (always at max_depth).
std::vector<Cid> random_cids(std::mt19937_64& rng, int max_branch, int max_depth,
                             double leaf_prob, std::size_t max_count);

// Deterministic pseudo-random step distributions keyed by (seed, prefix).
class RandomScorer final : public StepScorer {
 public:
  explicit RandomScorer(std::uint64_t seed) : seed_(seed) {}
  StepDistribution score_next(const QueryRepresentation& query, const Digits& prefix,
                              const std::vector<int>& valid) const override;
  bool concurrent_safe() const override { return true; }

 private:
  std::uint64_t seed_;
};

// Puts all mass on the digits of one CID. Off-path digits get probability 0,
// so this scorer is only meant for loss checks, not for decoding.
class ForcedScorer final : public StepScorer {
 public:
  explicit ForcedScorer(Cid target) : target_(std::move(target)) {}
  StepDistribution score_next(const QueryRepresentation& query, const Digits& prefix,
                              const std::vector<int>& valid) const override;

 private:
  Cid target_;
};

// Independent path-probability oracle: product over the digits of the
// scorer's probability, accumulated as a sum of logs from the first digit.
double path_log_prob(const QueryRepresentation& q, const Cid& cid, const StepScorer& scorer,
                     const PrefixTrie& trie);

}  // namespace cidret::testing

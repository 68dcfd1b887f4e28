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

#include <utility>
#include <vector>

#include "cidret/cluster_tree.hpp"
#include "cidret/embed.hpp"
#include "cidret/prefix_trie.hpp"
#include "cidret/types.hpp"

namespace cidret {

// (digit, probability) pairs, one per valid digit, in the order of `valid`.
using StepDistribution = std::vector<std::pair<int, double>>;

// Per-step conditional model p(next digit | query, prefix). Implementations
// must put positive mass on exactly the valid digits, summing to 1.
class StepScorer {
 public:
  virtual ~StepScorer() = default;
  virtual StepDistribution score_next(const QueryRepresentation& query,
                                      const Digits& prefix,
                                      const std::vector<int>& valid) const = 0;
  // Whether score_next may be called from several threads at once.
  virtual bool concurrent_safe() const { return false; }
};

// Uniform over the valid digits.
class UniformScorer final : public StepScorer {
 public:
  StepDistribution score_next(const QueryRepresentation& query, const Digits& prefix,
                              const std::vector<int>& valid) const override;
  bool concurrent_safe() const override { return true; }
};

// Softmax of <pooled, child centroid> / temperature over the valid children of
// the node addressed by `prefix`. At a leaf the terminal digit gets mass 1.
class CentroidScorer final : public StepScorer {
 public:
  // Keeps a reference to `tree`, which must outlive the scorer.
  explicit CentroidScorer(const ClusterTree& tree, double temperature = 0.1);

  StepDistribution score_next(const QueryRepresentation& query, const Digits& prefix,
                              const std::vector<int>& valid) const override;
  bool concurrent_safe() const override { return true; }

  double temperature() const noexcept { return temperature_; }

 private:
  const ClusterTree& tree_;
  double temperature_;
};

struct ClusterHypothesis {
  Cid cid;
  double log_prob = 0.0;  // sum of per-step log probabilities
  double s_inter = 1.0;   // exp(log_prob)
};

// Prefix-constrained beam search. Candidates are ranked by
// log_prob / len^length_penalty (len counts the terminal digit), ties by the
// lexicographically smaller digit sequence; each step keeps the best
// `beam_size` expansions and moves completed ones out of the beam. Returns
// the best `k` completed hypotheses. Throws BeamTooSmall if beam_size < k.
std::vector<ClusterHypothesis> decode_clusters(const QueryRepresentation& query,
                                               const StepScorer& scorer,
                                               const PrefixTrie& trie, int beam_size,
                                               double length_penalty, int k);

// Cross-entropy of the gold CID: -sum_j log p(gold_j | gold_<j).
// Throws UnknownCid when gold is not a trie entry.
double inter_loss(const QueryRepresentation& query, const Cid& gold,
                  const StepScorer& scorer, const PrefixTrie& trie);

}  // namespace cidret

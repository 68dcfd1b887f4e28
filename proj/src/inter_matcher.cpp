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

#include "cidret/inter_matcher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cidret/error.hpp"

namespace cidret {

StepDistribution UniformScorer::score_next(const QueryRepresentation&, const Digits&,
                                           const std::vector<int>& valid) const {
  StepDistribution out;
  out.reserve(valid.size());
  const double p = 1.0 / static_cast<double>(valid.size());
  for (int d : valid) out.emplace_back(d, p);
  return out;
}

CentroidScorer::CentroidScorer(const ClusterTree& tree, double temperature)
    : tree_(tree), temperature_(temperature) {
  if (!(temperature > 0.0)) {
    throw Error(ErrorKind::kBadArgument, "temperature must be positive");
  }
}

StepDistribution CentroidScorer::score_next(const QueryRepresentation& query,
                                            const Digits& prefix,
                                            const std::vector<int>& valid) const {
  const auto node = tree_.find_node(prefix);
  if (!node) throw Error(ErrorKind::kInvalidPrefix, Cid(prefix).str());
  const auto& n = tree_.node(*node);
  StepDistribution out;
  if (n.is_leaf()) {
    if (valid.size() != 1 || valid.front() != kTerminalDigit) {
      throw Error(ErrorKind::kUnknownCid, "leaf prefix " + Cid(prefix).str() +
                                              " admits only the terminal digit");
    }
    out.emplace_back(kTerminalDigit, 1.0);
    return out;
  }
  if (query.pooled.size() != tree_.dim()) {
    throw Error(ErrorKind::kDimMismatch, "query dim does not match tree");
  }

  std::vector<double> logits;
  logits.reserve(valid.size());
  for (int d : valid) {
    auto it = std::find_if(n.children.begin(), n.children.end(),
                           [&](std::size_t ch) { return tree_.node(ch).label == d; });
    if (it == n.children.end()) {
      throw Error(ErrorKind::kUnknownCid, "digit " + std::to_string(d) +
                                              " is not a child of " + Cid(prefix).str());
    }
    logits.push_back(tree_.node(*it).centroid.dot(query.pooled) / temperature_);
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (auto& l : logits) {
    l = std::exp(l - mx);
    z += l;
  }
  out.reserve(valid.size());
  for (std::size_t i = 0; i < valid.size(); ++i) {
    // keep every valid digit strictly positive
    out.emplace_back(valid[i], std::max(logits[i] / z, std::numeric_limits<double>::min()));
  }
  return out;
}

namespace {

struct Partial {
  Digits digits;
  double log_prob;
  double penalized;
};

double penalize(double log_prob, std::size_t len, double alpha) {
  return log_prob / std::pow(static_cast<double>(len), alpha);
}

bool better(const Partial& a, const Partial& b) {
  if (a.penalized != b.penalized) return a.penalized > b.penalized;
  return a.digits < b.digits;
}

}  // namespace

std::vector<ClusterHypothesis> decode_clusters(const QueryRepresentation& query,
                                               const StepScorer& scorer,
                                               const PrefixTrie& trie, int beam_size,
                                               double length_penalty, int k) {
  if (k < 1) throw Error(ErrorKind::kBadArgument, "k must be >= 1");
  if (beam_size < k) {
    throw Error(ErrorKind::kBeamTooSmall, "beam_size " + std::to_string(beam_size) +
                                              " < k " + std::to_string(k));
  }
  const auto beam = static_cast<std::size_t>(beam_size);
  std::vector<Partial> live{{Digits{}, 0.0, 0.0}};
  std::vector<Partial> finished;
  while (!live.empty()) {
    std::vector<Partial> candidates;
    for (const auto& h : live) {
      const auto valid = trie.valid_next(h.digits);
      for (const auto& [d, p] : scorer.score_next(query, h.digits, valid)) {
        Partial c{h.digits, h.log_prob + std::log(p), 0.0};
        c.digits.push_back(d);
        c.penalized = penalize(c.log_prob, c.digits.size(), length_penalty);
        candidates.push_back(std::move(c));
      }
    }
    if (candidates.size() > beam) {
      std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(beam),
                        candidates.end(), better);
      candidates.resize(beam);
    }
    live.clear();
    for (auto& c : candidates) {
      if (c.digits.back() == kTerminalDigit) {
        finished.push_back(std::move(c));
      } else {
        live.push_back(std::move(c));
      }
    }
  }
  std::sort(finished.begin(), finished.end(), better);
  if (finished.size() > static_cast<std::size_t>(k)) finished.resize(static_cast<std::size_t>(k));

  std::vector<ClusterHypothesis> out;
  out.reserve(finished.size());
  for (auto& f : finished) {
    out.push_back({Cid(std::move(f.digits)), f.log_prob, std::exp(f.log_prob)});
  }
  return out;
}

double inter_loss(const QueryRepresentation& query, const Cid& gold,
                  const StepScorer& scorer, const PrefixTrie& trie) {
  if (!trie.contains(gold)) throw Error(ErrorKind::kUnknownCid, gold.str());
  double loss = 0.0;
  Digits prefix;
  for (int d : gold.digits()) {
    const auto dist = scorer.score_next(query, prefix, trie.valid_next(prefix));
    auto it = std::find_if(dist.begin(), dist.end(),
                           [d](const auto& e) { return e.first == d; });
    if (it == dist.end()) {
      throw Error(ErrorKind::kUnknownCid, "scorer omitted digit of " + gold.str());
    }
    loss -= std::log(it->second);
    prefix.push_back(d);
  }
  return loss;
}

}  // namespace cidret

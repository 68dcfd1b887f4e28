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

#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cidret/kmeans.hpp"

namespace cidret::testing {

EmbeddingStore gaussian_blobs(const std::vector<Vector>& centers, int per_blob, double sigma,
                              std::uint64_t seed, const std::string& prefix) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  EmbeddingStore store(static_cast<int>(centers.front().size()));
  for (std::size_t b = 0; b < centers.size(); ++b) {
    for (int i = 0; i < per_blob; ++i) {
      Vector v = centers[b];
      for (Eigen::Index d = 0; d < v.size(); ++d) v[d] += noise(rng);
      store.add(prefix + std::to_string(b) + "_" + std::to_string(i), v);
    }
  }
  return store;
}

EmbeddingStore uniform_points(int n, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  EmbeddingStore store(dim);
  for (int i = 0; i < n; ++i) {
    Vector v(dim);
    for (int d = 0; d < dim; ++d) v[d] = u(rng);
    store.add("u" + std::to_string(i), v);
  }
  return store;
}

TopicCorpus make_topic_corpus(const TopicCorpusSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  std::uniform_int_distribution<int> topic_word(0, spec.topic_vocab - 1);
  std::uniform_int_distribution<int> shared_word(0, spec.shared_vocab - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  TopicCorpus out;
  std::vector<std::vector<std::string>> doc_words;
  for (int d = 0; d < spec.docs; ++d) {
    const int topic = d % spec.topics;
    std::vector<std::string> words;
    for (int i = 0; i < spec.doc_len; ++i) {
      if (coin(rng) < spec.topic_share) {
        words.push_back("t" + std::to_string(topic) + "w" + std::to_string(topic_word(rng)));
      } else {
        words.push_back("s" + std::to_string(shared_word(rng)));
      }
    }
    std::string text;
    for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
    out.corpus.add(Document("d" + std::to_string(d), text));
    out.doc_topic.push_back(topic);
    doc_words.push_back(std::move(words));
  }

  for (int q = 0; q < spec.queries; ++q) {
    const int topic = q % spec.topics;
    std::vector<int> pool;
    for (int d = topic; d < spec.docs; d += spec.topics) pool.push_back(d);
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(static_cast<std::size_t>(spec.relevant_per_query));

    std::vector<std::string> topical, shared;
    for (int d : pool) {
      for (const auto& w : doc_words[static_cast<std::size_t>(d)]) {
        (w[0] == 't' ? topical : shared).push_back(w);
      }
    }
    std::string text;
    for (int i = 0; i < spec.query_len; ++i) {
      const bool use_topic = shared.empty() || (!topical.empty() && coin(rng) < spec.query_topic_share);
      const auto& src = use_topic ? topical : shared;
      std::uniform_int_distribution<std::size_t> pick(0, src.size() - 1);
      text += (text.empty() ? "" : " ") + src[pick(rng)];
    }
    QueryRecord rec;
    rec.query_id = "q" + std::to_string(q);
    rec.query_text = text;
    for (int d : pool) rec.relevant.push_back("d" + std::to_string(d));
    out.queries.push_back(std::move(rec));
  }
  return out;
}

Qrels to_qrels(const std::vector<QueryRecord>& records) {
  Qrels q;
  for (const auto& r : records) q[r.query_id] = r.relevant;
  return q;
}

std::vector<Cid> random_cids(std::mt19937_64& rng, int max_branch, int max_depth,
                             double leaf_prob, std::size_t max_count) {
  std::vector<Cid> out;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> branch(1, max_branch);
  Digits path;
  auto grow = [&](auto&& self, int depth) -> void {
    if (out.size() >= max_count) return;
    const int children = branch(rng);
    for (int label = 1; label <= children && out.size() < max_count; ++label) {
      path.push_back(label);
      if (depth + 1 >= max_depth || coin(rng) < leaf_prob) {
        Digits d = path;
        d.push_back(kTerminalDigit);
        out.emplace_back(std::move(d));
      } else {
        self(self, depth + 1);
      }
      path.pop_back();
    }
  };
  while (out.empty()) grow(grow, 0);
  return out;
}

StepDistribution RandomScorer::score_next(const QueryRepresentation&, const Digits& prefix,
                                          const std::vector<int>& valid) const {
  std::uint64_t h = seed_;
  for (int d : prefix) h = derive_seed(h, static_cast<std::uint64_t>(d) + 17);
  std::mt19937_64 rng(h);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> w(valid.size());
  for (auto& x : w) x = u(rng);
  const double z = std::accumulate(w.begin(), w.end(), 0.0);
  StepDistribution out;
  for (std::size_t i = 0; i < valid.size(); ++i) out.emplace_back(valid[i], w[i] / z);
  return out;
}

StepDistribution ForcedScorer::score_next(const QueryRepresentation&, const Digits& prefix,
                                          const std::vector<int>& valid) const {
  const std::size_t pos = prefix.size();
  const int want = pos < target_.size() ? target_[pos] : -1;
  StepDistribution out;
  const bool on_path = std::find(valid.begin(), valid.end(), want) != valid.end();
  if (!on_path || valid.size() == 1) {
    for (int d : valid) out.emplace_back(d, 1.0 / static_cast<double>(valid.size()));
    return out;
  }
  for (int d : valid) out.emplace_back(d, d == want ? 1.0 : 0.0);
  return out;
}

double path_log_prob(const QueryRepresentation& q, const Cid& cid, const StepScorer& scorer,
                     const PrefixTrie& trie) {
  double lp = 0.0;
  Digits prefix;
  for (int d : cid.digits()) {
    for (const auto& [digit, p] : scorer.score_next(q, prefix, trie.valid_next(prefix))) {
      if (digit == d) lp += std::log(p);
    }
    prefix.push_back(d);
  }
  return lp;
}

}  // namespace cidret::testing

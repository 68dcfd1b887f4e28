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
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cidret/cluster_tree.hpp"
#include "cidret/corpus.hpp"
#include "cidret/embed.hpp"
#include "cidret/inter_matcher.hpp"
#include "cidret/intra_matcher.hpp"
#include "cidret/prefix_trie.hpp"

namespace cidret {

struct RetrievalConfig {
  double beta = 1.0;  // weight of s_intra in the fused score
  int beam_size = 100;
  double length_penalty = 0.8;
  int k_clusters = 10;  // clusters recalled by beam search
  int expected_clusters = 5000;
  int branching = 30;
  double gamma = 2.0;
  double temperature = 0.1;  // CentroidScorer softmax temperature

  // Throws BadArgument when an invariant (beam_size >= k_clusters >= 1, ...)
  // does not hold.
  void validate() const;
};

struct IndexConfig {
  RetrievalConfig retrieval;
  int dim = 256;
  std::uint64_t seed = 0;
  // Documents were embedded externally; text queries cannot be embedded.
  bool external_embeddings = false;

  std::uint64_t tree_seed() const;
  std::uint64_t embed_seed() const;
};

struct RetrievalEntry {
  DocId doc_id;
  Cid cid;
  double s_inter = 0.0;
  double s_intra = 0.0;
  double s_overall = 0.0;
};

struct RetrievalResult {
  std::vector<RetrievalEntry> entries;      // s_overall desc, s_intra desc, id asc
  std::vector<ClusterHypothesis> clusters;  // decoded clusters, beam order
};

// Coarse-to-fine index: beam search over cluster identifiers followed by
// inner-product ranking inside the recalled clusters. Not copyable; the tree
// lives behind a stable pointer because the default scorer refers to it.
class RetrievalIndex {
 public:
  // Embeds with the hashing embedder configured by `config`.
  static RetrievalIndex build(Corpus corpus, const IndexConfig& config);
  // Uses precomputed document embeddings, which must cover the corpus.
  static RetrievalIndex build(Corpus corpus, EmbeddingStore embeddings,
                              const IndexConfig& config);

  RetrievalIndex(RetrievalIndex&&) noexcept = default;
  RetrievalIndex& operator=(RetrievalIndex&&) noexcept = default;
  RetrievalIndex(const RetrievalIndex&) = delete;
  RetrievalIndex& operator=(const RetrievalIndex&) = delete;

  // Top-k documents by s_overall = s_inter + beta * s_intra, gathering at most
  // min(cluster size, k) documents from each recalled cluster. May return
  // fewer than k entries. Throws EmptyIndex.
  RetrievalResult retrieve(std::string_view query_text, int k) const;
  RetrievalResult retrieve(const QueryRepresentation& query, int k) const;

  // Embeds a query and applies the adapter if one is set.
  QueryRepresentation represent(std::string_view query_text) const;

  // Appends documents to their nearest leaves. Tree structure, centroids, the
  // trie, and every existing CID and embedding stay as they were. Returns the
  // number of insertions per leaf. Throws DuplicateId before mutating anything.
  std::map<Cid, std::size_t> add_documents(std::vector<Document> docs);
  std::map<Cid, std::size_t> add_documents(std::vector<Document> docs,
                                           const EmbeddingStore& new_embeddings);

  // inter_loss + intra_loss for one training pair, negatives drawn from its
  // cluster and from `batch`.
  double total_loss(const TrainingPair& pair, std::span<const TrainingPair> batch,
                    int n_a, std::uint64_t seed) const;

  const Corpus& corpus() const noexcept { return corpus_; }
  const EmbeddingStore& embeddings() const noexcept { return embeddings_; }
  const ClusterTree& tree() const noexcept { return *tree_; }
  const PrefixTrie& trie() const noexcept { return *trie_; }
  const StepScorer& scorer() const noexcept { return *scorer_; }
  const IndexConfig& config() const noexcept { return config_; }
  const std::optional<LinearAdapter>& adapter() const noexcept { return adapter_; }
  const Embedder* embedder() const noexcept { return embedder_.get(); }

  void set_scorer(std::shared_ptr<const StepScorer> scorer);
  void set_adapter(std::optional<LinearAdapter> adapter);
  // Changes retrieval-time settings (beta, beam, ...). Build-time fields are
  // ignored.
  void set_retrieval_config(const RetrievalConfig& retrieval);

  // Directory layout: corpus.jsonl, embeddings.bin, manifest.json, tree.json,
  // centroids.bin, added.json, config.json, optional adapter.bin and
  // adapter.json. Files are written to temporaries and renamed into place.
  void save(const std::filesystem::path& dir) const;
  static RetrievalIndex load(const std::filesystem::path& dir);

 private:
  RetrievalIndex() = default;
  void init_derived();

  Corpus corpus_;
  EmbeddingStore embeddings_;
  std::unique_ptr<ClusterTree> tree_;
  std::unique_ptr<PrefixTrie> trie_;
  std::shared_ptr<const StepScorer> scorer_;
  std::unique_ptr<Embedder> embedder_;
  std::optional<LinearAdapter> adapter_;
  IndexConfig config_;
};

// Retrieves every query; output order matches input order. Uses up to
// `workers` threads when the index scorer is concurrency-safe.
std::vector<RetrievalResult> retrieve_all(const RetrievalIndex& index,
                                          std::span<const QueryRepresentation> queries,
                                          int k, int workers = 1);

// Flat JSON for config.json.
void write_index_config(const std::filesystem::path& path, const IndexConfig& config);
IndexConfig read_index_config(const std::filesystem::path& path);

}  // namespace cidret

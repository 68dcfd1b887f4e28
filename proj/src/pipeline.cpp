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

#include "cidret/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <thread>
#include <unordered_set>

#include <json.hpp>

#include "cidret/error.hpp"
#include "cidret/kmeans.hpp"

namespace cidret {

using nlohmann::json;

void RetrievalConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::kBadArgument, m); };
  if (!(beta >= 0.0)) fail("beta must be >= 0");
  if (k_clusters < 1) fail("k_clusters must be >= 1");
  if (beam_size < k_clusters) {
    throw Error(ErrorKind::kBeamTooSmall, "beam_size must be >= k_clusters");
  }
  if (expected_clusters < 1) fail("expected_clusters must be >= 1");
  if (branching < 1) fail("branching must be >= 1");
  if (!(gamma > 0.0)) fail("gamma must be > 0");
  if (!(temperature > 0.0)) fail("temperature must be > 0");
}

std::uint64_t IndexConfig::tree_seed() const { return derive_seed(seed, 1); }
std::uint64_t IndexConfig::embed_seed() const { return derive_seed(seed, 2); }

RetrievalIndex RetrievalIndex::build(Corpus corpus, const IndexConfig& config) {
  config.retrieval.validate();
  if (config.external_embeddings) {
    throw Error(ErrorKind::kBadArgument, "external embeddings must be supplied");
  }
  HashEmbedder embedder(config.dim, config.embed_seed());
  EmbeddingStore store(config.dim);
  for (const auto& d : corpus.docs()) store.add(d.id, embedder.embed(d.tokens));
  return build(std::move(corpus), std::move(store), config);
}

RetrievalIndex RetrievalIndex::build(Corpus corpus, EmbeddingStore embeddings,
                                     const IndexConfig& config) {
  config.retrieval.validate();
  if (corpus.empty()) throw Error(ErrorKind::kEmptyCorpus, "no documents");
  // Cluster in corpus order regardless of the store's insertion order.
  EmbeddingStore ordered(embeddings.dim());
  for (const auto& d : corpus.docs()) {
    if (!embeddings.contains(d.id)) {
      throw Error(ErrorKind::kUnknownDoc, "no embedding for '" + d.id + "'");
    }
    ordered.add(d.id, embeddings.at(d.id));
  }

  RetrievalIndex index;
  index.config_ = config;
  index.config_.dim = ordered.dim();
  index.corpus_ = std::move(corpus);
  index.embeddings_ = std::move(ordered);
  TreeParams params;
  params.k = config.retrieval.branching;
  params.expected_clusters = config.retrieval.expected_clusters;
  params.seed = config.tree_seed();
  index.tree_ = std::make_unique<ClusterTree>(build_cluster_tree(index.embeddings_, params));
  index.init_derived();
  return index;
}

void RetrievalIndex::init_derived() {
  trie_ = std::make_unique<PrefixTrie>(tree_->cids());
  scorer_ = std::make_shared<CentroidScorer>(*tree_, config_.retrieval.temperature);
  if (!config_.external_embeddings) {
    embedder_ = std::make_unique<HashEmbedder>(config_.dim, config_.embed_seed());
  }
}

void RetrievalIndex::set_scorer(std::shared_ptr<const StepScorer> scorer) {
  if (!scorer) throw Error(ErrorKind::kBadArgument, "null scorer");
  scorer_ = std::move(scorer);
}

void RetrievalIndex::set_adapter(std::optional<LinearAdapter> adapter) {
  if (adapter && adapter->dim() != config_.dim) {
    throw Error(ErrorKind::kDimMismatch, "adapter dim does not match index");
  }
  adapter_ = std::move(adapter);
}

void RetrievalIndex::set_retrieval_config(const RetrievalConfig& retrieval) {
  retrieval.validate();
  const bool new_temperature = retrieval.temperature != config_.retrieval.temperature;
  config_.retrieval.beta = retrieval.beta;
  config_.retrieval.beam_size = retrieval.beam_size;
  config_.retrieval.length_penalty = retrieval.length_penalty;
  config_.retrieval.k_clusters = retrieval.k_clusters;
  config_.retrieval.gamma = retrieval.gamma;
  config_.retrieval.temperature = retrieval.temperature;
  if (new_temperature && dynamic_cast<const CentroidScorer*>(scorer_.get())) {
    scorer_ = std::make_shared<CentroidScorer>(*tree_, retrieval.temperature);
  }
}

QueryRepresentation RetrievalIndex::represent(std::string_view query_text) const {
  if (!embedder_) {
    throw Error(ErrorKind::kBadArgument,
                "index uses external embeddings; supply query embeddings");
  }
  auto q = embedder_->embed_query(tokenize(query_text));
  if (adapter_) q.pooled = adapter_->apply(q.pooled);
  return q;
}

RetrievalResult RetrievalIndex::retrieve(std::string_view query_text, int k) const {
  return retrieve(represent(query_text), k);
}

RetrievalResult RetrievalIndex::retrieve(const QueryRepresentation& query, int k) const {
  if (!tree_ || corpus_.empty()) throw Error(ErrorKind::kEmptyIndex, "index is empty");
  if (k < 1) throw Error(ErrorKind::kBadArgument, "k must be >= 1");
  const auto& rc = config_.retrieval;

  RetrievalResult result;
  result.clusters = decode_clusters(query, *scorer_, *trie_, rc.beam_size,
                                    rc.length_penalty, rc.k_clusters);
  for (const auto& hyp : result.clusters) {
    for (auto& s : rank_within_cluster(query.pooled, *tree_, embeddings_, hyp.cid, k)) {
      result.entries.push_back({std::move(s.doc_id), hyp.cid, hyp.s_inter, s.s_intra,
                                hyp.s_inter + rc.beta * s.s_intra});
    }
  }
  const auto keep = std::min(result.entries.size(), static_cast<std::size_t>(k));
  std::partial_sort(result.entries.begin(),
                    result.entries.begin() + static_cast<std::ptrdiff_t>(keep),
                    result.entries.end(),
                    [](const RetrievalEntry& a, const RetrievalEntry& b) {
                      if (a.s_overall != b.s_overall) return a.s_overall > b.s_overall;
                      if (a.s_intra != b.s_intra) return a.s_intra > b.s_intra;
                      return a.doc_id < b.doc_id;
                    });
  result.entries.resize(keep);
  return result;
}

std::map<Cid, std::size_t> RetrievalIndex::add_documents(std::vector<Document> docs) {
  if (!embedder_) {
    throw Error(ErrorKind::kBadArgument,
                "index uses external embeddings; supply document embeddings");
  }
  EmbeddingStore fresh(config_.dim);
  for (const auto& d : docs) {
    if (!fresh.contains(d.id)) fresh.add(d.id, embedder_->embed(d.tokens));
  }
  return add_documents(std::move(docs), fresh);
}

std::map<Cid, std::size_t> RetrievalIndex::add_documents(
    std::vector<Document> docs, const EmbeddingStore& new_embeddings) {
  std::unordered_set<DocId> batch;
  for (const auto& d : docs) {
    if (corpus_.contains(d.id) || !batch.insert(d.id).second) {
      throw Error(ErrorKind::kDuplicateId, d.id);
    }
    if (!new_embeddings.contains(d.id)) {
      throw Error(ErrorKind::kUnknownDoc, "no embedding for '" + d.id + "'");
    }
    if (new_embeddings.dim() != config_.dim) {
      throw Error(ErrorKind::kDimMismatch, "new embeddings have the wrong dim");
    }
  }
  std::map<Cid, std::size_t> counts;
  for (auto& d : docs) {
    embeddings_.add(d.id, new_embeddings.at(d.id));
    const Cid cid = assign_new_document(*tree_, embeddings_.at(d.id));
    tree_->append_member(cid, d.id);
    ++counts[cid];
    corpus_.add(std::move(d));
  }
  return counts;
}

double RetrievalIndex::total_loss(const TrainingPair& pair,
                                  std::span<const TrainingPair> batch, int n_a,
                                  std::uint64_t seed) const {
  const auto q = represent(pair.query_text);
  const double inter = inter_loss(q, tree_->cid_of(pair.positive_doc_id), *scorer_, *trie_);
  const auto negs = sample_negatives(pair, *tree_, batch, n_a, seed);
  auto gather = [&](const std::vector<DocId>& ids) {
    Matrix m(config_.dim, static_cast<Eigen::Index>(ids.size()));
    for (std::size_t i = 0; i < ids.size(); ++i) {
      m.col(static_cast<Eigen::Index>(i)) = embeddings_.at(ids[i]);
    }
    return m;
  };
  const double intra = intra_loss<double>(q.pooled, embeddings_.at(pair.positive_doc_id),
                                          gather(negs.intra), gather(negs.inter),
                                          config_.retrieval.gamma)
                           .loss;
  return inter + intra;
}

namespace {

json config_to_json(const IndexConfig& c) {
  const auto& r = c.retrieval;
  return json{{"beta", r.beta},
              {"beam_size", r.beam_size},
              {"length_penalty", r.length_penalty},
              {"k_clusters", r.k_clusters},
              {"expected_clusters", r.expected_clusters},
              {"branching", r.branching},
              {"gamma", r.gamma},
              {"temperature", r.temperature},
              {"dim", c.dim},
              {"seed", c.seed},
              {"embedder", c.external_embeddings ? "external" : "hash"}};
}

// Writes via a sibling temporary so readers never observe a partial file.
template <typename Writer>
void write_atomically(const std::filesystem::path& target, Writer&& writer) {
  auto tmp = target;
  tmp += ".tmp";
  writer(tmp);
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot replace " + target.string() + ": " + ec.message());
}

}  // namespace

void write_index_config(const std::filesystem::path& path, const IndexConfig& config) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << config_to_json(config).dump(2) << '\n';
}

IndexConfig read_index_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  IndexConfig c;
  try {
    const json j = json::parse(in);
    auto& r = c.retrieval;
    r.beta = j.value("beta", r.beta);
    r.beam_size = j.value("beam_size", r.beam_size);
    r.length_penalty = j.value("length_penalty", r.length_penalty);
    r.k_clusters = j.value("k_clusters", r.k_clusters);
    r.expected_clusters = j.value("expected_clusters", r.expected_clusters);
    r.branching = j.value("branching", r.branching);
    r.gamma = j.value("gamma", r.gamma);
    r.temperature = j.value("temperature", r.temperature);
    c.dim = j.value("dim", c.dim);
    c.seed = j.value("seed", c.seed);
    c.external_embeddings = j.value("embedder", std::string("hash")) == "external";
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParseError, path.string() + ": " + e.what());
  }
  return c;
}

void RetrievalIndex::save(const std::filesystem::path& dir) const {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir.string());

  write_atomically(dir / "corpus.jsonl", [&](const auto& p) { save_corpus(p, corpus_); });
  // embeddings.bin and manifest.json must agree, so both go through temporaries
  // before either is renamed.
  auto emb_tmp = dir / "embeddings.bin.tmp";
  auto man_tmp = dir / "manifest.json.tmp";
  embeddings_.save(emb_tmp, man_tmp);
  std::filesystem::rename(emb_tmp, dir / "embeddings.bin");
  std::filesystem::rename(man_tmp, dir / "manifest.json");

  auto tree_tmp = dir / "tree.json.tmp";
  auto cen_tmp = dir / "centroids.bin.tmp";
  tree_->save(tree_tmp, cen_tmp);
  std::filesystem::rename(tree_tmp, dir / "tree.json");
  std::filesystem::rename(cen_tmp, dir / "centroids.bin");

  write_atomically(dir / "added.json", [&](const auto& p) { tree_->save_added(p); });
  write_atomically(dir / "config.json", [&](const auto& p) { write_index_config(p, config_); });
  if (adapter_) {
    auto bin_tmp = dir / "adapter.bin.tmp";
    auto meta_tmp = dir / "adapter.json.tmp";
    adapter_->save(bin_tmp, meta_tmp);
    std::filesystem::rename(bin_tmp, dir / "adapter.bin");
    std::filesystem::rename(meta_tmp, dir / "adapter.json");
  } else {
    std::filesystem::remove(dir / "adapter.bin", ec);
    std::filesystem::remove(dir / "adapter.json", ec);
  }
}

RetrievalIndex RetrievalIndex::load(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorKind::kIo, "index directory " + dir.string() + " does not exist");
  }
  RetrievalIndex index;
  index.config_ = read_index_config(dir / "config.json");
  index.corpus_ = load_corpus(dir / "corpus.jsonl");
  index.embeddings_ = EmbeddingStore::load(dir / "embeddings.bin", dir / "manifest.json");
  index.tree_ = std::make_unique<ClusterTree>(
      ClusterTree::load(dir / "tree.json", dir / "centroids.bin"));
  if (std::filesystem::exists(dir / "added.json")) index.tree_->load_added(dir / "added.json");
  index.config_.dim = index.embeddings_.dim();
  for (const auto& d : index.corpus_.docs()) {
    if (!index.embeddings_.contains(d.id) || !index.tree_->contains(d.id)) {
      throw Error(ErrorKind::kParseError, "index is missing data for '" + d.id + "'");
    }
  }
  index.init_derived();
  if (std::filesystem::exists(dir / "adapter.bin")) {
    index.set_adapter(LinearAdapter::load(dir / "adapter.bin", dir / "adapter.json"));
  }
  return index;
}

std::vector<RetrievalResult> retrieve_all(const RetrievalIndex& index,
                                          std::span<const QueryRepresentation> queries,
                                          int k, int workers) {
  std::vector<RetrievalResult> out(queries.size());
  std::size_t n_workers = static_cast<std::size_t>(std::max(1, workers));
  if (!index.scorer().concurrent_safe()) n_workers = 1;
  n_workers = std::min(n_workers, std::max<std::size_t>(1, queries.size()));
  if (n_workers == 1) {
    for (std::size_t i = 0; i < queries.size(); ++i) out[i] = index.retrieve(queries[i], k);
    return out;
  }
  std::vector<std::exception_ptr> errors(n_workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < queries.size(); i += n_workers) {
            out[i] = index.retrieve(queries[i], k);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace cidret

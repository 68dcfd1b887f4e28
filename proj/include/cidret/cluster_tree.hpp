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
#include <optional>
#include <unordered_map>
#include <vector>

#include "cidret/embed.hpp"
#include "cidret/types.hpp"

namespace cidret {

// query id -> relevant doc ids
using Qrels = std::map<std::string, std::vector<DocId>>;

struct ClusterNode {
  int label = 0;  // 1..k among siblings; 0 for the root
  Vector centroid;
  std::vector<std::size_t> children;  // indices into ClusterTree::nodes()

  // Leaves only. `members` is fixed at build time; `added` collects documents
  // assigned later by nearest-centroid descent.
  std::vector<DocId> members;
  std::vector<DocId> added;
  Cid cid;

  bool is_leaf() const noexcept { return children.empty(); }
  std::size_t size() const noexcept { return members.size() + added.size(); }
};

struct TreeParams {
  int k = 30;                    // branching factor
  int expected_clusters = 5000;  // target leaf count driving the threshold c
  std::uint64_t seed = 0;
  std::optional<int> c;          // overrides the adaptive threshold when set
  int max_iterations = 50;
};

// ceil(corpus_size / expected_clusters), never below 2.
int compute_c(std::size_t corpus_size, int expected_clusters);

// Hierarchical k-means tree. Nodes are stored in preorder; node 0 is the root.
class ClusterTree {
 public:
  ClusterTree() = default;

  const std::vector<ClusterNode>& nodes() const noexcept { return nodes_; }
  const ClusterNode& node(std::size_t i) const { return nodes_.at(i); }
  const ClusterNode& root() const { return nodes_.at(0); }

  int k() const noexcept { return k_; }
  int c() const noexcept { return c_; }
  int expected_clusters() const noexcept { return expected_clusters_; }
  std::uint64_t seed() const noexcept { return seed_; }
  int dim() const noexcept { return dim_; }

  std::vector<std::size_t> leaves() const;
  std::size_t leaf_count() const;
  std::vector<Cid> cids() const;
  std::size_t doc_count() const noexcept { return doc_leaf_.size(); }

  // Throws UnknownDoc.
  const Cid& cid_of(const DocId& id) const;
  bool contains(const DocId& id) const { return doc_leaf_.count(id) != 0; }
  std::unordered_map<DocId, Cid> cid_map() const;

  // Node reached by following sibling labels from the root, if any.
  std::optional<std::size_t> find_node(const Digits& labels) const;
  // Leaf identified by a complete CID; throws UnknownCid.
  std::size_t leaf_index(const Cid& cid) const;

  // Appends a document to a leaf's `added` list. Centroids, labels, and
  // existing members are untouched. Throws DuplicateId / UnknownCid.
  void append_member(const Cid& cid, const DocId& id);

  // tree.json (structure, labels, build-time members, parameters) plus a
  // centroid blob with one f32 row per node in preorder. Added members are
  // stored separately so tree.json stays fixed across insertions.
  void save(const std::filesystem::path& tree_json,
            const std::filesystem::path& centroids_bin) const;
  void save_added(const std::filesystem::path& added_json) const;
  static ClusterTree load(const std::filesystem::path& tree_json,
                          const std::filesystem::path& centroids_bin);
  void load_added(const std::filesystem::path& added_json);

 private:
  friend ClusterTree build_cluster_tree(const EmbeddingStore&, const TreeParams&);

  void index_leaves();

  std::vector<ClusterNode> nodes_;
  int k_ = 0;
  int c_ = 0;
  int expected_clusters_ = 0;
  std::uint64_t seed_ = 0;
  int dim_ = 0;
  std::unordered_map<DocId, std::size_t> doc_leaf_;
  std::map<Cid, std::size_t> cid_leaf_;
};

// Recursive k-means over the store's vectors in insertion order. A child
// cluster with at least c members is clustered again, otherwise it becomes a
// leaf and its documents get the terminal digit. A child that holds every
// point of its parent (k-means could not split) is also made a leaf.
// The k-means seed of a node is derive_seed(parent seed, label), starting
// from params.seed at the root. Throws EmptyCorpus.
ClusterTree build_cluster_tree(const EmbeddingStore& embeddings,
                               const TreeParams& params);

// Stored CID of a build-set or added document. Throws UnknownDoc.
inline const Cid& assign_cid(const ClusterTree& tree, const DocId& id) {
  return tree.cid_of(id);
}

// Greedy descent by maximum inner product with child centroids (ties go to
// the smaller label). Read-only. Throws DimMismatch.
Cid assign_new_document(const ClusterTree& tree, const Vector& embedding);

// |LCP(a, b)| / |a|, terminal digit included in both.
double prefix_overlap_pair(const Cid& a, const Cid& b);

// Mean over queries of the mean over all ordered pairs of relevant documents
// of prefix_overlap_pair. Queries without relevant documents are skipped.
// Throws MissingCid.
double mean_prefix_overlap(const Qrels& qrels,
                           const std::unordered_map<DocId, Cid>& cids);

}  // namespace cidret

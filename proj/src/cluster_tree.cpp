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

#include "cidret/cluster_tree.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "cidret/binary_io.hpp"
#include "cidret/error.hpp"
#include "cidret/kmeans.hpp"

namespace cidret {

using nlohmann::json;

int compute_c(std::size_t corpus_size, int expected_clusters) {
  if (corpus_size == 0 || expected_clusters < 1) {
    throw Error(ErrorKind::kBadArgument, "compute_c needs positive inputs");
  }
  const auto e = static_cast<std::size_t>(expected_clusters);
  const auto c = (corpus_size + e - 1) / e;
  return static_cast<int>(std::max<std::size_t>(c, 2));
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& points, const std::vector<DocId>& ids, int k, int c,
              int max_iterations, std::vector<ClusterNode>& nodes)
      : points_(points), ids_(ids), k_(k), c_(c),
        max_iterations_(max_iterations), nodes_(nodes) {}

  void expand(std::size_t parent, const std::vector<Eigen::Index>& subset,
              std::uint64_t seed, const Digits& prefix) {
    Matrix sub(points_.rows(), static_cast<Eigen::Index>(subset.size()));
    for (std::size_t i = 0; i < subset.size(); ++i) {
      sub.col(static_cast<Eigen::Index>(i)) = points_.col(subset[i]);
    }
    const auto km = kmeans(sub, k_, seed, max_iterations_);

    std::vector<std::vector<Eigen::Index>> groups(
        static_cast<std::size_t>(km.cluster_count()));
    for (std::size_t i = 0; i < subset.size(); ++i) {
      groups[static_cast<std::size_t>(km.assignment[i])].push_back(subset[i]);
    }

    for (int g = 0; g < km.cluster_count(); ++g) {
      const int label = g + 1;
      auto& members = groups[static_cast<std::size_t>(g)];
      ClusterNode child;
      child.label = label;
      child.centroid = km.centroids.col(g);
      round_to_f32(child.centroid);
      const std::size_t idx = nodes_.size();
      nodes_.push_back(std::move(child));
      nodes_[parent].children.push_back(idx);

      Digits path = prefix;
      path.push_back(label);
      const auto count = static_cast<Eigen::Index>(members.size());
      if (count >= c_ && members.size() < subset.size()) {
        expand(idx, members, derive_seed(seed, static_cast<std::uint64_t>(label)), path);
      } else {
        auto& leaf = nodes_[idx];
        leaf.members.reserve(members.size());
        for (auto m : members) leaf.members.push_back(ids_[static_cast<std::size_t>(m)]);
        path.push_back(kTerminalDigit);
        leaf.cid = Cid(std::move(path));
      }
    }
  }

 private:
  const Matrix& points_;
  const std::vector<DocId>& ids_;
  int k_;
  int c_;
  int max_iterations_;
  std::vector<ClusterNode>& nodes_;
};

void assign_cids(std::vector<ClusterNode>& nodes, std::size_t at, Digits& path) {
  auto& n = nodes[at];
  if (n.is_leaf()) {
    Digits d = path;
    d.push_back(kTerminalDigit);
    n.cid = Cid(std::move(d));
    return;
  }
  const auto children = n.children;
  for (auto ch : children) {
    path.push_back(nodes[ch].label);
    assign_cids(nodes, ch, path);
    path.pop_back();
  }
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParseError, path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << j.dump(1) << '\n';
}

}  // namespace

ClusterTree build_cluster_tree(const EmbeddingStore& embeddings,
                               const TreeParams& params) {
  if (embeddings.size() == 0) throw Error(ErrorKind::kEmptyCorpus, "no documents");
  if (params.k < 1) throw Error(ErrorKind::kBadArgument, "k must be >= 1");

  ClusterTree tree;
  tree.k_ = params.k;
  tree.expected_clusters_ = params.expected_clusters;
  tree.c_ = params.c ? *params.c : compute_c(embeddings.size(), params.expected_clusters);
  tree.seed_ = params.seed;
  tree.dim_ = embeddings.dim();

  const Matrix points = embeddings.as_matrix();
  ClusterNode root;
  root.centroid = points.rowwise().mean();
  round_to_f32(root.centroid);
  tree.nodes_.push_back(std::move(root));

  std::vector<Eigen::Index> all(static_cast<std::size_t>(points.cols()));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<Eigen::Index>(i);
  TreeBuilder(points, embeddings.ids(), tree.k_, tree.c_, params.max_iterations,
              tree.nodes_)
      .expand(0, all, params.seed, {});
  tree.index_leaves();
  return tree;
}

void ClusterTree::index_leaves() {
  doc_leaf_.clear();
  cid_leaf_.clear();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (!n.is_leaf()) continue;
    cid_leaf_.emplace(n.cid, i);
    for (const auto& m : n.members) doc_leaf_.emplace(m, i);
    for (const auto& m : n.added) doc_leaf_.emplace(m, i);
  }
}

std::vector<std::size_t> ClusterTree::leaves() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].is_leaf() && i != 0) out.push_back(i);
  }
  return out;
}

std::size_t ClusterTree::leaf_count() const { return cid_leaf_.size(); }

std::vector<Cid> ClusterTree::cids() const {
  std::vector<Cid> out;
  out.reserve(cid_leaf_.size());
  for (const auto& [cid, idx] : cid_leaf_) out.push_back(cid);
  return out;
}

const Cid& ClusterTree::cid_of(const DocId& id) const {
  auto it = doc_leaf_.find(id);
  if (it == doc_leaf_.end()) throw Error(ErrorKind::kUnknownDoc, id);
  return nodes_[it->second].cid;
}

std::unordered_map<DocId, Cid> ClusterTree::cid_map() const {
  std::unordered_map<DocId, Cid> out;
  out.reserve(doc_leaf_.size());
  for (const auto& [id, leaf] : doc_leaf_) out.emplace(id, nodes_[leaf].cid);
  return out;
}

std::optional<std::size_t> ClusterTree::find_node(const Digits& labels) const {
  if (nodes_.empty()) return std::nullopt;
  std::size_t at = 0;
  for (int label : labels) {
    const auto& children = nodes_[at].children;
    auto it = std::find_if(children.begin(), children.end(),
                           [&](std::size_t ch) { return nodes_[ch].label == label; });
    if (it == children.end()) return std::nullopt;
    at = *it;
  }
  return at;
}

std::size_t ClusterTree::leaf_index(const Cid& cid) const {
  auto it = cid_leaf_.find(cid);
  if (it == cid_leaf_.end()) throw Error(ErrorKind::kUnknownCid, cid.str());
  return it->second;
}

void ClusterTree::append_member(const Cid& cid, const DocId& id) {
  if (doc_leaf_.count(id)) throw Error(ErrorKind::kDuplicateId, id);
  const auto leaf = leaf_index(cid);
  nodes_[leaf].added.push_back(id);
  doc_leaf_.emplace(id, leaf);
}

void ClusterTree::save(const std::filesystem::path& tree_json,
                       const std::filesystem::path& centroids_bin) const {
  json nodes = json::array();
  Matrix centroids(dim_, static_cast<Eigen::Index>(nodes_.size()));
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    nodes.push_back({{"label", n.label}, {"children", n.children}, {"members", n.members}});
    centroids.col(static_cast<Eigen::Index>(i)) = n.centroid;
  }
  json j{{"k", k_},
         {"c", c_},
         {"expected_clusters", expected_clusters_},
         {"seed", seed_},
         {"dim", dim_},
         {"nodes", std::move(nodes)}};
  write_json(tree_json, j);
  write_f32_rows(centroids_bin, centroids);
}

void ClusterTree::save_added(const std::filesystem::path& added_json) const {
  json leaves = json::array();
  for (const auto& n : nodes_) {
    if (n.is_leaf() && !n.added.empty()) {
      leaves.push_back({{"cid", n.cid.digits()}, {"ids", n.added}});
    }
  }
  write_json(added_json, json{{"added", std::move(leaves)}});
}

ClusterTree ClusterTree::load(const std::filesystem::path& tree_json,
                              const std::filesystem::path& centroids_bin) {
  const json j = read_json(tree_json);
  ClusterTree tree;
  try {
    tree.k_ = j.at("k").get<int>();
    tree.c_ = j.at("c").get<int>();
    tree.expected_clusters_ = j.at("expected_clusters").get<int>();
    tree.seed_ = j.at("seed").get<std::uint64_t>();
    tree.dim_ = j.at("dim").get<int>();
    for (const auto& jn : j.at("nodes")) {
      ClusterNode n;
      n.label = jn.at("label").get<int>();
      n.children = jn.at("children").get<std::vector<std::size_t>>();
      n.members = jn.at("members").get<std::vector<DocId>>();
      tree.nodes_.push_back(std::move(n));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParseError, tree_json.string() + ": " + e.what());
  }
  const Matrix centroids = read_f32_rows(centroids_bin, tree.dim_);
  if (static_cast<std::size_t>(centroids.cols()) != tree.nodes_.size() ||
      tree.nodes_.empty()) {
    throw Error(ErrorKind::kParseError, centroids_bin.string() +
                                            ": centroid count does not match tree");
  }
  for (std::size_t i = 0; i < tree.nodes_.size(); ++i) {
    for (auto ch : tree.nodes_[i].children) {
      if (ch <= i || ch >= tree.nodes_.size()) {
        throw Error(ErrorKind::kParseError, tree_json.string() + ": bad child index");
      }
    }
    tree.nodes_[i].centroid = centroids.col(static_cast<Eigen::Index>(i));
  }
  Digits path;
  assign_cids(tree.nodes_, 0, path);
  tree.index_leaves();
  return tree;
}

void ClusterTree::load_added(const std::filesystem::path& added_json) {
  const json j = read_json(added_json);
  try {
    for (const auto& leaf : j.at("added")) {
      const Cid cid(leaf.at("cid").get<Digits>());
      for (const auto& id : leaf.at("ids").get<std::vector<DocId>>()) {
        append_member(cid, id);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParseError, added_json.string() + ": " + e.what());
  }
}

Cid assign_new_document(const ClusterTree& tree, const Vector& embedding) {
  if (embedding.size() != tree.dim()) {
    throw Error(ErrorKind::kDimMismatch, "embedding dim " +
                                             std::to_string(embedding.size()) +
                                             " vs tree dim " + std::to_string(tree.dim()));
  }
  std::size_t at = 0;
  while (!tree.node(at).is_leaf()) {
    const auto& children = tree.node(at).children;
    std::size_t best = children.front();
    double best_score = tree.node(best).centroid.dot(embedding);
    for (std::size_t i = 1; i < children.size(); ++i) {
      const double s = tree.node(children[i]).centroid.dot(embedding);
      if (s > best_score) {
        best_score = s;
        best = children[i];
      }
    }
    at = best;
  }
  return tree.node(at).cid;
}

double prefix_overlap_pair(const Cid& a, const Cid& b) {
  if (a.size() == 0) return 0.0;
  std::size_t lcp = 0;
  while (lcp < a.size() && lcp < b.size() && a[lcp] == b[lcp]) ++lcp;
  return static_cast<double>(lcp) / static_cast<double>(a.size());
}

double mean_prefix_overlap(const Qrels& qrels,
                           const std::unordered_map<DocId, Cid>& cids) {
  double total = 0.0;
  std::size_t queries = 0;
  for (const auto& [qid, relevant] : qrels) {
    if (relevant.empty()) continue;
    std::vector<const Cid*> rel;
    rel.reserve(relevant.size());
    for (const auto& id : relevant) {
      auto it = cids.find(id);
      if (it == cids.end()) {
        throw Error(ErrorKind::kMissingCid, "query '" + qid + "' doc '" + id + "'");
      }
      rel.push_back(&it->second);
    }
    double sum = 0.0;
    for (const Cid* a : rel) {
      for (const Cid* b : rel) sum += prefix_overlap_pair(*a, *b);
    }
    total += sum / static_cast<double>(rel.size() * rel.size());
    ++queries;
  }
  return queries ? total / static_cast<double>(queries) : 0.0;
}

}  // namespace cidret

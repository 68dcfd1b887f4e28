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

#include "cidret/intra_matcher.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <unordered_set>

#include <json.hpp>

#include "cidret/binary_io.hpp"
#include "cidret/kmeans.hpp"

namespace cidret {

IntraScore intra_score(const Vector& query, const Vector& doc) {
  if (query.size() != doc.size()) {
    throw Error(ErrorKind::kDimMismatch, std::to_string(query.size()) + " vs " +
                                             std::to_string(doc.size()));
  }
  IntraScore s;
  s.sim = query.dot(doc);
  s.s_intra = sigmoid(s.sim);
  return s;
}

std::vector<IntraScore> rank_within_cluster(const Vector& query, const ClusterTree& tree,
                                            const EmbeddingStore& embeddings,
                                            const Cid& cid, int m) {
  if (m < 1) throw Error(ErrorKind::kBadArgument, "m must be >= 1");
  const auto& leaf = tree.node(tree.leaf_index(cid));
  std::vector<IntraScore> scored;
  scored.reserve(leaf.size());
  auto score = [&](const DocId& id) {
    auto s = intra_score(query, embeddings.at(id));
    s.doc_id = id;
    scored.push_back(std::move(s));
  };
  for (const auto& id : leaf.members) score(id);
  for (const auto& id : leaf.added) score(id);

  const auto keep = std::min(scored.size(), static_cast<std::size_t>(m));
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end(), [](const IntraScore& a, const IntraScore& b) {
                      if (a.s_intra != b.s_intra) return a.s_intra > b.s_intra;
                      return a.doc_id < b.doc_id;
                    });
  scored.resize(keep);
  return scored;
}

namespace {

std::vector<DocId> in_batch(const TrainingPair& pair, std::span<const TrainingPair> batch) {
  std::vector<DocId> out;
  std::unordered_set<DocId> seen;
  for (const auto& other : batch) {
    const auto& id = other.positive_doc_id;
    if (pair.relevant.count(id) || id == pair.positive_doc_id) continue;
    if (seen.insert(id).second) out.push_back(id);
  }
  return out;
}

std::vector<DocId> draw(std::vector<DocId> eligible, int n, std::uint64_t seed) {
  std::vector<DocId> out;
  if (n <= 0 || eligible.empty()) return out;
  std::mt19937_64 rng(seed);
  std::sample(eligible.begin(), eligible.end(), std::back_inserter(out),
              static_cast<std::size_t>(n), rng);
  return out;
}

bool is_relevant(const TrainingPair& pair, const DocId& id) {
  return id == pair.positive_doc_id || pair.relevant.count(id) != 0;
}

}  // namespace

NegativeSet sample_negatives(const TrainingPair& pair, const ClusterTree& tree,
                             std::span<const TrainingPair> batch, int n_a,
                             std::uint64_t seed) {
  const auto& leaf = tree.node(tree.leaf_index(tree.cid_of(pair.positive_doc_id)));
  std::vector<DocId> eligible;
  for (const auto* list : {&leaf.members, &leaf.added}) {
    for (const auto& id : *list) {
      if (!is_relevant(pair, id)) eligible.push_back(id);
    }
  }
  return {draw(std::move(eligible), n_a, seed), in_batch(pair, batch)};
}

NegativeSet sample_random_negatives(const TrainingPair& pair,
                                    std::span<const DocId> pool,
                                    std::span<const TrainingPair> batch, int n_a,
                                    std::uint64_t seed) {
  std::vector<DocId> eligible;
  for (const auto& id : pool) {
    if (!is_relevant(pair, id)) eligible.push_back(id);
  }
  return {draw(std::move(eligible), n_a, seed), in_batch(pair, batch)};
}

void LinearAdapter::save(const std::filesystem::path& bin,
                         const std::filesystem::path& meta) const {
  write_f32_rows(bin, weight_.transpose());
  std::ofstream out(meta, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + meta.string());
  out << nlohmann::json{{"dim", dim()}, {"seed", seed}, {"epochs", epochs}}.dump(2) << '\n';
}

LinearAdapter LinearAdapter::load(const std::filesystem::path& bin,
                                  const std::filesystem::path& meta) {
  std::ifstream in(meta);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + meta.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParseError, meta.string() + ": " + e.what());
  }
  const int dim = j.value("dim", 0);
  Matrix rows = read_f32_rows(bin, dim);
  if (rows.cols() != dim) {
    throw Error(ErrorKind::kParseError, bin.string() + ": expected a square matrix");
  }
  LinearAdapter a(Matrix(rows.transpose()));
  a.seed = j.value("seed", std::uint64_t{0});
  a.epochs = j.value("epochs", 0);
  return a;
}

namespace {

struct PreparedPair {
  Vector query;
  Vector positive;
  Matrix intra;
  Matrix inter;
};

Matrix gather(const EmbeddingStore& store, const std::vector<DocId>& ids) {
  Matrix m(store.dim(), static_cast<Eigen::Index>(ids.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    m.col(static_cast<Eigen::Index>(i)) = store.at(ids[i]);
  }
  return m;
}

// Mean loss over the prepared pairs and, optionally, its gradient w.r.t. W.
double objective(const Matrix& w, std::span<const PreparedPair> pairs, double gamma,
                 Matrix* grad) {
  double total = 0.0;
  if (grad) grad->setZero(w.rows(), w.cols());
  for (const auto& p : pairs) {
    const Vector q = w * p.query;
    const auto r = intra_loss<double>(q, p.positive, p.intra, p.inter, gamma);
    total += r.loss;
    if (grad) grad->noalias() += r.grad_query * p.query.transpose();
  }
  const auto n = static_cast<double>(pairs.size());
  if (grad) *grad /= n;
  return total / n;
}

}  // namespace

AdapterTrainingReport train_adapter(std::span<const TrainingPair> pairs,
                                    const ClusterTree& tree,
                                    const EmbeddingStore& embeddings,
                                    const Embedder& embedder,
                                    const AdapterTrainingOptions& options) {
  if (pairs.empty()) throw Error(ErrorKind::kBadArgument, "no training pairs");
  if (options.batch_size < 1) throw Error(ErrorKind::kBadArgument, "batch_size must be >= 1");

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(derive_seed(options.seed, 0));
  std::shuffle(order.begin(), order.end(), rng);

  const auto batch_size = static_cast<std::size_t>(options.batch_size);
  std::vector<std::vector<PreparedPair>> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const auto stop = std::min(order.size(), start + batch_size);
    std::vector<TrainingPair> batch;
    for (std::size_t i = start; i < stop; ++i) batch.push_back(pairs[order[i]]);
    std::vector<PreparedPair> prepared;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto& pair = batch[i];
      const auto negs = sample_negatives(pair, tree, batch, options.n_a,
                                         derive_seed(options.seed, 1 + start + i));
      prepared.push_back({embedder.embed(tokenize(pair.query_text)),
                          embeddings.at(pair.positive_doc_id), gather(embeddings, negs.intra),
                          gather(embeddings, negs.inter)});
    }
    batches.push_back(std::move(prepared));
  }

  auto full_objective = [&](const Matrix& w) {
    double total = 0.0;
    for (const auto& b : batches) {
      total += objective(w, b, options.gamma, nullptr) * static_cast<double>(b.size());
    }
    return total / static_cast<double>(pairs.size());
  };

  AdapterTrainingReport report;
  Matrix w = Matrix::Identity(embeddings.dim(), embeddings.dim());
  report.initial_loss = full_objective(w);
  if (!std::isfinite(report.initial_loss)) {
    throw Error(ErrorKind::kDivergedLoss, "initial loss is not finite");
  }
  Matrix grad;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    for (const auto& b : batches) {
      objective(w, b, options.gamma, &grad);
      w -= options.learning_rate * grad;
    }
    const double loss = full_objective(w);
    if (!std::isfinite(loss) || !w.allFinite()) {
      throw Error(ErrorKind::kDivergedLoss, "epoch " + std::to_string(epoch + 1));
    }
    report.epoch_losses.push_back(loss);
  }
  round_to_f32(w);
  report.adapter = LinearAdapter(std::move(w));
  report.adapter.seed = options.seed;
  report.adapter.epochs = options.epochs;
  return report;
}

}  // namespace cidret

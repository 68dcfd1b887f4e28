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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "cidret/cluster_tree.hpp"
#include "cidret/corpus.hpp"
#include "cidret/embed.hpp"
#include "cidret/error.hpp"
#include "cidret/types.hpp"

namespace cidret {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct IntraScore {
  DocId doc_id;
  double sim = 0.0;      // inner product
  double s_intra = 0.5;  // sigmoid(sim)
};

// Throws DimMismatch.
IntraScore intra_score(const Vector& query, const Vector& doc);

// Top min(m, cluster size) members of the leaf `cid` by s_intra, descending,
// ties by doc id. Covers build-time and added members. Throws UnknownCid.
std::vector<IntraScore> rank_within_cluster(const Vector& query, const ClusterTree& tree,
                                            const EmbeddingStore& embeddings,
                                            const Cid& cid, int m);

struct NegativeSet {
  std::vector<DocId> intra;  // same-cluster negatives
  std::vector<DocId> inter;  // in-batch negatives
};

// Cluster-adaptive sampling: up to n_a members of the positive's leaf drawn
// uniformly without replacement, never relevant to the query; plus the
// positives of the batch pairs that are not relevant to the query (deduped,
// batch order).
NegativeSet sample_negatives(const TrainingPair& pair, const ClusterTree& tree,
                             std::span<const TrainingPair> batch, int n_a,
                             std::uint64_t seed);

// Baseline for comparison: the n_a intra negatives come from the whole pool
// instead of the positive's cluster. In-batch negatives as above.
NegativeSet sample_random_negatives(const TrainingPair& pair,
                                    std::span<const DocId> pool,
                                    std::span<const TrainingPair> batch, int n_a,
                                    std::uint64_t seed);

template <typename Scalar>
struct IntraLoss {
  Scalar loss{};
  VectorT<Scalar> grad_query;
  VectorT<Scalar> grad_positive;
  MatrixT<Scalar> grad_intra;  // one column per intra negative
  MatrixT<Scalar> grad_inter;  // one column per in-batch negative
};

// -log( e^{s+} / (e^{s+} + gamma * sum_a e^{s_a} + sum_r e^{s_r}) ) with
// s = <query, doc>, plus analytic gradients. Negatives are matrix columns.
// The log-sum-exp is max-shifted. Throws BadArgument if gamma <= 0.
template <typename Scalar>
IntraLoss<Scalar> intra_loss(const VectorT<Scalar>& query, const VectorT<Scalar>& positive,
                             const MatrixT<Scalar>& intra_negatives,
                             const MatrixT<Scalar>& inter_negatives, Scalar gamma) {
  using std::exp;
  using std::log;
  if (!(gamma > Scalar(0))) throw Error(ErrorKind::kBadArgument, "gamma must be > 0");
  const auto dim = query.size();
  if (positive.size() != dim ||
      (intra_negatives.cols() > 0 && intra_negatives.rows() != dim) ||
      (inter_negatives.cols() > 0 && inter_negatives.rows() != dim)) {
    throw Error(ErrorKind::kDimMismatch, "intra_loss operand dimensions differ");
  }

  const Scalar s_pos = query.dot(positive);
  VectorT<Scalar> t_intra(intra_negatives.cols());
  VectorT<Scalar> t_inter(inter_negatives.cols());
  if (intra_negatives.cols() > 0) {
    t_intra = (intra_negatives.transpose() * query).array() + log(gamma);
  }
  if (inter_negatives.cols() > 0) t_inter = inter_negatives.transpose() * query;

  Scalar shift = s_pos;
  if (t_intra.size() > 0) shift = std::max(shift, t_intra.maxCoeff());
  if (t_inter.size() > 0) shift = std::max(shift, t_inter.maxCoeff());
  const Scalar w_pos_raw = exp(s_pos - shift);
  const VectorT<Scalar> w_intra = (t_intra.array() - shift).exp().matrix();
  const VectorT<Scalar> w_inter = (t_inter.array() - shift).exp().matrix();
  const Scalar z = w_pos_raw + w_intra.sum() + w_inter.sum();

  IntraLoss<Scalar> out;
  out.loss = shift + log(z) - s_pos;

  // softmax weights; d loss / d s_pos = w_pos - 1, d loss / d s_neg = w_neg
  const Scalar g_pos = w_pos_raw / z - Scalar(1);
  const VectorT<Scalar> g_intra = w_intra / z;
  const VectorT<Scalar> g_inter = w_inter / z;

  out.grad_query = g_pos * positive;
  if (g_intra.size() > 0) out.grad_query += intra_negatives * g_intra;
  if (g_inter.size() > 0) out.grad_query += inter_negatives * g_inter;
  out.grad_positive = g_pos * query;
  out.grad_intra = query * g_intra.transpose();
  out.grad_inter = query * g_inter.transpose();
  return out;
}

// Query-side linear map applied before similarity. Identity by default.
class LinearAdapter {
 public:
  LinearAdapter() = default;
  explicit LinearAdapter(int dim) : weight_(Matrix::Identity(dim, dim)) {}
  explicit LinearAdapter(Matrix weight) : weight_(std::move(weight)) {}

  const Matrix& weight() const noexcept { return weight_; }
  Matrix& weight() noexcept { return weight_; }
  int dim() const noexcept { return static_cast<int>(weight_.rows()); }
  Vector apply(const Vector& q) const { return weight_ * q; }

  std::uint64_t seed = 0;
  int epochs = 0;

  // `bin` is the row-major f32 matrix; `meta` is {"dim", "seed", "epochs"}.
  void save(const std::filesystem::path& bin, const std::filesystem::path& meta) const;
  static LinearAdapter load(const std::filesystem::path& bin,
                            const std::filesystem::path& meta);

 private:
  Matrix weight_;
};

struct AdapterTrainingOptions {
  double gamma = 2.0;
  int n_a = 4;
  int epochs = 20;
  double learning_rate = 0.5;
  int batch_size = 32;
  std::uint64_t seed = 0;
};

struct AdapterTrainingReport {
  LinearAdapter adapter;
  double initial_loss = 0.0;        // mean loss before any update
  std::vector<double> epoch_losses;  // mean loss after each epoch
};

// Gradient descent on the mean intra-cluster loss with the query replaced by
// W q. Document embeddings stay frozen. Pairs are shuffled once into fixed
// batches and negatives are drawn once per pair, so the objective is fixed
// and every run with the same seed is identical. W is rounded to f32 at the
// end. Throws BadArgument for an empty pair list and DivergedLoss when the
// loss stops being finite.
AdapterTrainingReport train_adapter(std::span<const TrainingPair> pairs,
                                    const ClusterTree& tree,
                                    const EmbeddingStore& embeddings,
                                    const Embedder& embedder,
                                    const AdapterTrainingOptions& options);

}  // namespace cidret

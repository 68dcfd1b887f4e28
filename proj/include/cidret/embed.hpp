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
#include <optional>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cidret/text.hpp"
#include "cidret/types.hpp"

namespace cidret {

// Pooled query vector plus optional per-token rows. The default scorers only
// read `pooled`.
struct QueryRepresentation {
  Vector pooled;
  std::optional<Matrix> token_features;  // one row per token when present
};

// Signed feature hashing of unigrams and bigrams into `dim` buckets, then L2
// normalization. Pure: equal inputs give bitwise-equal output.
// Throws EmptyText for an empty token list and BadDim for dim < 8.
Vector hash_embed(const Tokens& tokens, int dim, std::uint64_t seed);
Vector hash_embed(std::string_view text, int dim, std::uint64_t seed);

// Embedder contract. Implementations must be callable concurrently.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual int dim() const = 0;
  virtual Vector embed(const Tokens& tokens) const = 0;

  virtual QueryRepresentation embed_query(const Tokens& tokens) const {
    return {embed(tokens), std::nullopt};
  }
};

class HashEmbedder final : public Embedder {
 public:
  HashEmbedder(int dim, std::uint64_t seed);

  int dim() const override { return dim_; }
  Vector embed(const Tokens& tokens) const override {
    return hash_embed(tokens, dim_, seed_);
  }

 private:
  int dim_;
  std::uint64_t seed_;
};

// Append-only id -> vector store. Stored vectors are rounded to f32 on insert
// so that the sidecar files reproduce them exactly.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(int dim = 0) : dim_(dim) {}

  // Throws DuplicateId, DimMismatch, or BadArgument for non-finite values.
  void add(const DocId& id, Vector v);

  bool contains(const DocId& id) const { return index_.count(id) != 0; }
  // Throws UnknownDoc.
  const Vector& at(const DocId& id) const;

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return ids_.size(); }
  const std::vector<DocId>& ids() const noexcept { return ids_; }
  const Vector& row(std::size_t i) const { return vectors_[i]; }

  // Columns in insertion order.
  Matrix as_matrix() const;

  // Sidecar: `bin` holds f32 rows, `manifest` is {"dim": d, "ids": [...]}.
  void save(const std::filesystem::path& bin,
            const std::filesystem::path& manifest) const;
  static EmbeddingStore load(const std::filesystem::path& bin,
                             const std::filesystem::path& manifest);

 private:
  int dim_;
  std::vector<DocId> ids_;
  std::vector<Vector> vectors_;
  std::unordered_map<DocId, std::size_t> index_;
};

}  // namespace cidret

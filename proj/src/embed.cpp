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

#include "cidret/embed.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "cidret/binary_io.hpp"
#include "cidret/error.hpp"

namespace cidret {

namespace {

// FNV-1a over the feature string, seeded through the offset basis, followed
// by a splitmix64 finalizer so low bits are well mixed.
std::uint64_t feature_hash(std::string_view kind, std::string_view a,
                           std::string_view b, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ (seed * 0x9e3779b97f4a7c15ULL);
  auto mix = [&h](std::string_view s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
  };
  mix(kind);
  mix(a);
  if (!b.empty()) {
    h ^= 0x1f;  // separator, not a printable character
    h *= 0x100000001b3ULL;
    mix(b);
  }
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebULL;
  h ^= h >> 31;
  return h;
}

void accumulate(Vector& v, std::uint64_t h) {
  const auto bucket = static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(v.size()));
  v[bucket] += (h >> 63) ? -1.0 : 1.0;
}

}  // namespace

Vector hash_embed(const Tokens& tokens, int dim, std::uint64_t seed) {
  if (dim < 8) throw Error(ErrorKind::kBadDim, "dim must be >= 8");
  if (tokens.empty()) throw Error(ErrorKind::kEmptyText, "no tokens to embed");
  Vector v = Vector::Zero(dim);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    accumulate(v, feature_hash("u", tokens[i], {}, seed));
    if (i + 1 < tokens.size()) {
      accumulate(v, feature_hash("b", tokens[i], tokens[i + 1], seed));
    }
  }
  const double norm = v.norm();
  if (norm == 0.0) {
    // every feature cancelled; fall back to a fixed seed-dependent axis
    v[static_cast<Eigen::Index>(feature_hash("z", {}, {}, seed) %
                                static_cast<std::uint64_t>(dim))] = 1.0;
    return v;
  }
  return v / norm;
}

Vector hash_embed(std::string_view text, int dim, std::uint64_t seed) {
  return hash_embed(tokenize(text), dim, seed);
}

HashEmbedder::HashEmbedder(int dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim < 8) throw Error(ErrorKind::kBadDim, "dim must be >= 8");
}

void EmbeddingStore::add(const DocId& id, Vector v) {
  if (index_.count(id)) throw Error(ErrorKind::kDuplicateId, id);
  if (dim_ == 0) dim_ = static_cast<int>(v.size());
  if (v.size() != dim_) {
    throw Error(ErrorKind::kDimMismatch,
                "embedding for '" + id + "' has dim " + std::to_string(v.size()) +
                    ", expected " + std::to_string(dim_));
  }
  if (!v.allFinite()) {
    throw Error(ErrorKind::kBadArgument, "non-finite embedding for '" + id + "'");
  }
  round_to_f32(v);
  index_.emplace(id, ids_.size());
  ids_.push_back(id);
  vectors_.push_back(std::move(v));
}

const Vector& EmbeddingStore::at(const DocId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(ErrorKind::kUnknownDoc, id);
  return vectors_[it->second];
}

Matrix EmbeddingStore::as_matrix() const {
  Matrix m(dim_, static_cast<Eigen::Index>(vectors_.size()));
  for (std::size_t i = 0; i < vectors_.size(); ++i) {
    m.col(static_cast<Eigen::Index>(i)) = vectors_[i];
  }
  return m;
}

void EmbeddingStore::save(const std::filesystem::path& bin,
                          const std::filesystem::path& manifest) const {
  write_f32_rows(bin, as_matrix());
  nlohmann::json j{{"dim", dim_}, {"ids", ids_}};
  std::ofstream out(manifest, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + manifest.string());
  out << j.dump(2) << '\n';
}

EmbeddingStore EmbeddingStore::load(const std::filesystem::path& bin,
                                    const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + manifest.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kParseError, manifest.string() + ": " + e.what());
  }
  if (!j.contains("dim") || !j.contains("ids")) {
    throw Error(ErrorKind::kParseError, manifest.string() + ": needs dim and ids");
  }
  const int dim = j.at("dim").get<int>();
  auto ids = j.at("ids").get<std::vector<DocId>>();
  Matrix m = read_f32_rows(bin, dim);
  if (static_cast<std::size_t>(m.cols()) != ids.size()) {
    throw Error(ErrorKind::kParseError,
                bin.string() + ": row count does not match manifest ids");
  }
  EmbeddingStore store(dim);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    store.add(ids[i], m.col(static_cast<Eigen::Index>(i)));
  }
  return store;
}

}  // namespace cidret

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
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cidret/text.hpp"
#include "cidret/types.hpp"

namespace cidret {

struct Document {
  DocId id;
  std::string text;
  Tokens tokens;

  Document() = default;
  Document(DocId doc_id, std::string raw_text)
      : id(std::move(doc_id)), text(std::move(raw_text)), tokens(tokenize(text)) {}
};

// Ordered document collection with id lookup. Ids are unique.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Document> docs);

  // Throws DuplicateId.
  void add(Document doc);

  bool contains(const DocId& id) const { return index_.count(id) != 0; }
  const Document& at(const DocId& id) const;

  const std::vector<Document>& docs() const noexcept { return docs_; }
  std::size_t size() const noexcept { return docs_.size(); }
  bool empty() const noexcept { return docs_.empty(); }

 private:
  std::vector<Document> docs_;
  std::unordered_map<DocId, std::size_t> index_;
};

// One JSON object per line: {"id": string, "text": string}. Blank lines are
// skipped. Line numbers in ParseError are 1-based physical lines.
Corpus parse_corpus(std::istream& in);
Corpus load_corpus(const std::filesystem::path& path);
void write_corpus(std::ostream& out, const Corpus& corpus);
void save_corpus(const std::filesystem::path& path, const Corpus& corpus);

// Query with its relevance judgments, one JSON object per line:
// {"query_id": string, "query_text": string, "relevant": [doc_id, ...]}.
// "relevant" may be absent for retrieval-only query files.
struct QueryRecord {
  std::string query_id;
  std::string query_text;
  std::vector<DocId> relevant;
};

std::vector<QueryRecord> parse_query_records(std::istream& in);
std::vector<QueryRecord> load_query_records(const std::filesystem::path& path);

struct TrainingPair {
  std::string query_text;
  DocId positive_doc_id;
  // Every document relevant to the query, including the positive. Excluded
  // from negative sampling.
  std::unordered_set<DocId> relevant;
};

// One pair per (query, relevant doc). Throws UnknownDoc if a relevant id is
// not in the corpus.
std::vector<TrainingPair> make_training_pairs(
    const std::vector<QueryRecord>& records, const Corpus& corpus);

// Returns n_spans spans of span_len consecutive terms drawn uniformly from
// the document. Documents with at most span_len terms yield the whole
// document for every span.
std::vector<std::string> augment_queries(const Document& doc, int n_spans,
                                         int span_len, std::uint64_t seed);

}  // namespace cidret

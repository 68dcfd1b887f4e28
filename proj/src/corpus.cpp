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

#include "cidret/corpus.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <random>

#include <json.hpp>

#include "cidret/error.hpp"

namespace cidret {

using nlohmann::json;

Corpus::Corpus(std::vector<Document> docs) {
  docs_.reserve(docs.size());
  for (auto& d : docs) add(std::move(d));
}

void Corpus::add(Document doc) {
  if (index_.count(doc.id)) {
    throw Error(ErrorKind::kDuplicateId, "document id '" + doc.id + "'");
  }
  index_.emplace(doc.id, docs_.size());
  docs_.push_back(std::move(doc));
}

const Document& Corpus::at(const DocId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(ErrorKind::kUnknownDoc, id);
  return docs_[it->second];
}

namespace {

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

json parse_line(const std::string& line, std::size_t line_no) {
  try {
    auto j = json::parse(line);
    if (!j.is_object()) {
      throw Error(ErrorKind::kParseError, "expected a JSON object", line_no);
    }
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParseError, e.what(), line_no);
  }
}

std::string string_field(const json& j, const char* key, std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    throw Error(ErrorKind::kParseError,
                std::string("missing string field \"") + key + "\"", line_no);
  }
  return it->get<std::string>();
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return in;
}

}  // namespace

Corpus parse_corpus(std::istream& in) {
  Corpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    auto j = parse_line(line, line_no);
    Document doc(string_field(j, "id", line_no), string_field(j, "text", line_no));
    if (doc.tokens.empty()) {
      throw Error(ErrorKind::kParseError, "empty text for '" + doc.id + "'",
                  line_no);
    }
    corpus.add(std::move(doc));
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_corpus(in);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& d : corpus.docs()) {
    out << json{{"id", d.id}, {"text", d.text}}.dump() << '\n';
  }
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  write_corpus(out, corpus);
}

std::vector<QueryRecord> parse_query_records(std::istream& in) {
  std::vector<QueryRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    auto j = parse_line(line, line_no);
    QueryRecord rec;
    rec.query_id = string_field(j, "query_id", line_no);
    rec.query_text = string_field(j, "query_text", line_no);
    if (auto it = j.find("relevant"); it != j.end()) {
      if (!it->is_array()) {
        throw Error(ErrorKind::kParseError, "\"relevant\" must be an array",
                    line_no);
      }
      for (const auto& r : *it) {
        if (!r.is_string()) {
          throw Error(ErrorKind::kParseError, "relevant ids must be strings",
                      line_no);
        }
        rec.relevant.push_back(r.get<std::string>());
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<QueryRecord> load_query_records(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_query_records(in);
}

std::vector<TrainingPair> make_training_pairs(
    const std::vector<QueryRecord>& records, const Corpus& corpus) {
  std::vector<TrainingPair> pairs;
  for (const auto& rec : records) {
    std::unordered_set<DocId> relevant(rec.relevant.begin(), rec.relevant.end());
    for (const auto& id : rec.relevant) {
      if (!corpus.contains(id)) {
        throw Error(ErrorKind::kUnknownDoc,
                    "query '" + rec.query_id + "' references '" + id + "'");
      }
      pairs.push_back({rec.query_text, id, relevant});
    }
  }
  return pairs;
}

std::vector<std::string> augment_queries(const Document& doc, int n_spans,
                                         int span_len, std::uint64_t seed) {
  std::vector<std::string> spans;
  if (n_spans <= 0) return spans;
  if (span_len < 1) throw Error(ErrorKind::kBadArgument, "span_len must be >= 1");
  const auto len = static_cast<std::size_t>(span_len);
  const auto n = doc.tokens.size();
  spans.reserve(static_cast<std::size_t>(n_spans));
  if (n <= len) {
    for (int i = 0; i < n_spans; ++i) spans.push_back(join(doc.tokens, 0, n));
    return spans;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> start(0, n - len);
  for (int i = 0; i < n_spans; ++i) {
    auto s = start(rng);
    spans.push_back(join(doc.tokens, s, s + len));
  }
  return spans;
}

}  // namespace cidret

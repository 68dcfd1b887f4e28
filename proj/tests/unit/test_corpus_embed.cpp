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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <bit>
#include <random>
#include <sstream>

#include "cidret/corpus.hpp"
#include "cidret/embed.hpp"
#include "cidret/error.hpp"
#include "../support/expect_error.hpp"

namespace cidret {
namespace {

using testing::kind_of;

TEST(Tokenize, LowercasesAndSplitsOnWhitespace) {
  EXPECT_EQ(tokenize("  The Cat\tSAT\n"), (Tokens{"the", "cat", "sat"}));
  EXPECT_TRUE(tokenize(" \t ").empty());
}

TEST(HashEmbed, DeterministicBitwise) {
  const Vector a = hash_embed("the cat", 64, 0);
  const Vector b = hash_embed("the cat", 64, 0);
  ASSERT_EQ(a.size(), 64);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(a[i]), std::bit_cast<std::uint64_t>(b[i]));
  }
}

TEST(HashEmbed, UnitNormOnRandomTexts) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> len(1, 60), word(0, 200);
  for (int trial = 0; trial < 200; ++trial) {
    Tokens t;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) t.push_back("w" + std::to_string(word(rng)));
    const int dim = 8 << (trial % 5);
    EXPECT_NEAR(hash_embed(t, dim, trial).norm(), 1.0, 1e-6);
  }
}

TEST(HashEmbed, SeedAndTextChangeOutput) {
  EXPECT_NE(hash_embed("the cat", 64, 0), hash_embed("the cat", 64, 1));
  EXPECT_NE(hash_embed("the cat", 64, 0), hash_embed("cat the", 64, 0));
}

TEST(HashEmbed, Errors) {
  EXPECT_EQ(kind_of([] { hash_embed("", 64, 0); }), ErrorKind::kEmptyText);
  EXPECT_EQ(kind_of([] { hash_embed("a b", 7, 0); }), ErrorKind::kBadDim);
}

TEST(HashEmbed, SharedWordsRaiseSimilarity) {
  const Vector q = hash_embed("red apple pie", 256, 5);
  const Vector near = hash_embed("red apple pie recipe", 256, 5);
  const Vector far = hash_embed("quantum field theory", 256, 5);
  EXPECT_GT(q.dot(near), q.dot(far));
}

TEST(AugmentQueries, SpansAreContiguousAndSized) {
  std::string text;
  for (int i = 0; i < 200; ++i) text += "w" + std::to_string(i) + " ";
  const Document doc("d", text);
  const auto spans = augment_queries(doc, 5, 40, 11);
  ASSERT_EQ(spans.size(), 5u);
  for (const auto& s : spans) {
    const auto t = tokenize(s);
    ASSERT_EQ(t.size(), 40u);
    const int first = std::stoi(t.front().substr(1));
    for (std::size_t i = 0; i < t.size(); ++i) {
      EXPECT_EQ(t[i], "w" + std::to_string(first + static_cast<int>(i)));
    }
  }
  EXPECT_EQ(spans, augment_queries(doc, 5, 40, 11));
}

TEST(AugmentQueries, ShortDocumentIsClamped) {
  const Document doc("d", "one two three four five six seven eight nine ten");
  const auto spans = augment_queries(doc, 3, 40, 0);
  ASSERT_EQ(spans.size(), 3u);
  for (const auto& s : spans) EXPECT_EQ(s, "one two three four five six seven eight nine ten");
  EXPECT_TRUE(augment_queries(doc, 0, 40, 0).empty());
}

TEST(LoadCorpus, ParsesValidLines) {
  std::istringstream in(R"({"id":"a","text":"alpha beta"}
{"id":"b","text":"gamma"}

{"id":"c","text":"Delta EPSILON"}
)");
  const auto corpus = parse_corpus(in);
  ASSERT_EQ(corpus.size(), 3u);
  EXPECT_EQ(corpus.at("c").tokens, (Tokens{"delta", "epsilon"}));
}

TEST(LoadCorpus, DuplicateIdRejected) {
  std::istringstream in(R"({"id":"a","text":"x"}
{"id":"a","text":"y"}
)");
  EXPECT_EQ(kind_of([&] { parse_corpus(in); }), ErrorKind::kDuplicateId);
}

TEST(LoadCorpus, MalformedLineReportsLineNumber) {
  std::istringstream in(R"({"id":"a","text":"x"}
{"id":"b", "text": }
)");
  try {
    parse_corpus(in);
    FAIL() << "expected ParseError";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParseError);
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream missing(R"({"id":"a"})");
  EXPECT_EQ(kind_of([&] { parse_corpus(missing); }), ErrorKind::kParseError);
}

TEST(LoadCorpus, MissingFileIsIoError) {
  EXPECT_EQ(kind_of([] { load_corpus("/nonexistent/corpus.jsonl"); }), ErrorKind::kIo);
}

TEST(EmbeddingStore, SidecarRoundTripIsExact) {
  EmbeddingStore store(16);
  for (int i = 0; i < 5; ++i) store.add("doc" + std::to_string(i), hash_embed("w" + std::to_string(i) + " x", 16, 1));
  const auto dir = std::filesystem::temp_directory_path() / "cidret_sidecar_test";
  std::filesystem::create_directories(dir);
  store.save(dir / "e.bin", dir / "e.json");
  EXPECT_EQ(std::filesystem::file_size(dir / "e.bin"), 5u * 16u * 4u);
  const auto loaded = EmbeddingStore::load(dir / "e.bin", dir / "e.json");
  ASSERT_EQ(loaded.ids(), store.ids());
  for (const auto& id : store.ids()) EXPECT_EQ(loaded.at(id), store.at(id));
  std::filesystem::remove_all(dir);
}

TEST(EmbeddingStore, RejectsDuplicatesAndDimMismatch) {
  EmbeddingStore store(8);
  store.add("a", Vector::Ones(8));
  EXPECT_EQ(kind_of([&] { store.add("a", Vector::Ones(8)); }), ErrorKind::kDuplicateId);
  EXPECT_EQ(kind_of([&] { store.add("b", Vector::Ones(9)); }), ErrorKind::kDimMismatch);
}

TEST(TrainingPairs, UnknownRelevantDocRejected) {
  Corpus corpus({Document("a", "x y")});
  std::vector<QueryRecord> recs{{"q", "x", {"a", "zz"}}};
  EXPECT_EQ(kind_of([&] { make_training_pairs(recs, corpus); }), ErrorKind::kUnknownDoc);
  recs[0].relevant = {"a"};
  const auto pairs = make_training_pairs(recs, corpus);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].positive_doc_id, "a");
}

}  // namespace
}  // namespace cidret

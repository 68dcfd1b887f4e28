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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cidret/cluster_tree.hpp"
#include "cidret/types.hpp"

namespace cidret {

// query id -> ranked doc ids
using RankedResults = std::map<std::string, std::vector<DocId>>;
// query id -> CIDs (predicted clusters or relevant documents' clusters)
using QueryCids = std::map<std::string, std::vector<Cid>>;

// Mean over the result queries of |relevant in top-k| / |relevant|. A query
// with an empty ranking scores 0. Throws MissingQrel when a result query has
// no (or an empty) relevance set.
double recall_at_k(const RankedResults& results, const Qrels& qrels, int k);

// Fraction of result queries with at least one relevant doc in the top k.
double acc_at_k(const RankedResults& results, const Qrels& qrels, int k);

struct PositionError {
  int position = 0;  // 1-based
  std::size_t considered = 0;
  std::size_t errors = 0;

  // Absent when no prediction reached this position on a relevant prefix.
  std::optional<double> rate() const {
    if (considered == 0) return std::nullopt;
    return static_cast<double>(errors) / static_cast<double>(considered);
  }
};

// Pooled over every prediction of every query: among predictions whose first
// position-1 digits form a prefix of some relevant CID, the share whose first
// `position` digits do not. Predictions shorter than `position` are skipped.
PositionError position_error_rate(const QueryCids& predicted, const QueryCids& relevant,
                                  int position);

// Relevant CIDs per query from doc-level qrels. Throws MissingCid.
QueryCids relevant_cids(const Qrels& qrels, const ClusterTree& tree);

struct IndexDiagnostics {
  std::size_t leaf_count = 0;
  std::map<std::size_t, std::size_t> cid_length_histogram;  // length -> leaves
  std::optional<double> prefix_overlap;
};

IndexDiagnostics index_diagnostics(const ClusterTree& tree, const Qrels* qrels = nullptr);

struct EvalReport {
  std::vector<int> ks;
  std::map<int, double> recall;
  std::map<int, double> accuracy;
  std::vector<PositionError> position_errors;
  std::optional<IndexDiagnostics> diagnostics;
  std::size_t query_count = 0;

  std::string to_json() const;
  std::string to_table() const;
};

EvalReport evaluate(const RankedResults& results, const Qrels& qrels,
                    const std::vector<int>& ks);

}  // namespace cidret

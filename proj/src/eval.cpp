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

#include "cidret/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "cidret/error.hpp"

namespace cidret {

namespace {

// Number of distinct relevant documents among the first k results.
std::size_t hits(const std::vector<DocId>& ranked, const std::vector<DocId>& relevant, int k) {
  const std::unordered_set<DocId> rel(relevant.begin(), relevant.end());
  std::unordered_set<DocId> found;
  const auto n = std::min(ranked.size(), static_cast<std::size_t>(std::max(k, 0)));
  for (std::size_t i = 0; i < n; ++i) {
    if (rel.count(ranked[i])) found.insert(ranked[i]);
  }
  return found.size();
}

const std::vector<DocId>& relevant_for(const Qrels& qrels, const std::string& qid) {
  auto it = qrels.find(qid);
  if (it == qrels.end() || it->second.empty()) {
    throw Error(ErrorKind::kMissingQrel, "query '" + qid + "'");
  }
  return it->second;
}

}  // namespace

double recall_at_k(const RankedResults& results, const Qrels& qrels, int k) {
  if (results.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [qid, ranked] : results) {
    const auto& rel = relevant_for(qrels, qid);
    const std::unordered_set<DocId> distinct(rel.begin(), rel.end());
    total += static_cast<double>(hits(ranked, rel, k)) / static_cast<double>(distinct.size());
  }
  return total / static_cast<double>(results.size());
}

double acc_at_k(const RankedResults& results, const Qrels& qrels, int k) {
  if (results.empty()) return 0.0;
  std::size_t hit_queries = 0;
  for (const auto& [qid, ranked] : results) {
    if (hits(ranked, relevant_for(qrels, qid), k) > 0) ++hit_queries;
  }
  return static_cast<double>(hit_queries) / static_cast<double>(results.size());
}

namespace {

bool is_prefix_of_any(const Cid& cid, std::size_t len, const std::vector<Cid>& relevant) {
  for (const auto& r : relevant) {
    if (r.size() < len) continue;
    if (std::equal(cid.digits().begin(), cid.digits().begin() + static_cast<std::ptrdiff_t>(len),
                   r.digits().begin())) {
      return true;
    }
  }
  return false;
}

}  // namespace

PositionError position_error_rate(const QueryCids& predicted, const QueryCids& relevant,
                                  int position) {
  if (position < 1) throw Error(ErrorKind::kBadArgument, "position must be >= 1");
  PositionError out;
  out.position = position;
  const auto pos = static_cast<std::size_t>(position);
  static const std::vector<Cid> kNone;
  for (const auto& [qid, preds] : predicted) {
    auto it = relevant.find(qid);
    const auto& rel = it == relevant.end() ? kNone : it->second;
    for (const auto& p : preds) {
      if (p.size() < pos) continue;
      if (!is_prefix_of_any(p, pos - 1, rel)) continue;
      ++out.considered;
      if (!is_prefix_of_any(p, pos, rel)) ++out.errors;
    }
  }
  return out;
}

QueryCids relevant_cids(const Qrels& qrels, const ClusterTree& tree) {
  QueryCids out;
  for (const auto& [qid, docs] : qrels) {
    auto& cids = out[qid];
    for (const auto& d : docs) {
      if (!tree.contains(d)) throw Error(ErrorKind::kMissingCid, "doc '" + d + "'");
      cids.push_back(tree.cid_of(d));
    }
  }
  return out;
}

IndexDiagnostics index_diagnostics(const ClusterTree& tree, const Qrels* qrels) {
  IndexDiagnostics d;
  d.leaf_count = tree.leaf_count();
  for (const auto& cid : tree.cids()) ++d.cid_length_histogram[cid.size()];
  if (qrels) d.prefix_overlap = mean_prefix_overlap(*qrels, tree.cid_map());
  return d;
}

EvalReport evaluate(const RankedResults& results, const Qrels& qrels,
                    const std::vector<int>& ks) {
  EvalReport r;
  r.ks = ks;
  r.query_count = results.size();
  for (int k : ks) {
    r.recall[k] = recall_at_k(results, qrels, k);
    r.accuracy[k] = acc_at_k(results, qrels, k);
  }
  return r;
}

std::string EvalReport::to_json() const {
  using nlohmann::json;
  json j;
  j["queries"] = query_count;
  json metrics = json::object();
  for (int k : ks) {
    metrics["R@" + std::to_string(k)] = recall.at(k);
    metrics["Acc@" + std::to_string(k)] = accuracy.at(k);
  }
  j["metrics"] = std::move(metrics);
  if (!position_errors.empty()) {
    json pe = json::array();
    for (const auto& p : position_errors) {
      json e{{"position", p.position}, {"considered", p.considered}, {"errors", p.errors}};
      e["rate"] = p.rate() ? json(*p.rate()) : json(nullptr);
      pe.push_back(std::move(e));
    }
    j["position_error_rate"] = std::move(pe);
  }
  if (diagnostics) {
    json hist = json::object();
    for (const auto& [len, n] : diagnostics->cid_length_histogram) {
      hist[std::to_string(len)] = n;
    }
    j["leaf_count"] = diagnostics->leaf_count;
    j["cid_length_histogram"] = std::move(hist);
    j["prefix_overlap"] =
        diagnostics->prefix_overlap ? json(*diagnostics->prefix_overlap) : json(nullptr);
  }
  return j.dump(2);
}

std::string EvalReport::to_table() const {
  std::ostringstream os;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-10s %10s %10s\n", "k", "R@k", "Acc@k");
  os << buf;
  for (int k : ks) {
    std::snprintf(buf, sizeof buf, "%-10d %10.4f %10.4f\n", k, recall.at(k), accuracy.at(k));
    os << buf;
  }
  if (!position_errors.empty()) {
    std::snprintf(buf, sizeof buf, "\n%-10s %10s %10s %10s\n", "position", "considered",
                  "errors", "rate");
    os << buf;
    for (const auto& p : position_errors) {
      if (p.rate()) {
        std::snprintf(buf, sizeof buf, "%-10d %10zu %10zu %10.4f\n", p.position,
                      p.considered, p.errors, *p.rate());
      } else {
        std::snprintf(buf, sizeof buf, "%-10d %10zu %10zu %10s\n", p.position,
                      p.considered, p.errors, "-");
      }
      os << buf;
    }
  }
  if (diagnostics) {
    os << "\nleaf clusters: " << diagnostics->leaf_count << '\n';
    for (const auto& [len, n] : diagnostics->cid_length_histogram) {
      os << "  CID length " << len << ": " << n << '\n';
    }
    if (diagnostics->prefix_overlap) {
      std::snprintf(buf, sizeof buf, "prefix overlap: %.4f\n", *diagnostics->prefix_overlap);
      os << buf;
    }
  }
  return os.str();
}

}  // namespace cidret

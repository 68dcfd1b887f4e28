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

#include "cidret/commands.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cidret/cli_config.hpp"
#include "cidret/corpus.hpp"
#include "cidret/error.hpp"
#include "cidret/eval.hpp"
#include "cidret/pipeline.hpp"

namespace cidret {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Collects explicitly passed tuning flags into a flat JSON object so that
// they can be layered over the config file.
class FlagOverrides {
 public:
  template <typename T>
  void add(CLI::App* app, const std::string& flag, const std::string& key,
           const std::string& help) {
    app->add_option_function<T>(
        flag, [this, key](const T& v) { values_[key] = v; }, help);
  }

  const json& values() const { return values_; }

 private:
  json values_ = json::object();
};

void add_retrieval_flags(CLI::App* app, FlagOverrides& o) {
  o.add<double>(app, "--beta", "beta", "weight of the intra-cluster score");
  o.add<int>(app, "--beam-size", "beam_size", "beam width for cluster decoding");
  o.add<double>(app, "--length-penalty", "length_penalty", "length penalty exponent");
  o.add<int>(app, "--k-clusters", "k_clusters", "clusters recalled per query");
  o.add<double>(app, "--temperature", "temperature", "centroid scorer temperature");
  o.add<double>(app, "--gamma", "gamma", "weight of same-cluster negatives");
}

void add_build_flags(CLI::App* app, FlagOverrides& o) {
  o.add<int>(app, "--expected-clusters", "expected_clusters", "target leaf count");
  o.add<int>(app, "--branching", "branching", "k-means branching factor");
  o.add<int>(app, "--dim", "dim", "hashing embedder dimension");
  o.add<std::uint64_t>(app, "--seed", "seed", "top-level random seed");
}

void add_training_flags(CLI::App* app, FlagOverrides& o) {
  o.add<double>(app, "--gamma", "gamma", "weight of same-cluster negatives");
  o.add<int>(app, "--n-a", "n_a", "same-cluster negatives per pair");
  o.add<int>(app, "--epochs", "epochs", "training epochs");
  o.add<double>(app, "--learning-rate", "learning_rate", "gradient step size");
  o.add<int>(app, "--batch-size", "batch_size", "pairs per batch");
  o.add<int>(app, "--n-spans", "n_spans", "span queries per document");
  o.add<int>(app, "--span-len", "span_len", "terms per span query");
  o.add<std::uint64_t>(app, "--seed", "seed", "top-level random seed");
}

Qrels to_qrels(const std::vector<QueryRecord>& records) {
  Qrels q;
  for (const auto& r : records) {
    auto& rel = q[r.query_id];
    rel.insert(rel.end(), r.relevant.begin(), r.relevant.end());
  }
  return q;
}

json cid_json(const Cid& c) { return c.digits(); }

json result_json(const std::string& qid, const RetrievalResult& r) {
  json clusters = json::array();
  for (const auto& h : r.clusters) {
    clusters.push_back({{"cid", cid_json(h.cid)}, {"log_prob", h.log_prob}, {"s_inter", h.s_inter}});
  }
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"doc_id", e.doc_id},
                       {"cid", cid_json(e.cid)},
                       {"s_inter", e.s_inter},
                       {"s_intra", e.s_intra},
                       {"s_overall", e.s_overall}});
  }
  return json{{"query_id", qid}, {"clusters", std::move(clusters)}, {"results", std::move(entries)}};
}

struct ParsedResults {
  RankedResults ranked;
  QueryCids clusters;
};

ParsedResults load_results(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  ParsedResults out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const auto qid = j.at("query_id").get<std::string>();
      auto& ranked = out.ranked[qid];
      for (const auto& e : j.at("results")) ranked.push_back(e.at("doc_id").get<DocId>());
      if (j.contains("clusters")) {
        auto& cids = out.clusters[qid];
        for (const auto& c : j.at("clusters")) cids.emplace_back(c.at("cid").get<Digits>());
      }
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kParseError, path.string() + ": " + e.what(), line_no);
    }
  }
  return out;
}

json load_config_file(const std::string& path) {
  return path.empty() ? json::object() : read_flat_json(path);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << text;
}

// --- build-index ---------------------------------------------------------

struct BuildArgs {
  std::string corpus, out, config, qrels, doc_embeddings, doc_manifest;
  FlagOverrides flags;
};

int cmd_build_index(BuildArgs& a, std::ostream& out) {
  if (!fs::exists(a.corpus)) throw Error(ErrorKind::kIo, "corpus file not found: " + a.corpus);
  const CliConfig cfg = resolve_config(load_config_file(a.config), a.flags.values());
  Corpus corpus = load_corpus(a.corpus);
  IndexConfig ic = cfg.index;
  auto index = [&] {
    if (!a.doc_embeddings.empty()) {
      ic.external_embeddings = true;
      return RetrievalIndex::build(std::move(corpus),
                                   EmbeddingStore::load(a.doc_embeddings, a.doc_manifest), ic);
    }
    return RetrievalIndex::build(std::move(corpus), ic);
  }();
  index.save(a.out);
  out << "documents: " << index.corpus().size() << '\n';
  out << "leaf clusters: " << index.tree().leaf_count() << '\n';
  out << "threshold c: " << index.tree().c() << '\n';
  if (!a.qrels.empty()) {
    const auto qrels = to_qrels(load_query_records(a.qrels));
    out << "prefix overlap: " << mean_prefix_overlap(qrels, index.tree().cid_map()) << '\n';
  }
  return kExitOk;
}

// --- retrieve ------------------------------------------------------------

struct RetrieveArgs {
  std::string index, queries, out, config, query_embeddings, query_manifest;
  int k = 20;
  int workers = 1;
  FlagOverrides flags;
};

int cmd_retrieve(RetrieveArgs& a, std::ostream& out) {
  auto index = RetrievalIndex::load(a.index);
  // stored index settings act as the defaults for retrieval
  CliConfig base;
  base.index = index.config();
  json layered = to_json(base);
  for (const auto& [k, v] : load_config_file(a.config).items()) layered[k] = v;
  for (const auto& [k, v] : a.flags.values().items()) layered[k] = v;
  const CliConfig cfg = resolve_config(layered, json::object());
  index.set_retrieval_config(cfg.index.retrieval);

  const auto records = load_query_records(a.queries);
  std::vector<QueryRepresentation> reps;
  reps.reserve(records.size());
  if (!a.query_embeddings.empty()) {
    const auto store = EmbeddingStore::load(a.query_embeddings, a.query_manifest);
    for (const auto& r : records) {
      QueryRepresentation q{store.at(r.query_id), std::nullopt};
      if (index.adapter()) q.pooled = index.adapter()->apply(q.pooled);
      reps.push_back(std::move(q));
    }
  } else {
    for (const auto& r : records) reps.push_back(index.represent(r.query_text));
  }
  const auto results = retrieve_all(index, reps, a.k, a.workers);

  std::ostringstream os;
  for (std::size_t i = 0; i < records.size(); ++i) {
    os << result_json(records[i].query_id, results[i]).dump() << '\n';
  }
  if (a.out.empty() || a.out == "-") {
    out << os.str();
  } else {
    write_text(a.out, os.str());
  }
  return kExitOk;
}

// --- eval ----------------------------------------------------------------

struct EvalArgs {
  std::string results, qrels, index, json_out;
  std::vector<int> ks{20, 100};
};

int cmd_eval(EvalArgs& a, std::ostream& out) {
  const auto parsed = load_results(a.results);
  const auto qrels = to_qrels(load_query_records(a.qrels));
  for (int k : a.ks) {
    if (k < 1) throw Error(ErrorKind::kBadArgument, "k values must be >= 1");
  }
  EvalReport report = evaluate(parsed.ranked, qrels, a.ks);
  if (!a.index.empty()) {
    auto index = RetrievalIndex::load(a.index);
    Qrels subset;
    for (const auto& [qid, ranked] : parsed.ranked) subset[qid] = qrels.at(qid);
    report.diagnostics = index_diagnostics(index.tree(), &subset);
    if (!parsed.clusters.empty()) {
      const auto relevant = relevant_cids(subset, index.tree());
      const auto max_len = report.diagnostics->cid_length_histogram.rbegin()->first;
      for (std::size_t p = 1; p <= max_len; ++p) {
        report.position_errors.push_back(
            position_error_rate(parsed.clusters, relevant, static_cast<int>(p)));
      }
    }
  }
  out << report.to_table();
  if (!a.json_out.empty()) write_text(a.json_out, report.to_json() + "\n");
  return kExitOk;
}

// --- add-docs ------------------------------------------------------------

struct AddArgs {
  std::string index, docs, doc_embeddings, doc_manifest;
};

int cmd_add_docs(AddArgs& a, std::ostream& out) {
  auto index = RetrievalIndex::load(a.index);
  Corpus fresh = load_corpus(a.docs);
  std::vector<Document> docs(fresh.docs().begin(), fresh.docs().end());
  const auto counts = a.doc_embeddings.empty()
                          ? index.add_documents(std::move(docs))
                          : index.add_documents(std::move(docs),
                                                EmbeddingStore::load(a.doc_embeddings,
                                                                     a.doc_manifest));
  if (!counts.empty()) index.save(a.index);
  std::size_t total = 0;
  for (const auto& [cid, n] : counts) {
    out << cid.str() << '\t' << n << '\n';
    total += n;
  }
  out << "added: " << total << ", corpus size: " << index.corpus().size() << '\n';
  return kExitOk;
}

// --- train-adapter -------------------------------------------------------

struct TrainArgs {
  std::string index, pairs, config;
  FlagOverrides flags;
};

int cmd_train_adapter(TrainArgs& a, std::ostream& out) {
  auto index = RetrievalIndex::load(a.index);
  if (!index.embedder()) {
    throw Error(ErrorKind::kBadArgument, "adapter training needs the hashing embedder");
  }
  CliConfig base;
  base.index = index.config();
  json layered = to_json(base);
  for (const auto& [k, v] : load_config_file(a.config).items()) layered[k] = v;
  for (const auto& [k, v] : a.flags.values().items()) layered[k] = v;
  const CliConfig cfg = resolve_config(layered, json::object());

  auto pairs = make_training_pairs(load_query_records(a.pairs), index.corpus());
  std::uint64_t span_seed = cfg.augment_seed();
  for (const auto& doc : index.corpus().docs()) {
    for (auto& span : augment_queries(doc, cfg.n_spans, cfg.span_len, span_seed++)) {
      pairs.push_back({std::move(span), doc.id, {doc.id}});
    }
  }

  AdapterTrainingOptions opts;
  opts.gamma = cfg.index.retrieval.gamma;
  opts.n_a = cfg.n_a;
  opts.epochs = cfg.epochs;
  opts.learning_rate = cfg.learning_rate;
  opts.batch_size = cfg.batch_size;
  opts.seed = cfg.adapter_seed();
  const auto report = train_adapter(pairs, index.tree(), index.embeddings(),
                                    *index.embedder(), opts);
  out << "pairs: " << pairs.size() << '\n';
  out << "epoch 0 loss " << report.initial_loss << '\n';
  for (std::size_t e = 0; e < report.epoch_losses.size(); ++e) {
    out << "epoch " << e + 1 << " loss " << report.epoch_losses[e] << '\n';
  }
  index.set_adapter(report.adapter);
  index.save(a.index);
  return kExitOk;
}

// --- inspect -------------------------------------------------------------

struct InspectArgs {
  std::string index, doc, qrels;
};

int cmd_inspect(InspectArgs& a, std::ostream& out) {
  const auto index = RetrievalIndex::load(a.index);
  if (!a.doc.empty()) {
    out << json{{"doc_id", a.doc}, {"cid", cid_json(index.tree().cid_of(a.doc))}}.dump() << '\n';
    return kExitOk;
  }
  std::optional<Qrels> qrels;
  if (!a.qrels.empty()) qrels = to_qrels(load_query_records(a.qrels));
  const auto diag = index_diagnostics(index.tree(), qrels ? &*qrels : nullptr);
  json hist = json::object();
  for (const auto& [len, n] : diag.cid_length_histogram) hist[std::to_string(len)] = n;
  CliConfig cfg;
  cfg.index = index.config();
  json j{{"documents", index.corpus().size()},
         {"dim", index.config().dim},
         {"k", index.tree().k()},
         {"c", index.tree().c()},
         {"leaf_count", diag.leaf_count},
         {"cid_length_histogram", hist},
         {"adapter", index.adapter().has_value()},
         {"config", to_json(cfg)}};
  if (diag.prefix_overlap) j["prefix_overlap"] = *diag.prefix_overlap;
  out << j.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coarse-to-fine document retrieval over cluster identifiers", "cidret"};
  app.require_subcommand(1);

  BuildArgs build;
  auto* b = app.add_subcommand("build-index", "cluster a corpus and write an index directory");
  b->add_option("--corpus", build.corpus, "corpus JSONL")->required();
  b->add_option("--out", build.out, "index directory")->required();
  b->add_option("--config", build.config, "flat JSON config file");
  b->add_option("--qrels", build.qrels, "qrels JSONL; prints prefix overlap");
  b->add_option("--doc-embeddings", build.doc_embeddings, "external f32 embedding rows");
  b->add_option("--doc-manifest", build.doc_manifest, "manifest for --doc-embeddings");
  add_retrieval_flags(b, build.flags);
  add_build_flags(b, build.flags);

  RetrieveArgs ret;
  auto* r = app.add_subcommand("retrieve", "rank documents for each query");
  r->add_option("--index", ret.index, "index directory")->required();
  r->add_option("--queries", ret.queries, "queries JSONL")->required();
  r->add_option("--k", ret.k, "results per query")->check(CLI::PositiveNumber);
  r->add_option("--out", ret.out, "results JSONL (default stdout)");
  r->add_option("--config", ret.config, "flat JSON config file");
  r->add_option("--workers", ret.workers, "retrieval threads")->check(CLI::PositiveNumber);
  r->add_option("--query-embeddings", ret.query_embeddings, "external query embedding rows");
  r->add_option("--query-manifest", ret.query_manifest, "manifest for --query-embeddings");
  add_retrieval_flags(r, ret.flags);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "compute R@k and Acc@k for a results file");
  e->add_option("--results", ev.results, "results JSONL")->required();
  e->add_option("--qrels", ev.qrels, "qrels JSONL")->required();
  e->add_option("--k", ev.ks, "cutoffs")->delimiter(',');
  e->add_option("--index", ev.index, "index directory for diagnostics");
  e->add_option("--json", ev.json_out, "write the report as JSON");

  AddArgs add;
  auto* ad = app.add_subcommand("add-docs", "insert documents without rebuilding");
  ad->add_option("--index", add.index, "index directory")->required();
  ad->add_option("--docs", add.docs, "corpus JSONL of new documents")->required();
  ad->add_option("--doc-embeddings", add.doc_embeddings, "external f32 embedding rows");
  ad->add_option("--doc-manifest", add.doc_manifest, "manifest for --doc-embeddings");

  TrainArgs train;
  auto* t = app.add_subcommand("train-adapter", "fit the query adapter on training pairs");
  t->add_option("--index", train.index, "index directory")->required();
  t->add_option("--pairs", train.pairs, "qrels-format training queries")->required();
  t->add_option("--config", train.config, "flat JSON config file");
  add_training_flags(t, train.flags);

  InspectArgs insp;
  auto* in = app.add_subcommand("inspect", "summarize an index");
  in->add_option("--index", insp.index, "index directory")->required();
  in->add_option("--doc", insp.doc, "print the CID of one document");
  in->add_option("--qrels", insp.qrels, "qrels JSONL; adds prefix overlap");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& pe) {
    err << pe.what() << '\n';
    return kExitUsageError;
  }

  try {
    if (*b) return cmd_build_index(build, out);
    if (*r) return cmd_retrieve(ret, out);
    if (*e) return cmd_eval(ev, out);
    if (*ad) return cmd_add_docs(add, out);
    if (*t) return cmd_train_adapter(train, out);
    if (*in) return cmd_inspect(insp, out);
  } catch (const Error& ex) {
    err << "error: " << ex.what() << '\n';
    return ex.is_io() ? kExitUsageError : kExitDomainError;
  } catch (const fs::filesystem_error& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitUsageError;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitDomainError;
  }
  return kExitUsageError;
}

}  // namespace cidret

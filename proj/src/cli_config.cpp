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

#include "cidret/cli_config.hpp"

#include <fstream>

#include "cidret/error.hpp"
#include "cidret/kmeans.hpp"

namespace cidret {

using nlohmann::json;

std::uint64_t CliConfig::augment_seed() const { return derive_seed(index.seed, 3); }
std::uint64_t CliConfig::adapter_seed() const { return derive_seed(index.seed, 4); }

namespace {

template <typename T>
void set(T& field, const json& value, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!value.is_number()) throw Error(ErrorKind::kBadArgument, key + " must be a number");
    } else {
      if (!value.is_number_integer()) {
        throw Error(ErrorKind::kBadArgument, key + " must be an integer");
      }
    }
    field = value.get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kBadArgument, key + ": " + e.what());
  }
}

}  // namespace

void apply_config(CliConfig& c, const json& flat) {
  if (flat.is_null()) return;
  if (!flat.is_object()) throw Error(ErrorKind::kBadArgument, "config must be a JSON object");
  auto& r = c.index.retrieval;
  for (const auto& [key, value] : flat.items()) {
    if (key == "beta") set(r.beta, value, key);
    else if (key == "beam_size") set(r.beam_size, value, key);
    else if (key == "length_penalty") set(r.length_penalty, value, key);
    else if (key == "k_clusters") set(r.k_clusters, value, key);
    else if (key == "expected_clusters") set(r.expected_clusters, value, key);
    else if (key == "branching") set(r.branching, value, key);
    else if (key == "gamma") set(r.gamma, value, key);
    else if (key == "temperature") set(r.temperature, value, key);
    else if (key == "dim") set(c.index.dim, value, key);
    else if (key == "seed") set(c.index.seed, value, key);
    else if (key == "n_spans") set(c.n_spans, value, key);
    else if (key == "span_len") set(c.span_len, value, key);
    else if (key == "n_a") set(c.n_a, value, key);
    else if (key == "epochs") set(c.epochs, value, key);
    else if (key == "learning_rate") set(c.learning_rate, value, key);
    else if (key == "batch_size") set(c.batch_size, value, key);
    else if (key == "workers") set(c.workers, value, key);
    else throw Error(ErrorKind::kBadArgument, "unknown config key '" + key + "'");
  }
}

CliConfig resolve_config(const json& file_values, const json& flag_values) {
  CliConfig c;
  apply_config(c, file_values);
  apply_config(c, flag_values);
  c.index.retrieval.validate();
  if (c.index.dim < 8) throw Error(ErrorKind::kBadDim, "dim must be >= 8");
  if (c.n_spans < 0 || c.span_len < 1 || c.n_a < 0 || c.epochs < 0 || c.batch_size < 1 ||
      c.workers < 1) {
    throw Error(ErrorKind::kBadArgument, "invalid training or worker settings");
  }
  return c;
}

json to_json(const CliConfig& c) {
  const auto& r = c.index.retrieval;
  return json{{"beta", r.beta},
              {"beam_size", r.beam_size},
              {"length_penalty", r.length_penalty},
              {"k_clusters", r.k_clusters},
              {"expected_clusters", r.expected_clusters},
              {"branching", r.branching},
              {"gamma", r.gamma},
              {"temperature", r.temperature},
              {"dim", c.index.dim},
              {"seed", c.index.seed},
              {"n_spans", c.n_spans},
              {"span_len", c.span_len},
              {"n_a", c.n_a},
              {"epochs", c.epochs},
              {"learning_rate", c.learning_rate},
              {"batch_size", c.batch_size},
              {"workers", c.workers}};
}

json read_flat_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParseError, path.string() + ": " + e.what());
  }
}

}  // namespace cidret

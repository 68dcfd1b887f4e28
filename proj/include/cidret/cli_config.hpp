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

#include <json.hpp>

#include "cidret/pipeline.hpp"

namespace cidret {

struct CliConfig {
  IndexConfig index;
  int n_spans = 5;
  int span_len = 40;
  int n_a = 4;
  int epochs = 20;
  double learning_rate = 0.5;
  int batch_size = 32;
  int workers = 1;

  std::uint64_t augment_seed() const;
  std::uint64_t adapter_seed() const;
};

// Applies a flat key/value object on top of `config`. Keys use the
// snake_case field names (beta, beam_size, ..., n_spans, workers).
// Throws BadArgument for unknown keys or mistyped values.
void apply_config(CliConfig& config, const nlohmann::json& flat);

// defaults <- config file <- flag overrides, then validated.
CliConfig resolve_config(const nlohmann::json& file_values,
                         const nlohmann::json& flag_values);

nlohmann::json to_json(const CliConfig& config);

// Reads a flat JSON object from disk. Throws Io / ParseError.
nlohmann::json read_flat_json(const std::filesystem::path& path);

}  // namespace cidret

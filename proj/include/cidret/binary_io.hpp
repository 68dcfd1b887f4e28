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
#include <vector>

#include "cidret/types.hpp"

namespace cidret {

// Little-endian IEEE-754 f32 blobs. Each column of `m` is written as one
// row of the file (row-major, `m.rows()` floats per row).
void write_f32_rows(const std::filesystem::path& path, const Matrix& m);

// Inverse of write_f32_rows; the file size must be a multiple of 4 * dim.
Matrix read_f32_rows(const std::filesystem::path& path, Eigen::Index dim);

}  // namespace cidret

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

#include "cidret/binary_io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>

#include "cidret/error.hpp"

namespace cidret {

void write_f32_rows(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  std::vector<char> buf(static_cast<std::size_t>(m.size()) * 4);
  std::size_t pos = 0;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(m(r, c)));
      for (int b = 0; b < 4; ++b) {
        buf[pos++] = static_cast<char>((bits >> (8 * b)) & 0xFFu);
      }
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw Error(ErrorKind::kIo, "short write to " + path.string());
}

Matrix read_f32_rows(const std::filesystem::path& path, Eigen::Index dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
  const auto row_bytes = static_cast<std::size_t>(dim) * 4;
  if (dim <= 0 || buf.size() % row_bytes != 0) {
    throw Error(ErrorKind::kParseError,
                path.string() + ": size is not a multiple of the row width");
  }
  const auto cols = static_cast<Eigen::Index>(buf.size() / row_bytes);
  Matrix m(dim, cols);
  std::size_t pos = 0;
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < dim; ++r) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        bits |= static_cast<std::uint32_t>(buf[pos++]) << (8 * b);
      }
      m(r, c) = static_cast<double>(std::bit_cast<float>(bits));
    }
  }
  return m;
}

}  // namespace cidret

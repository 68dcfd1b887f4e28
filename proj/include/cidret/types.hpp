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

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace cidret {

template <typename Scalar>
using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Vector = VectorT<double>;
using Matrix = MatrixT<double>;

using DocId = std::string;

// Digit sequence of a cluster identifier or of a prefix of one. A complete
// identifier ends in the terminal digit 0; every earlier digit is a sibling
// label in 1..k.
using Digits = std::vector<int>;

inline constexpr int kTerminalDigit = 0;

class Cid {
 public:
  Cid() = default;
  explicit Cid(Digits digits) : digits_(std::move(digits)) {}
  Cid(std::initializer_list<int> digits) : digits_(digits) {}

  const Digits& digits() const noexcept { return digits_; }
  std::size_t size() const noexcept { return digits_.size(); }
  int operator[](std::size_t i) const { return digits_[i]; }

  // Labels only, without the terminal digit.
  Digits path() const;

  // Ends in exactly one 0 and every other digit lies in 1..max_label.
  bool is_valid(int max_label) const;

  std::string str() const;

  friend auto operator<=>(const Cid&, const Cid&) = default;
  friend bool operator==(const Cid&, const Cid&) = default;

 private:
  Digits digits_;
};

// Rounds every entry through IEEE single precision. Values that are persisted
// as f32 blobs are stored this way in memory so a save/load cycle is exact.
template <typename Derived>
void round_to_f32(Eigen::MatrixBase<Derived>& m) {
  m = m.template cast<float>().template cast<double>();
}

}  // namespace cidret

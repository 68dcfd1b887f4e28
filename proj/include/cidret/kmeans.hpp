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
#include <limits>
#include <random>
#include <vector>

#include "cidret/types.hpp"

namespace cidret {

// splitmix64 step; used to derive independent per-node seeds from one
// top-level seed.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t salt) {
  std::uint64_t z = parent + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

template <typename Scalar>
struct KMeansResult {
  MatrixT<Scalar> centroids;    // dim x m, m <= k, no empty clusters
  std::vector<int> assignment;  // per point, column index into centroids

  int cluster_count() const { return static_cast<int>(centroids.cols()); }
};

namespace detail {

inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Squared Euclidean distances, points x centroids.
template <typename Scalar>
MatrixT<Scalar> squared_distances(const MatrixT<Scalar>& points,
                                  const MatrixT<Scalar>& centroids) {
  MatrixT<Scalar> d = (points.transpose() * centroids) * Scalar(-2);
  d.colwise() += points.colwise().squaredNorm().transpose();
  d.rowwise() += centroids.colwise().squaredNorm();
  return d;
}

template <typename Scalar>
std::vector<int> nearest(const MatrixT<Scalar>& points,
                         const MatrixT<Scalar>& centroids) {
  const MatrixT<Scalar> d = squared_distances(points, centroids);
  std::vector<int> out(static_cast<std::size_t>(points.cols()));
  for (Eigen::Index i = 0; i < d.rows(); ++i) {
    Eigen::Index best = 0;
    d.row(i).minCoeff(&best);  // first minimum on ties
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

// Means of assigned points; clusters left empty keep their previous centroid.
template <typename Scalar>
void update_means(const MatrixT<Scalar>& points, const std::vector<int>& assignment,
                  MatrixT<Scalar>& centroids) {
  MatrixT<Scalar> sums = MatrixT<Scalar>::Zero(centroids.rows(), centroids.cols());
  std::vector<Eigen::Index> counts(static_cast<std::size_t>(centroids.cols()), 0);
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    const int a = assignment[static_cast<std::size_t>(i)];
    sums.col(a) += points.col(i);
    ++counts[static_cast<std::size_t>(a)];
  }
  for (Eigen::Index c = 0; c < centroids.cols(); ++c) {
    if (counts[static_cast<std::size_t>(c)] > 0) {
      centroids.col(c) = sums.col(c) / Scalar(counts[static_cast<std::size_t>(c)]);
    }
  }
}

// Inputs smaller than k: one cluster per distinct point, in first-occurrence
// order.
template <typename Scalar>
KMeansResult<Scalar> group_duplicates(const MatrixT<Scalar>& points) {
  KMeansResult<Scalar> out;
  std::vector<Eigen::Index> reps;
  out.assignment.resize(static_cast<std::size_t>(points.cols()));
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    int found = -1;
    for (std::size_t r = 0; r < reps.size(); ++r) {
      if (points.col(reps[r]) == points.col(i)) {
        found = static_cast<int>(r);
        break;
      }
    }
    if (found < 0) {
      found = static_cast<int>(reps.size());
      reps.push_back(i);
    }
    out.assignment[static_cast<std::size_t>(i)] = found;
  }
  out.centroids.resize(points.rows(), static_cast<Eigen::Index>(reps.size()));
  for (std::size_t r = 0; r < reps.size(); ++r) {
    out.centroids.col(static_cast<Eigen::Index>(r)) = points.col(reps[r]);
  }
  return out;
}

}  // namespace detail

// Lloyd's algorithm with k-means++ seeding. Stops when no assignment changes
// or after `max_iterations` mean updates. Final centroids are the means of the
// final assignment; clusters that end up empty are dropped, so the result may
// have fewer than k clusters. Deterministic for a given seed.
template <typename Derived>
KMeansResult<typename Derived::Scalar> kmeans(const Eigen::MatrixBase<Derived>& input,
                                              int k, std::uint64_t seed,
                                              int max_iterations = 50) {
  using Scalar = typename Derived::Scalar;
  const MatrixT<Scalar> points = input;
  const Eigen::Index n = points.cols();
  if (n == 0 || k < 1) return {};
  if (n < k) return detail::group_duplicates(points);

  std::mt19937_64 rng(seed);
  std::vector<Eigen::Index> chosen;
  chosen.push_back(static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(n)));
  VectorT<Scalar> best =
      (points.colwise() - points.col(chosen.front())).colwise().squaredNorm().transpose();
  while (static_cast<int>(chosen.size()) < k) {
    const double total = static_cast<double>(best.sum());
    if (!(total > 0.0)) break;  // all remaining points coincide with a center
    const double target = detail::unit_uniform(rng) * total;
    double acc = 0.0;
    Eigen::Index pick = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (best[i] <= Scalar(0)) continue;
      acc += static_cast<double>(best[i]);
      pick = i;
      if (acc > target) break;
    }
    chosen.push_back(pick);
    best = best.cwiseMin(
        (points.colwise() - points.col(pick)).colwise().squaredNorm().transpose());
  }

  MatrixT<Scalar> centroids(points.rows(), static_cast<Eigen::Index>(chosen.size()));
  for (std::size_t c = 0; c < chosen.size(); ++c) {
    centroids.col(static_cast<Eigen::Index>(c)) = points.col(chosen[c]);
  }

  std::vector<int> assignment = detail::nearest(points, centroids);
  for (int it = 0; it < max_iterations; ++it) {
    detail::update_means(points, assignment, centroids);
    auto next = detail::nearest(points, centroids);
    if (next == assignment) break;
    assignment = std::move(next);
  }
  detail::update_means(points, assignment, centroids);

  // Drop empty clusters, keeping the relative order of the rest.
  std::vector<int> remap(static_cast<std::size_t>(centroids.cols()), -1);
  for (int a : assignment) remap[static_cast<std::size_t>(a)] = 0;
  int next_id = 0;
  for (auto& r : remap) {
    if (r == 0) r = next_id++;
  }
  KMeansResult<Scalar> out;
  out.centroids.resize(points.rows(), next_id);
  for (std::size_t c = 0; c < remap.size(); ++c) {
    if (remap[c] >= 0) out.centroids.col(remap[c]) = centroids.col(static_cast<Eigen::Index>(c));
  }
  out.assignment.reserve(assignment.size());
  for (int a : assignment) out.assignment.push_back(remap[static_cast<std::size_t>(a)]);
  return out;
}

}  // namespace cidret

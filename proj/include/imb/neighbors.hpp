/*
 * Copyright 2026 The imbench Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Brute-force Euclidean neighbor queries and k-means (k-means++ seeding,
// Lloyd iterations). Callers pass already standardized coordinates.

#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "imb/common.hpp"

namespace imb {

// The k candidates closest to row `query` of `points`, excluding `query`
// itself; distance ties resolve to the lower row index.
inline std::vector<std::size_t> nearest_neighbors(const Matrix& points, std::size_t query,
                                                  std::span<const std::size_t> candidates, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(candidates.size());
  const auto q = points.row(query);
  for (auto c : candidates)
    if (c != query) dist.push_back({squared_distance(q, points.row(c)), c});
  k = std::min(k, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<std::size_t> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
  return out;
}

// Single nearest neighbor over all rows, excluding `query`.
inline std::size_t nearest_neighbor(const Matrix& points, std::size_t query) {
  const auto q = points.row(query);
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = query;
  for (std::size_t c = 0; c < points.rows(); ++c) {
    if (c == query) continue;
    const double d = squared_distance(q, points.row(c));
    if (d < best) {
      best = d;
      arg = c;
    }
  }
  return arg;
}

struct KMeansResult {
  Matrix centroids;
  std::vector<std::size_t> assignment;
  std::size_t iterations = 0;
};

struct KMeansOptions {
  std::size_t max_iterations = 300;
  double tolerance = 1e-6;  // on the summed squared centroid shift
};

namespace detail {

inline std::size_t closest_centroid(std::span<const double> x, const Matrix& centroids, double* dist = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t c = 0; c < centroids.rows(); ++c) {
    const double d = squared_distance(x, centroids.row(c));
    if (d < best) {
      best = d;
      arg = c;
    }
  }
  if (dist) *dist = best;
  return arg;
}

}  // namespace detail

inline KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed, const KMeansOptions& opt = {}) {
  const std::size_t n = points.rows(), d = points.cols();
  if (k == 0 || k > n) throw DataError("kmeans: k must be in [1, n]");
  Rng rng(seed);

  // k-means++ seeding.
  KMeansResult res;
  res.centroids = Matrix(k, d);
  std::vector<char> chosen(n, 0);
  std::size_t first = uniform_index(rng, n);
  std::copy_n(points.row(first).begin(), d, res.centroids.row(0).begin());
  chosen[first] = 1;
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points.row(i), res.centroids.row(0));
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    std::size_t pick = n;
    if (total > 0.0) {
      double u = uniform01(rng) * total;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        pick = i;
        u -= d2[i];
        if (u < 0.0) break;
      }
    } else {
      // Fewer distinct points than k: take the first unused row.
      for (std::size_t i = 0; i < n && pick == n; ++i)
        if (!chosen[i]) pick = i;
    }
    chosen[pick] = 1;
    std::copy_n(points.row(pick).begin(), d, res.centroids.row(c).begin());
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], squared_distance(points.row(i), res.centroids.row(c)));
  }

  res.assignment.assign(n, 0);
  std::vector<double> dist(n);
  Matrix sums(k, d);
  std::vector<std::size_t> sizes(k);
  for (res.iterations = 1; res.iterations <= opt.max_iterations; ++res.iterations) {
    for (std::size_t i = 0; i < n; ++i) res.assignment[i] = detail::closest_centroid(points.row(i), res.centroids, &dist[i]);
    sums = Matrix(k, d);
    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = res.assignment[i];
      ++sizes[c];
      for (std::size_t j = 0; j < d; ++j) sums(c, j) += points(i, j);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      // Empty cluster: re-seed with the point farthest from its centroid.
      const auto far = static_cast<std::size_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
      const auto old = res.assignment[far];
      --sizes[old];
      for (std::size_t j = 0; j < d; ++j) sums(old, j) -= points(far, j);
      res.assignment[far] = c;
      sizes[c] = 1;
      for (std::size_t j = 0; j < d; ++j) sums(c, j) = points(far, j);
      dist[far] = 0.0;
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      for (std::size_t j = 0; j < d; ++j) {
        const double v = sizes[c] > 0 ? sums(c, j) / static_cast<double>(sizes[c]) : res.centroids(c, j);
        shift += (v - res.centroids(c, j)) * (v - res.centroids(c, j));
        res.centroids(c, j) = v;
      }
    }
    if (shift <= opt.tolerance) break;
  }
  res.iterations = std::min(res.iterations, opt.max_iterations);
  for (std::size_t i = 0; i < n; ++i) res.assignment[i] = detail::closest_centroid(points.row(i), res.centroids);
  return res;
}

}  // namespace imb

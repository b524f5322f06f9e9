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

#include <gtest/gtest.h>

#include "imb/neighbors.hpp"

using namespace imb;

namespace {

Matrix points(const std::vector<std::vector<double>>& rows) {
  Matrix m(0, rows.front().size());
  for (const auto& r : rows) m.append_row(r);
  return m;
}

}  // namespace

TEST(Neighbors, ExcludesQueryAndBreaksTiesByIndex) {
  const auto m = points({{0}, {1}, {-1}, {2}, {1}});
  const std::vector<std::size_t> all{0, 1, 2, 3, 4};
  EXPECT_EQ(nearest_neighbors(m, 0, all, 3), (std::vector<std::size_t>{1, 2, 4}));
  EXPECT_EQ(nearest_neighbor(m, 0), 1u);
  EXPECT_EQ(nearest_neighbors(m, 0, all, 10).size(), 4u);
}

TEST(KMeans, TwoTightClusters) {
  Rng rng(1);
  Matrix m(0, 2);
  for (int i = 0; i < 100; ++i) {
    const double c = i < 50 ? 0.0 : 10.0;
    m.append_row(std::vector<double>{c + 0.1 * standard_normal(rng), c + 0.1 * standard_normal(rng)});
  }
  const auto r = kmeans(m, 2, 7);
  std::vector<double> xs{r.centroids(0, 0), r.centroids(1, 0)};
  std::sort(xs.begin(), xs.end());
  EXPECT_NEAR(xs[0], 0.0, 0.1);
  EXPECT_NEAR(xs[1], 10.0, 0.1);
  for (int i = 1; i < 50; ++i) EXPECT_EQ(r.assignment[i], r.assignment[0]);
  EXPECT_NE(r.assignment[0], r.assignment[99]);
}

TEST(KMeans, KEqualsNReturnsThePoints) {
  const auto m = points({{0, 0}, {3, 1}, {5, 5}, {-2, 4}});
  const auto r = kmeans(m, 4, 3);
  std::vector<std::vector<double>> got, want{{-2, 4}, {0, 0}, {3, 1}, {5, 5}};
  for (std::size_t c = 0; c < 4; ++c) got.push_back({r.centroids(c, 0), r.centroids(c, 1)});
  std::sort(got.begin(), got.end());
  EXPECT_EQ(got, want);
}

TEST(KMeans, DeterministicAndHandlesDuplicates) {
  const auto m = points({{1, 1}, {1, 1}, {1, 1}, {2, 2}});
  const auto a = kmeans(m, 3, 5), b = kmeans(m, 3, 5);
  EXPECT_EQ(a.centroids, b.centroids);
  EXPECT_EQ(a.assignment, b.assignment);
  EXPECT_THROW(kmeans(m, 5, 1), DataError);
}

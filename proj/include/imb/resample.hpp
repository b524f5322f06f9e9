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

// Pre-processing samplers. Each maps a training fold to a rebalanced fold;
// failure (label 1) is treated as the minority class. All neighbor and
// clustering geometry runs on z-scored features with the scaler fit on the
// input fold.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "imb/common.hpp"
#include "imb/dataset.hpp"
#include "imb/forest.hpp"
#include "imb/neighbors.hpp"

namespace imb {

enum class SamplerKind {
  kRos,
  kRus,
  kSmote,
  kAdasyn,
  kClusterCentroids,
  kSmoteTomek,
  kMassaging,
  kPerturbation,
  kClusterMassaging,
};

struct SamplerSpec {
  SamplerKind kind = SamplerKind::kRos;
  double target_ratio = 1.0;  // minority / majority after sampling
  std::size_t k_neighbors = 5;
  // Default: round(minority / target_ratio) for cluster centroids, 10 for
  // cluster massaging.
  std::optional<std::size_t> n_clusters;
  double noise_scale = 0.1;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(target_ratio > 0.0 && target_ratio <= 1.0)) throw ConfigError("sampler: target ratio must be in (0,1]");
    if (k_neighbors < 1) throw ConfigError("sampler: k must be >= 1");
    if (n_clusters && *n_clusters < 1) throw ConfigError("sampler: n_clusters must be >= 1");
    if (!(noise_scale >= 0.0)) throw ConfigError("sampler: noise scale must be >= 0");
  }
};

// One interpolated row: parent + lambda * (neighbor - parent). Indices refer
// to rows of the sampler's input.
struct SyntheticRecord {
  std::size_t parent = 0;
  std::size_t neighbor = 0;
  double lambda = 0.0;
};

// Optional provenance a sampler fills in for inspection and tests.
struct ResampleTrace {
  std::size_t first_synthetic_row = 0;      // synthetic rows are appended
  std::vector<SyntheticRecord> synthetic;   // SMOTE / ADASYN
  std::vector<std::size_t> parents;         // ROS / perturbation duplicates
  std::vector<std::size_t> flipped_rows;    // label-editing samplers
  std::vector<std::size_t> removed_rows;    // Tomek cleaning, input indices of the SMOTE output
};

namespace detail {

inline void require_both_classes(const Dataset& d) {
  const auto c = d.counts();
  if (c.normal == 0 || c.failure == 0) throw DataError("sampler: both classes must be present");
}

inline std::size_t minority_target(std::size_t majority, double ratio) {
  return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(majority)));
}

// Rows appended to a copy of d with the given label.
inline Dataset with_appended(const Dataset& d, const Matrix& rows, int label) {
  Dataset out = d;
  out.x.reserve_rows(d.size() + rows.rows());
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    out.x.append_row(rows.row(r));
    out.y.push_back(label);
  }
  return out;
}

inline Matrix zscored(const Dataset& d) { return Scaler::fit(d.x).transform(d.x); }

}  // namespace detail

// Flip budget shared by the label-editing samplers:
// min(ceil((ratio * majority - minority) / (1 + ratio)), floor(0.1 * majority)).
inline std::size_t massaging_budget(std::size_t majority, std::size_t minority, double ratio) {
  const double need = ratio * static_cast<double>(majority) - static_cast<double>(minority);
  if (need <= 0.0) return 0;
  const auto requested = static_cast<std::size_t>(std::ceil(need / (1.0 + ratio) - 1e-9));
  const auto cap = static_cast<std::size_t>(std::floor(0.1 * static_cast<double>(majority)));
  return std::min(requested, cap);
}

inline Dataset ros(const Dataset& d, const SamplerSpec& spec, ResampleTrace* trace = nullptr) {
  spec.validate();
  detail::require_both_classes(d);
  const auto minority = d.indices_of(1);
  const auto target = detail::minority_target(d.n_majority(), spec.target_ratio);
  Rng rng(spec.seed);
  Dataset out = d;
  if (trace) trace->first_synthetic_row = d.size();
  for (std::size_t i = minority.size(); i < target; ++i) {
    const auto parent = minority[uniform_index(rng, minority.size())];
    out.x.append_row(d.x.row(parent));
    out.y.push_back(1);
    if (trace) trace->parents.push_back(parent);
  }
  return out;
}

inline Dataset rus(const Dataset& d, const SamplerSpec& spec) {
  spec.validate();
  detail::require_both_classes(d);
  auto majority = d.indices_of(0);
  const auto minority_count = d.n_minority();
  const auto keep = static_cast<std::size_t>(std::llround(static_cast<double>(minority_count) / spec.target_ratio));
  if (keep >= majority.size()) return d;
  Rng rng(spec.seed);
  shuffle(majority, rng);
  majority.resize(keep);
  std::vector<std::size_t> rows = d.indices_of(1);
  rows.insert(rows.end(), majority.begin(), majority.end());
  std::sort(rows.begin(), rows.end());
  return d.subset(rows);
}

namespace detail {

// Minority-only neighbor lists (indices into d) for every minority row.
inline std::vector<std::vector<std::size_t>> minority_neighbors(const Matrix& z, const std::vector<std::size_t>& minority,
                                                                std::size_t k) {
  std::vector<std::vector<std::size_t>> nn(minority.size());
  for (std::size_t i = 0; i < minority.size(); ++i) nn[i] = nearest_neighbors(z, minority[i], minority, k);
  return nn;
}

inline void interpolate(std::span<const double> a, std::span<const double> b, double lambda, std::span<double> out) {
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] + lambda * (b[j] - a[j]);
}

// Appends `quota[i]` interpolations for minority row i.
inline Dataset interpolate_minority(const Dataset& d, const std::vector<std::size_t>& minority,
                                    const std::vector<std::vector<std::size_t>>& nn,
                                    const std::vector<std::size_t>& parents, Rng& rng, ResampleTrace* trace) {
  Dataset out = d;
  out.x.reserve_rows(d.size() + parents.size());
  std::vector<double> row(d.width());
  if (trace) trace->first_synthetic_row = d.size();
  for (auto i : parents) {
    const auto& cand = nn[i];
    const auto neighbor = cand[uniform_index(rng, cand.size())];
    const double lambda = uniform01(rng);
    interpolate(d.x.row(minority[i]), d.x.row(neighbor), lambda, row);
    out.x.append_row(row);
    out.y.push_back(1);
    if (trace) trace->synthetic.push_back({minority[i], neighbor, lambda});
  }
  return out;
}

}  // namespace detail

// a + lambda * (b - a).
inline std::vector<double> smote_interpolate(std::span<const double> a, std::span<const double> b, double lambda) {
  std::vector<double> out(a.size());
  detail::interpolate(a, b, lambda, out);
  return out;
}

inline Dataset smote(const Dataset& d, const SamplerSpec& spec, ResampleTrace* trace = nullptr) {
  spec.validate();
  detail::require_both_classes(d);
  const auto minority = d.indices_of(1);
  if (minority.size() < 2) throw DataError("smote: need at least 2 minority rows");
  const auto target = detail::minority_target(d.n_majority(), spec.target_ratio);
  if (target <= minority.size()) {
    if (trace) trace->first_synthetic_row = d.size();
    return d;
  }
  const std::size_t k = std::min(spec.k_neighbors, minority.size() - 1);
  const auto nn = detail::minority_neighbors(detail::zscored(d), minority, k);
  Rng rng(spec.seed);
  std::vector<std::size_t> parents(target - minority.size());
  for (auto& p : parents) p = uniform_index(rng, minority.size());
  return detail::interpolate_minority(d, minority, nn, parents, rng, trace);
}

// Per-minority-row synthetic counts. Weight of row i is the share of
// majority rows among its k nearest neighbors (whole fold); counts are
// apportioned by largest remainder (ties to the lower index) so they sum to
// the required total. All-zero weights fall back to a uniform split.
inline std::vector<std::size_t> adasyn_quotas(const Dataset& d, const SamplerSpec& spec) {
  spec.validate();
  detail::require_both_classes(d);
  const auto minority = d.indices_of(1);
  if (minority.size() < 2) throw DataError("adasyn: need at least 2 minority rows");
  const auto target = detail::minority_target(d.n_majority(), spec.target_ratio);
  const std::size_t total = target > minority.size() ? target - minority.size() : 0;
  const auto z = detail::zscored(d);
  std::vector<std::size_t> all(d.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const std::size_t k = std::min(spec.k_neighbors, d.size() - 1);
  std::vector<double> weight(minority.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < minority.size(); ++i) {
    std::size_t majority_hits = 0;
    for (auto j : nearest_neighbors(z, minority[i], all, k)) majority_hits += d.y[j] == 0;
    weight[i] = static_cast<double>(majority_hits) / static_cast<double>(k);
    sum += weight[i];
  }
  if (sum <= 0.0) {
    std::fill(weight.begin(), weight.end(), 1.0);
    sum = static_cast<double>(minority.size());
  }
  std::vector<std::size_t> quota(minority.size());
  std::vector<std::pair<double, std::size_t>> remainder(minority.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < minority.size(); ++i) {
    const double exact = static_cast<double>(total) * weight[i] / sum;
    quota[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += quota[i];
    remainder[i] = {exact - static_cast<double>(quota[i]), i};
  }
  std::stable_sort(remainder.begin(), remainder.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < total; ++r, ++assigned) ++quota[remainder[r % remainder.size()].second];
  return quota;
}

inline Dataset adasyn(const Dataset& d, const SamplerSpec& spec, ResampleTrace* trace = nullptr) {
  const auto quota = adasyn_quotas(d, spec);
  const auto minority = d.indices_of(1);
  const std::size_t k = std::min(spec.k_neighbors, minority.size() - 1);
  const auto nn = detail::minority_neighbors(detail::zscored(d), minority, k);
  std::vector<std::size_t> parents;
  for (std::size_t i = 0; i < quota.size(); ++i) parents.insert(parents.end(), quota[i], i);
  Rng rng(spec.seed);
  return detail::interpolate_minority(d, minority, nn, parents, rng, trace);
}

// Majority rows replaced by k-means centroids (computed in z-space, returned
// in feature units). Output: minority rows in input order, then centroids.
inline Dataset cluster_centroids(const Dataset& d, const SamplerSpec& spec) {
  spec.validate();
  detail::require_both_classes(d);
  const auto majority = d.indices_of(0);
  const auto minority = d.indices_of(1);
  const std::size_t k = spec.n_clusters.value_or(
      static_cast<std::size_t>(std::llround(static_cast<double>(minority.size()) / spec.target_ratio)));
  if (k > majority.size()) throw DataError("cluster centroids: k exceeds majority count");
  const auto scaler = Scaler::fit(d.x);
  const Matrix z = scaler.transform(d.x.select_rows(majority));
  const auto km = kmeans(z, k, spec.seed);
  Matrix centroids(k, d.width());
  for (std::size_t c = 0; c < k; ++c) scaler.inverse_row(km.centroids.row(c), centroids.row(c));
  return detail::with_appended(d.subset(minority), centroids, 0);
}

// Majority members of Tomek links (opposite-class mutual 1-NN pairs) of d.
inline std::vector<std::size_t> tomek_majority_members(const Matrix& z, const Labels& y) {
  std::vector<std::size_t> removed;
  std::vector<std::size_t> nn_cache(y.size(), SIZE_MAX);
  auto nn = [&](std::size_t i) {
    if (nn_cache[i] == SIZE_MAX) nn_cache[i] = nearest_neighbor(z, i);
    return nn_cache[i];
  };
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] != 1) continue;
    const auto j = nn(i);
    if (j != i && y[j] == 0 && nn(j) == i) removed.push_back(j);
  }
  std::sort(removed.begin(), removed.end());
  removed.erase(std::unique(removed.begin(), removed.end()), removed.end());
  return removed;
}

inline Dataset smote_tomek(const Dataset& d, const SamplerSpec& spec, ResampleTrace* trace = nullptr) {
  Dataset over = smote(d, spec, trace);
  const auto scaler = Scaler::fit(d.x);
  const auto removed = tomek_majority_members(scaler.transform(over.x), over.y);
  std::vector<std::size_t> keep;
  keep.reserve(over.size());
  std::size_t r = 0;
  for (std::size_t i = 0; i < over.size(); ++i) {
    if (r < removed.size() && removed[r] == i) {
      ++r;
      continue;
    }
    keep.push_back(i);
  }
  if (trace) trace->removed_rows = removed;
  return over.subset(keep);
}

// Flips the m majority rows with the highest ranker P(failure) (ties to the
// lower row index). Features are untouched.
inline Dataset massaging(const Dataset& d, const SamplerSpec& spec, const ForestModel& ranker,
                         ResampleTrace* trace = nullptr) {
  spec.validate();
  detail::require_both_classes(d);
  const auto c = d.counts();
  const std::size_t m = massaging_budget(c.normal, c.failure, spec.target_ratio);
  Dataset out = d;
  if (m == 0) return out;
  const auto score = ranker.predict_proba(d.x);
  auto majority = d.indices_of(0);
  std::stable_sort(majority.begin(), majority.end(), [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
  for (std::size_t i = 0; i < m; ++i) {
    out.y[majority[i]] = 1;
    if (trace) trace->flipped_rows.push_back(majority[i]);
  }
  return out;
}

// ROS with Gaussian jitter: each duplicate gets per-feature noise with
// std = noise_scale * (sample std of that feature in d). Parent draws match
// ros() for the same seed.
inline Dataset perturbation(const Dataset& d, const SamplerSpec& spec, ResampleTrace* trace = nullptr) {
  spec.validate();
  if (d.n_minority() == 0) throw DataError("perturbation: no minority rows");
  ResampleTrace local;
  ResampleTrace* t = trace ? trace : &local;
  Dataset out = ros(d, spec, t);
  std::vector<double> sd(d.width(), 0.0);
  for (std::size_t j = 0; j < d.width(); ++j) {
    std::vector<double> col(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) col[i] = d.x(i, j);
    sd[j] = std::sqrt(sample_variance(col));
  }
  Rng noise(derive_seed(spec.seed, 1));
  for (std::size_t r = t->first_synthetic_row; r < out.size(); ++r)
    for (std::size_t j = 0; j < d.width(); ++j) out.x(r, j) += spec.noise_scale * sd[j] * standard_normal(noise);
  return out;
}

// k-means over the whole fold. Clusters whose minority share exceeds the
// fold's are visited richest-first (ties to the lower cluster index); in each,
// majority rows are flipped nearest-to-centroid first until the cluster holds
// no majority rows or the shared massaging budget runs out.
inline Dataset cluster_massaging(const Dataset& d, const SamplerSpec& spec, ResampleTrace* trace = nullptr) {
  spec.validate();
  detail::require_both_classes(d);
  const std::size_t k = spec.n_clusters.value_or(10);
  if (d.size() < k) throw DataError("cluster massaging: fewer rows than clusters");
  const auto c = d.counts();
  std::size_t budget = massaging_budget(c.normal, c.failure, spec.target_ratio);
  const Matrix z = detail::zscored(d);
  const auto km = kmeans(z, k, spec.seed);
  const double global = static_cast<double>(c.failure) / static_cast<double>(d.size());

  std::vector<std::size_t> size(k, 0), minority(k, 0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    ++size[km.assignment[i]];
    minority[km.assignment[i]] += d.y[i] == 1;
  }
  std::vector<std::size_t> order;
  for (std::size_t j = 0; j < k; ++j)
    if (size[j] > 0 && static_cast<double>(minority[j]) / static_cast<double>(size[j]) > global) order.push_back(j);
  auto share = [&](std::size_t j) { return static_cast<double>(minority[j]) / static_cast<double>(size[j]); };
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return share(a) > share(b); });

  Dataset out = d;
  for (auto j : order) {
    if (budget == 0) break;
    std::vector<std::pair<double, std::size_t>> members;
    for (std::size_t i = 0; i < d.size(); ++i)
      if (km.assignment[i] == j && d.y[i] == 0) members.push_back({squared_distance(z.row(i), km.centroids.row(j)), i});
    std::sort(members.begin(), members.end());
    for (const auto& [dist, i] : members) {
      if (budget == 0) break;
      out.y[i] = 1;
      --budget;
      if (trace) trace->flipped_rows.push_back(i);
    }
  }
  return out;
}

inline std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kRos: return "ros";
    case SamplerKind::kRus: return "rus";
    case SamplerKind::kSmote: return "smote";
    case SamplerKind::kAdasyn: return "adasyn";
    case SamplerKind::kClusterCentroids: return "cluster_centroids";
    case SamplerKind::kSmoteTomek: return "smote_tomek";
    case SamplerKind::kMassaging: return "massaging";
    case SamplerKind::kPerturbation: return "perturbation";
    case SamplerKind::kClusterMassaging: return "cluster_massaging";
  }
  return "?";
}

// Dispatch on spec.kind. Massaging needs a ranker trained on d.
inline Dataset resample(const Dataset& d, const SamplerSpec& spec, const ForestModel* ranker = nullptr,
                        ResampleTrace* trace = nullptr) {
  switch (spec.kind) {
    case SamplerKind::kRos: return ros(d, spec, trace);
    case SamplerKind::kRus: return rus(d, spec);
    case SamplerKind::kSmote: return smote(d, spec, trace);
    case SamplerKind::kAdasyn: return adasyn(d, spec, trace);
    case SamplerKind::kClusterCentroids: return cluster_centroids(d, spec);
    case SamplerKind::kSmoteTomek: return smote_tomek(d, spec, trace);
    case SamplerKind::kMassaging:
      if (!ranker) throw ConfigError("massaging requires a ranker model");
      return massaging(d, spec, *ranker, trace);
    case SamplerKind::kPerturbation: return perturbation(d, spec, trace);
    case SamplerKind::kClusterMassaging: return cluster_massaging(d, spec, trace);
  }
  throw ConfigError("unknown sampler");
}

}  // namespace imb

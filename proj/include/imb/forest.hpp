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

// CART decision trees and random forests with class and sample weighting.
//
// Trees are grown depth-first on weighted Gini impurity. A row's weight in a
// node is (bootstrap multiplicity) x (sample weight) x (class weight of its
// label). Candidate thresholds are midpoints between consecutive distinct
// feature values; a row goes left when its value is <= the threshold. Gain
// ties resolve to the lower feature index, then the lower threshold.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "json.hpp"

#include "imb/common.hpp"
#include "imb/dataset.hpp"

namespace imb {

using ClassWeights = std::array<double, 2>;

// 1 - p0^2 - p1^2 with p_k = w_k n_k / (w0 n0 + w1 n1).
inline double weighted_gini(std::array<double, 2> counts, ClassWeights weights) {
  if (counts[0] < 0 || counts[1] < 0) throw std::invalid_argument("weighted_gini: negative count");
  if (!(weights[0] > 0 && weights[1] > 0)) throw std::invalid_argument("weighted_gini: weights must be positive");
  const double a = weights[0] * counts[0];
  const double b = weights[1] * counts[1];
  const double total = a + b;
  if (total <= 0) throw std::invalid_argument("weighted_gini: both counts zero");
  const double p0 = a / total, p1 = b / total;
  return 1.0 - p0 * p0 - p1 * p1;
}

struct FitConfig {
  std::size_t n_trees = 100;
  std::size_t max_depth = 0;  // 0 = unlimited
  std::size_t min_leaf = 1;
  std::size_t feature_subsample = 0;  // 0 = ceil(sqrt(d))
  ClassWeights class_weights = {1.0, 1.0};
  bool bootstrap = true;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_trees < 1) throw ConfigError("forest: n_trees must be >= 1");
    if (min_leaf < 1) throw ConfigError("forest: min_leaf must be >= 1");
    if (!(class_weights[0] > 0 && class_weights[1] > 0)) throw ConfigError("forest: class weights must be positive");
  }

  std::size_t resolved_subsample(std::size_t d) const {
    const std::size_t k =
        feature_subsample == 0 ? static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d)))) : feature_subsample;
    return std::clamp<std::size_t>(k, 1, d);
  }

  friend bool operator==(const FitConfig&, const FitConfig&) = default;
};

template <typename Json>
void to_json(Json& j, const FitConfig& c) {
  j = Json{{"n_trees", c.n_trees},
                             {"max_depth", c.max_depth},
                             {"min_leaf", c.min_leaf},
                             {"feature_subsample", c.feature_subsample},
                             {"class_weights", {c.class_weights[0], c.class_weights[1]}},
                             {"bootstrap", c.bootstrap},
                             {"seed", c.seed}};
}

template <typename Json>
void from_json(const Json& j, FitConfig& c) {
  c.n_trees = j.at("n_trees").template get<std::size_t>();
  c.max_depth = j.at("max_depth").template get<std::size_t>();
  c.min_leaf = j.at("min_leaf").template get<std::size_t>();
  c.feature_subsample = j.at("feature_subsample").template get<std::size_t>();
  c.class_weights = {j.at("class_weights").at(0).template get<double>(), j.at("class_weights").at(1).template get<double>()};
  c.bootstrap = j.at("bootstrap").template get<bool>();
  c.seed = j.at("seed").template get<std::uint64_t>();
}

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double n0 = 0.0;  // in-bag class counts (bootstrap multiplicity)
  double n1 = 0.0;
  double proba = 0.0;  // weighted P(failure)

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  const TreeNode& leaf_for(std::span<const double> row) const {
    const TreeNode* n = &nodes[0];
    while (!n->is_leaf()) n = &nodes[row[n->feature] <= n->threshold ? n->left : n->right];
    return *n;
  }

  double proba(std::span<const double> row) const { return leaf_for(row).proba; }

  std::size_t depth() const {
    std::size_t best = 0;
    std::vector<std::pair<int, std::size_t>> stack = {{0, 0}};
    while (!stack.empty()) {
      auto [id, d] = stack.back();
      stack.pop_back();
      best = std::max(best, d);
      if (!nodes[id].is_leaf()) {
        stack.push_back({nodes[id].left, d + 1});
        stack.push_back({nodes[id].right, d + 1});
      }
    }
    return best;
  }

  friend bool operator==(const Tree&, const Tree&) = default;
};

struct ForestModel {
  std::vector<Tree> trees;
  FitConfig config;
  std::size_t n_features = 0;
  std::vector<std::vector<std::size_t>> oob_rows;  // per tree
  std::vector<ClassCounts> inbag_counts;            // per tree, with multiplicity

  std::size_t n_trees() const { return trees.size(); }

  void check_width(const Matrix& rows) const {
    if (rows.cols() != n_features)
      throw std::invalid_argument("forest: row width " + std::to_string(rows.cols()) + " != trained width " +
                                  std::to_string(n_features));
  }

  double predict_row(std::span<const double> row) const {
    double s = 0.0;
    for (const auto& t : trees) s += t.proba(row);
    return s / static_cast<double>(trees.size());
  }

  // P(failure) per row: mean of per-tree leaf probabilities.
  std::vector<double> predict_proba(const Matrix& rows) const {
    check_width(rows);
    std::vector<double> out(rows.rows());
    for (std::size_t r = 0; r < rows.rows(); ++r) out[r] = predict_row(rows.row(r));
    return out;
  }

  // Weighted mean of leaf probabilities; weights are normalized here.
  std::vector<double> predict_proba(const Matrix& rows, std::span<const double> tree_weights) const {
    check_width(rows);
    if (tree_weights.size() != trees.size()) throw std::invalid_argument("forest: tree weight count mismatch");
    const double z = std::accumulate(tree_weights.begin(), tree_weights.end(), 0.0);
    std::vector<double> out(rows.rows());
    for (std::size_t r = 0; r < rows.rows(); ++r) {
      double s = 0.0;
      for (std::size_t t = 0; t < trees.size(); ++t) s += tree_weights[t] * trees[t].proba(rows.row(r));
      out[r] = std::clamp(s / z, 0.0, 1.0);
    }
    return out;
  }

  // Label 1 iff P(failure) >= 0.5.
  Labels predict(const Matrix& rows) const {
    const auto p = predict_proba(rows);
    Labels out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] >= 0.5 ? 1 : 0;
    return out;
  }

  friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

// Per-row bootstrap multiplicities for one tree; 0 means out-of-bag.
using BootstrapFn = std::function<std::vector<std::uint32_t>(const Dataset&, Rng&)>;

struct GrowOptions {
  std::span<const double> sample_weights;  // empty = all ones
  BootstrapFn bootstrap;                   // empty = uniform with replacement
};

namespace detail {

// Column-major copy of the features plus a per-feature argsort, shared by
// every tree of one fit.
struct ColumnStore {
  std::vector<std::vector<double>> values;
  std::vector<std::vector<std::uint32_t>> order;

  explicit ColumnStore(const Matrix& x) : values(x.cols()), order(x.cols()) {
    for (std::size_t f = 0; f < x.cols(); ++f) {
      auto& col = values[f];
      col.resize(x.rows());
      for (std::size_t r = 0; r < x.rows(); ++r) col[r] = x(r, f);
      auto& ord = order[f];
      ord.resize(x.rows());
      std::iota(ord.begin(), ord.end(), 0u);
      std::stable_sort(ord.begin(), ord.end(), [&](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
    }
  }
};

// Grows one tree. Each feature keeps the in-bag rows sorted by that feature;
// a node owns the same [begin, end) range in every feature list, and a split
// stably partitions all lists so the ranges stay sorted.
class TreeGrower {
 public:
  TreeGrower(const ColumnStore& cols, const Labels& y, const FitConfig& cfg, std::span<const double> row_weight,
             std::span<const std::uint32_t> multiplicity, Rng& rng)
      : cols_(cols),
        y_(y),
        cfg_(cfg),
        w_(row_weight),
        mult_(multiplicity),
        rng_(rng),
        d_(cols.values.size()),
        mtry_(cfg.resolved_subsample(cols.values.size())),
        goes_left_(y.size(), 0) {
    sorted_.resize(d_);
    for (std::size_t f = 0; f < d_; ++f) {
      sorted_[f].reserve(y.size());
      for (auto r : cols.order[f])
        if (mult_[r] > 0) sorted_[f].push_back(r);
    }
    features_.resize(d_);
    buffer_.reserve(sorted_.empty() ? 0 : sorted_[0].size());
  }

  Tree grow() {
    tree_.nodes.clear();
    tree_.nodes.emplace_back();
    build(0, 0, sorted_[0].size(), 0);
    return std::move(tree_);
  }

 private:
  struct Candidate {
    int feature = -1;
    double threshold = 0.0;
    double gain = -1.0;
  };

  void build(int node_id, std::size_t begin, std::size_t end, std::size_t depth) {
    double s0 = 0, s1 = 0, c0 = 0, c1 = 0;
    for (std::size_t k = begin; k < end; ++k) {
      const auto r = sorted_[0][k];
      if (y_[r] == 1) {
        s1 += w_[r];
        c1 += mult_[r];
      } else {
        s0 += w_[r];
        c0 += mult_[r];
      }
    }
    {
      TreeNode& node = tree_.nodes[node_id];
      node.n0 = c0;
      node.n1 = c1;
      const double a = cfg_.class_weights[0] * s0, b = cfg_.class_weights[1] * s1;
      node.proba = a + b > 0 ? b / (a + b) : 0.0;
    }
    const bool pure = c0 == 0 || c1 == 0;
    const bool depth_cap = cfg_.max_depth != 0 && depth >= cfg_.max_depth;
    if (pure || depth_cap || c0 + c1 < 2.0 * static_cast<double>(cfg_.min_leaf)) return;

    const Candidate best = find_split(begin, end, s0, s1);
    if (best.feature < 0) return;

    const auto& split_col = cols_.values[static_cast<std::size_t>(best.feature)];
    std::size_t n_left = 0;
    for (std::size_t k = begin; k < end; ++k) {
      const auto r = sorted_[0][k];
      goes_left_[r] = split_col[r] <= best.threshold;
      n_left += goes_left_[r];
    }
    for (auto& list : sorted_) {
      buffer_.clear();
      std::size_t out = begin;
      for (std::size_t k = begin; k < end; ++k) {
        const auto r = list[k];
        if (goes_left_[r]) list[out++] = r;
        else buffer_.push_back(r);
      }
      std::copy(buffer_.begin(), buffer_.end(), list.begin() + static_cast<std::ptrdiff_t>(out));
    }
    const std::size_t mid = begin + n_left;

    const int left = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const int right = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    TreeNode& node = tree_.nodes[node_id];
    node.feature = best.feature;
    node.threshold = best.threshold;
    node.left = left;
    node.right = right;
    build(left, begin, mid, depth + 1);
    build(right, mid, end, depth + 1);
  }

  Candidate find_split(std::size_t begin, std::size_t end, double s0, double s1) {
    std::iota(features_.begin(), features_.end(), 0);
    for (std::size_t i = 0; i < mtry_; ++i) std::swap(features_[i], features_[i + uniform_index(rng_, d_ - i)]);
    std::vector<std::size_t> sampled(features_.begin(), features_.begin() + static_cast<std::ptrdiff_t>(mtry_));
    std::sort(sampled.begin(), sampled.end());

    Candidate best;
    for (auto f : sampled) evaluate_feature(f, begin, end, s0, s1, best);
    if (best.feature < 0 && mtry_ < d_) {
      // Every sampled feature was constant here; fall back to the rest.
      std::vector<std::size_t> rest(features_.begin() + static_cast<std::ptrdiff_t>(mtry_), features_.end());
      std::sort(rest.begin(), rest.end());
      for (auto f : rest) evaluate_feature(f, begin, end, s0, s1, best);
    }
    return best;
  }

  void evaluate_feature(std::size_t f, std::size_t begin, std::size_t end, double s0, double s1, Candidate& best) {
    const auto& col = cols_.values[f];
    const auto& list = sorted_[f];
    if (col[list[begin]] == col[list[end - 1]]) return;

    const double cw0 = cfg_.class_weights[0], cw1 = cfg_.class_weights[1];
    const double a_tot = cw0 * s0, b_tot = cw1 * s1, w_tot = a_tot + b_tot;
    const double parent = (a_tot * a_tot + b_tot * b_tot) / w_tot;
    double count_total = 0;
    for (std::size_t k = begin; k < end; ++k) count_total += mult_[list[k]];
    const double min_leaf = static_cast<double>(cfg_.min_leaf);

    double a_left = 0, b_left = 0, count_left = 0;
    for (std::size_t k = begin; k + 1 < end; ++k) {
      const auto r = list[k];
      if (y_[r] == 1) b_left += cw1 * w_[r];
      else a_left += cw0 * w_[r];
      count_left += mult_[r];
      const double v = col[r], next = col[list[k + 1]];
      if (v == next) continue;
      if (count_left < min_leaf || count_total - count_left < min_leaf) continue;
      const double w_left = a_left + b_left;
      const double a_right = a_tot - a_left, b_right = b_tot - b_left;
      const double w_right = a_right + b_right;
      if (w_left <= 0 || w_right <= 0) continue;
      const double proxy = (a_left * a_left + b_left * b_left) / w_left +
                           (a_right * a_right + b_right * b_right) / w_right;
      const double gain = (proxy - parent) / w_tot;
      if (best.feature < 0 || gain > best.gain + 1e-12) {
        double thr = v + (next - v) * 0.5;
        if (!(thr < next)) thr = v;
        best = {static_cast<int>(f), thr, gain};
      }
    }
  }

  const ColumnStore& cols_;
  const Labels& y_;
  const FitConfig& cfg_;
  std::span<const double> w_;
  std::span<const std::uint32_t> mult_;
  Rng& rng_;
  std::size_t d_;
  std::size_t mtry_;
  std::vector<std::vector<std::uint32_t>> sorted_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<std::size_t> features_;
  std::vector<std::uint32_t> buffer_;
  Tree tree_;
};

inline std::vector<std::uint32_t> uniform_bootstrap(const Dataset& d, Rng& rng) {
  std::vector<std::uint32_t> mult(d.size(), 0);
  for (std::size_t i = 0; i < d.size(); ++i) ++mult[uniform_index(rng, d.size())];
  return mult;
}

}  // namespace detail

// Grows cfg.n_trees trees. Tree t draws from an RNG seeded with
// derive_seed(cfg.seed, t), so results depend only on (data, cfg).
inline ForestModel fit(const Dataset& train, const FitConfig& cfg, const GrowOptions& options = {}) {
  cfg.validate();
  if (train.width() == 0) throw DataError("forest: no features");
  if (train.x.rows() != train.size()) throw DataError("forest: row/label count mismatch");
  const auto counts = train.counts();
  if (counts.normal == 0 || counts.failure == 0) throw DataError("forest: training set has a single class");
  if (!options.sample_weights.empty() && options.sample_weights.size() != train.size())
    throw std::invalid_argument("forest: sample weight count mismatch");

  ForestModel m;
  m.config = cfg;
  m.n_features = train.width();
  m.trees.reserve(cfg.n_trees);
  std::vector<double> weight(train.size());
  const detail::ColumnStore columns(train.x);
  for (std::size_t t = 0; t < cfg.n_trees; ++t) {
    Rng rng(derive_seed(cfg.seed, t));
    std::vector<std::uint32_t> mult;
    if (options.bootstrap) {
      mult = options.bootstrap(train, rng);
      if (mult.size() != train.size()) throw std::logic_error("forest: bootstrap size mismatch");
    } else if (cfg.bootstrap) {
      mult = detail::uniform_bootstrap(train, rng);
    } else {
      mult.assign(train.size(), 1);
    }
    ClassCounts inbag;
    std::vector<std::size_t> oob;
    for (std::size_t i = 0; i < train.size(); ++i) {
      const double sw = options.sample_weights.empty() ? 1.0 : options.sample_weights[i];
      weight[i] = mult[i] * sw;
      if (mult[i] == 0) oob.push_back(i);
      (train.y[i] == 1 ? inbag.failure : inbag.normal) += mult[i];
    }
    if (inbag.normal + inbag.failure == 0) throw std::logic_error("forest: empty bootstrap");
    detail::TreeGrower grower(columns, train.y, cfg, weight, mult, rng);
    m.trees.push_back(grower.grow());
    m.oob_rows.push_back(std::move(oob));
    m.inbag_counts.push_back(inbag);
  }
  return m;
}

// ---------------------------------------------------------------------------
// JSON envelope

inline nlohmann::ordered_json forest_to_json(const ForestModel& m) {
  nlohmann::ordered_json j;
  j["format"] = "imbench-forest";
  j["version"] = 1;
  j["config"] = m.config;
  j["n_features"] = m.n_features;
  auto& trees = j["trees"] = nlohmann::ordered_json::array();
  for (const auto& t : m.trees) {
    nlohmann::ordered_json tj;
    std::vector<int> feature, left, right;
    std::vector<double> threshold, n0, n1, proba;
    for (const auto& n : t.nodes) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      n0.push_back(n.n0);
      n1.push_back(n.n1);
      proba.push_back(n.proba);
    }
    tj["feature"] = feature;
    tj["threshold"] = threshold;
    tj["left"] = left;
    tj["right"] = right;
    tj["n0"] = n0;
    tj["n1"] = n1;
    tj["proba"] = proba;
    trees.push_back(std::move(tj));
  }
  j["oob_rows"] = m.oob_rows;
  auto& inbag = j["inbag_counts"] = nlohmann::ordered_json::array();
  for (const auto& c : m.inbag_counts) inbag.push_back(nlohmann::ordered_json::array({c.normal, c.failure}));
  return j;
}

inline ForestModel forest_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "imbench-forest") throw DataError("model: not a forest document");
  if (j.value("version", 0) != 1) throw DataError("model: unsupported version");
  ForestModel m;
  m.config = j.at("config").get<FitConfig>();
  m.n_features = j.at("n_features").get<std::size_t>();
  for (const auto& tj : j.at("trees")) {
    Tree t;
    const auto feature = tj.at("feature").get<std::vector<int>>();
    const auto threshold = tj.at("threshold").get<std::vector<double>>();
    const auto left = tj.at("left").get<std::vector<int>>();
    const auto right = tj.at("right").get<std::vector<int>>();
    const auto n0 = tj.at("n0").get<std::vector<double>>();
    const auto n1 = tj.at("n1").get<std::vector<double>>();
    const auto proba = tj.at("proba").get<std::vector<double>>();
    const std::size_t n = feature.size();
    if (threshold.size() != n || left.size() != n || right.size() != n || n0.size() != n || n1.size() != n ||
        proba.size() != n || n == 0)
      throw DataError("model: inconsistent tree arrays");
    for (std::size_t i = 0; i < n; ++i) {
      TreeNode node{feature[i], threshold[i], left[i], right[i], n0[i], n1[i], proba[i]};
      if (!node.is_leaf()) {
        const auto in_range = [&](int c) { return c > 0 && static_cast<std::size_t>(c) < n; };
        if (!in_range(node.left) || !in_range(node.right) ||
            static_cast<std::size_t>(node.feature) >= m.n_features)
          throw DataError("model: malformed tree node");
      }
      t.nodes.push_back(node);
    }
    m.trees.push_back(std::move(t));
  }
  m.oob_rows = j.at("oob_rows").get<std::vector<std::vector<std::size_t>>>();
  for (const auto& c : j.at("inbag_counts"))
    m.inbag_counts.push_back({c.at(0).get<std::size_t>(), c.at(1).get<std::size_t>()});
  return m;
}

}  // namespace imb

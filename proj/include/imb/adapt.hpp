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

// In-processing: learners that change how the forest is trained rather than
// the data it sees. Every model here answers predict_proba like ForestModel.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "imb/common.hpp"
#include "imb/dataset.hpp"
#include "imb/decide.hpp"
#include "imb/forest.hpp"
#include "imb/resample.hpp"

namespace imb {

// Inverse-frequency weights (1, majority / minority).
inline ClassWeights inverse_frequency(const ClassCounts& c) {
  if (c.failure == 0) throw DataError("no minority rows");
  return {1.0, static_cast<double>(c.normal) / static_cast<double>(c.failure)};
}

inline ForestModel cost_sensitive_fit(const Dataset& train, FitConfig cfg) {
  cfg.class_weights = inverse_frequency(train.counts());
  return fit(train, cfg);
}

struct EnsembleModel {
  enum class Aggregation { kMeanProba, kWeightedVote };

  std::vector<ForestModel> members;
  std::vector<double> weights;  // sums to 1
  Aggregation aggregation = Aggregation::kMeanProba;

  std::size_t n_features() const { return members.front().n_features; }

  // Mean-proba: weighted mean of member probabilities. Weighted-vote:
  // logistic of the normalized margin sum_t w_t h_t(x), h in {-1, +1}.
  std::vector<double> predict_proba(const Matrix& rows) const {
    if (members.empty()) throw std::logic_error("ensemble: no members");
    std::vector<double> out(rows.rows(), 0.0);
    for (std::size_t m = 0; m < members.size(); ++m) {
      const auto p = members[m].predict_proba(rows);
      for (std::size_t r = 0; r < p.size(); ++r)
        out[r] += weights[m] * (aggregation == Aggregation::kMeanProba ? p[r] : (p[r] >= 0.5 ? 1.0 : -1.0));
    }
    for (auto& v : out) v = aggregation == Aggregation::kMeanProba ? std::clamp(v, 0.0, 1.0) : detail::sigmoid(v);
    return out;
  }

  std::size_t total_trees() const {
    std::size_t n = 0;
    for (const auto& m : members) n += m.n_trees();
    return n;
  }
};

// Balanced bagging: member i fits on RUS(train, ratio 1) drawn with seed
// derive_seed(cfg.seed, i); members are averaged with equal weight.
inline EnsembleModel bagging_fit(const Dataset& train, std::size_t n_members, const FitConfig& cfg) {
  if (n_members < 1) throw ConfigError("bagging: need at least one member");
  EnsembleModel e;
  for (std::size_t i = 0; i < n_members; ++i) {
    const std::uint64_t member_seed = derive_seed(cfg.seed, i);
    SamplerSpec spec;
    spec.kind = SamplerKind::kRus;
    spec.seed = member_seed;
    FitConfig member_cfg = cfg;
    member_cfg.seed = derive_seed(member_seed, 1);
    e.members.push_back(fit(rus(train, spec), member_cfg));
  }
  e.weights.assign(n_members, 1.0 / static_cast<double>(n_members));
  return e;
}

struct BoostRound {
  std::vector<double> distribution;  // D_t, used to fit this round
  double error = 0.0;                // weighted training error (unclamped)
  double alpha = 0.0;
};

struct BoostTrace {
  std::vector<BoostRound> rounds;
  std::vector<double> final_distribution;  // D after the last update
  bool degenerate_first_round = false;
};

inline constexpr double kBoostAlphaCap = 6.907755278982137;  // ln(1e6) / 2

// AdaBoost.M1. Round t fits `weak` (seed derive_seed(weak.seed, t)) with
// sample weights D_t; stops early on zero error or error >= 0.5.
inline EnsembleModel adaboost(const Dataset& train, std::size_t rounds, const FitConfig& weak,
                              BoostTrace* trace = nullptr) {
  if (rounds < 1) throw ConfigError("boosting: need at least one round");
  const std::size_t n = train.size();
  std::vector<double> dist(n, 1.0 / static_cast<double>(n));
  EnsembleModel e;
  e.aggregation = EnsembleModel::Aggregation::kWeightedVote;
  BoostTrace local;
  for (std::size_t t = 0; t < rounds; ++t) {
    FitConfig cfg = weak;
    cfg.seed = derive_seed(weak.seed, t);
    GrowOptions opts;
    std::vector<double> scaled(dist);
    for (auto& v : scaled) v *= static_cast<double>(n);
    opts.sample_weights = scaled;
    ForestModel model = fit(train, cfg, opts);
    const Labels pred = model.predict(train.x);
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (pred[i] != train.y[i]) err += dist[i];

    BoostRound round{dist, err, 0.0};
    if (err >= 0.5) {
      if (t == 0) {
        warn("boosting: first-round error >= 0.5; returning a single unweighted member");
        local.degenerate_first_round = true;
        round.alpha = 1.0;
        local.rounds.push_back(round);
        e.members.push_back(std::move(model));
        e.weights.push_back(1.0);
      }
      break;
    }
    if (err == 0.0) {
      round.alpha = kBoostAlphaCap;
      local.rounds.push_back(round);
      e.members.push_back(std::move(model));
      e.weights.push_back(round.alpha);
      break;
    }
    const double eps = std::clamp(err, 1e-6, 1.0 - 1e-6);
    round.alpha = 0.5 * std::log((1.0 - eps) / eps);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double agree = pred[i] == train.y[i] ? 1.0 : -1.0;
      dist[i] *= std::exp(-round.alpha * agree);
      z += dist[i];
    }
    for (auto& v : dist) v /= z;
    local.rounds.push_back(round);
    e.members.push_back(std::move(model));
    e.weights.push_back(round.alpha);
  }
  const double total = std::accumulate(e.weights.begin(), e.weights.end(), 0.0);
  for (auto& w : e.weights) w /= total;
  local.final_distribution = dist;
  if (trace) *trace = std::move(local);
  return e;
}

// Boosting over depth-3 forests built from cfg.
inline EnsembleModel boosting_fit(const Dataset& train, std::size_t rounds, const FitConfig& cfg,
                                  BoostTrace* trace = nullptr) {
  FitConfig weak = cfg;
  weak.max_depth = 3;
  return adaboost(train, rounds, weak, trace);
}

// Each tree draws n_minority rows per class: minority with replacement,
// majority without replacement when there are enough rows.
inline std::vector<std::uint32_t> balanced_bootstrap(const Dataset& d, Rng& rng) {
  auto minority = d.indices_of(1);
  auto majority = d.indices_of(0);
  const std::size_t m = minority.size();
  std::vector<std::uint32_t> mult(d.size(), 0);
  for (std::size_t i = 0; i < m; ++i) ++mult[minority[uniform_index(rng, m)]];
  if (majority.size() >= m) {
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = i + uniform_index(rng, majority.size() - i);
      std::swap(majority[i], majority[j]);
      ++mult[majority[i]];
    }
  } else {
    for (std::size_t i = 0; i < m; ++i) ++mult[majority[uniform_index(rng, majority.size())]];
  }
  return mult;
}

inline ForestModel balanced_rf_fit(const Dataset& train, const FitConfig& cfg) {
  GrowOptions opts;
  opts.bootstrap = balanced_bootstrap;
  ForestModel m = fit(train, cfg, opts);
  for (const auto& c : m.inbag_counts)
    if (c.normal != c.failure) throw std::logic_error("brf: unbalanced bootstrap");
  return m;
}

// Depth-2 tree, or a constant prior when a fold held one class.
struct BaseModel {
  std::optional<ForestModel> tree;
  double prior = 0.0;

  std::vector<double> predict_proba(const Matrix& rows) const {
    if (tree) return tree->predict_proba(rows);
    return std::vector<double>(rows.rows(), prior);
  }
};

inline BaseModel base_fit(const Dataset& d, std::uint64_t seed) {
  BaseModel b;
  const auto c = d.counts();
  b.prior = d.size() == 0 ? 0.0 : static_cast<double>(c.failure) / static_cast<double>(d.size());
  if (c.normal == 0 || c.failure == 0) return b;
  FitConfig cfg;
  cfg.n_trees = 1;
  cfg.max_depth = 2;
  cfg.bootstrap = false;
  cfg.feature_subsample = d.width();
  cfg.seed = seed;
  b.tree = fit(d, cfg);
  return b;
}

struct MetaModel {
  BaseModel base;
  ForestModel main;  // trained on features plus the base probability column
  std::size_t folds = 5;

  std::size_t n_features() const { return main.n_features - 1; }

  Matrix augment(const Matrix& rows) const {
    const auto p = base.predict_proba(rows);
    return rows.with_column(p);
  }

  std::vector<double> predict_proba(const Matrix& rows) const {
    if (rows.cols() != n_features())
      throw std::invalid_argument("meta: row width " + std::to_string(rows.cols()) + " != trained width " +
                                  std::to_string(n_features()));
    return main.predict_proba(augment(rows));
  }
};

inline constexpr const char* kMetaFeatureName = "meta_proba";

inline Dataset with_meta_column(const Dataset& d, std::span<const double> meta) {
  Dataset out;
  out.schema = d.schema;
  out.schema.names.push_back(kMetaFeatureName);
  out.schema.kinds.push_back(FeatureKind::kContinuous);
  out.x = d.x.with_column(meta);
  out.y = d.y;
  return out;
}

// Out-of-fold base probabilities over stratified folds.
inline std::vector<double> out_of_fold_meta(const Dataset& train, std::size_t folds, std::uint64_t seed) {
  if (train.size() < folds) throw DataError("meta: fewer rows than folds");
  std::vector<std::size_t> fold_of(train.size());
  Rng rng(seed);
  for (int label : {0, 1}) {
    auto idx = train.indices_of(label);
    shuffle(idx, rng);
    for (std::size_t k = 0; k < idx.size(); ++k) fold_of[idx[k]] = k % folds;
  }
  std::vector<double> meta(train.size(), 0.0);
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> fit_rows, held;
    for (std::size_t i = 0; i < train.size(); ++i) (fold_of[i] == f ? held : fit_rows).push_back(i);
    if (held.empty()) continue;
    const BaseModel b = base_fit(train.subset(fit_rows), derive_seed(seed, f + 1));
    const auto p = b.predict_proba(train.x.select_rows(held));
    for (std::size_t k = 0; k < held.size(); ++k) meta[held[k]] = p[k];
  }
  return meta;
}

inline MetaModel meta_fit(const Dataset& train, const FitConfig& cfg, std::size_t folds = 5) {
  if (folds < 2) throw ConfigError("meta: need at least 2 folds");
  MetaModel m;
  m.folds = folds;
  const std::uint64_t seed = derive_seed(cfg.seed, 0x6d657461);
  const auto meta = out_of_fold_meta(train, folds, seed);
  m.base = base_fit(train, seed);
  m.main = fit(with_meta_column(train, meta), cfg);
  return m;
}

using Classifier = std::variant<ForestModel, EnsembleModel, MetaModel>;

inline std::vector<double> classifier_proba(const Classifier& c, const Matrix& rows) {
  return std::visit([&](const auto& m) { return m.predict_proba(rows); }, c);
}

inline std::size_t classifier_width(const Classifier& c) {
  if (const auto* f = std::get_if<ForestModel>(&c)) return f->n_features;
  if (const auto* e = std::get_if<EnsembleModel>(&c)) return e->n_features();
  return std::get<MetaModel>(c).n_features();
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::ordered_json classifier_to_json(const Classifier& c) {
  nlohmann::ordered_json j;
  if (const auto* f = std::get_if<ForestModel>(&c)) {
    j["kind"] = "forest";
    j["forest"] = forest_to_json(*f);
  } else if (const auto* e = std::get_if<EnsembleModel>(&c)) {
    j["kind"] = "ensemble";
    j["aggregation"] = e->aggregation == EnsembleModel::Aggregation::kMeanProba ? "mean-proba" : "weighted-vote";
    j["weights"] = e->weights;
    j["members"] = nlohmann::ordered_json::array();
    for (const auto& m : e->members) j["members"].push_back(forest_to_json(m));
  } else {
    const auto& m = std::get<MetaModel>(c);
    j["kind"] = "meta";
    j["folds"] = m.folds;
    j["base_prior"] = m.base.prior;
    j["base"] = m.base.tree ? forest_to_json(*m.base.tree) : nlohmann::ordered_json(nullptr);
    j["main"] = forest_to_json(m.main);
  }
  return j;
}

inline Classifier classifier_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "forest") return forest_from_json(j.at("forest"));
  if (kind == "ensemble") {
    EnsembleModel e;
    const std::string agg = j.at("aggregation").get<std::string>();
    if (agg == "mean-proba")
      e.aggregation = EnsembleModel::Aggregation::kMeanProba;
    else if (agg == "weighted-vote")
      e.aggregation = EnsembleModel::Aggregation::kWeightedVote;
    else
      throw DataError("model: unknown aggregation '" + agg + "'");
    e.weights = j.at("weights").get<std::vector<double>>();
    for (const auto& mj : j.at("members")) e.members.push_back(forest_from_json(mj));
    if (e.members.empty() || e.members.size() != e.weights.size()) throw DataError("model: bad ensemble members");
    return e;
  }
  if (kind == "meta") {
    MetaModel m;
    m.folds = j.at("folds").get<std::size_t>();
    m.base.prior = j.at("base_prior").get<double>();
    if (!j.at("base").is_null()) m.base.tree = forest_from_json(j.at("base"));
    m.main = forest_from_json(j.at("main"));
    if (m.main.n_features < 1) throw DataError("model: meta model without features");
    return m;
  }
  throw DataError("model: unknown kind '" + kind + "'");
}

}  // namespace imb

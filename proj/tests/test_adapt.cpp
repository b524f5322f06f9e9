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

#include <numeric>

#include "imb/adapt.hpp"
#include "test_util.hpp"

using namespace imb;

namespace {

FitConfig stump() {
  FitConfig cfg;
  cfg.n_trees = 1;
  cfg.max_depth = 1;
  cfg.bootstrap = false;
  cfg.feature_subsample = 1;
  return cfg;
}

FitConfig small_forest(std::uint64_t seed = 3) {
  FitConfig cfg;
  cfg.n_trees = 10;
  cfg.seed = seed;
  return cfg;
}

void expect_distribution(const std::vector<double>& got, const std::vector<double>& want) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 1e-12) << "index " << i;
}

}  // namespace

// Exact fractions from tests/oracles/boosting_trace.py.
TEST(Boosting, ThreeRoundStumpTrace) {
  const auto d = fixtures::line_dataset({1, 2, 3, 4, 5, 6}, {0, 1, 0, 0, 1, 1});
  BoostTrace trace;
  const auto e = adaboost(d, 3, stump(), &trace);
  ASSERT_EQ(trace.rounds.size(), 3u);
  EXPECT_NEAR(trace.rounds[0].error, 1.0 / 6.0, 1e-12);
  EXPECT_NEAR(trace.rounds[1].error, 0.2, 1e-12);
  EXPECT_NEAR(trace.rounds[2].error, 3.0 / 16.0, 1e-12);
  EXPECT_NEAR(trace.rounds[0].alpha, 0.8047189562170503, 1e-12);
  EXPECT_NEAR(trace.rounds[1].alpha, 0.6931471805599453, 1e-12);
  EXPECT_NEAR(trace.rounds[2].alpha, 0.7331685343967135, 1e-12);
  expect_distribution(trace.rounds[0].distribution, std::vector<double>(6, 1.0 / 6.0));
  expect_distribution(trace.rounds[1].distribution, {0.1, 0.5, 0.1, 0.1, 0.1, 0.1});
  expect_distribution(trace.rounds[2].distribution, {0.0625, 0.3125, 0.25, 0.25, 0.0625, 0.0625});
  expect_distribution(trace.final_distribution, {1.0 / 6, 5.0 / 26, 2.0 / 13, 2.0 / 13, 1.0 / 6, 1.0 / 6});
  EXPECT_EQ(e.members.size(), 3u);
  EXPECT_EQ(e.members[0].predict(d.x), (Labels{0, 0, 0, 0, 1, 1}));
  EXPECT_EQ(e.members[1].predict(d.x), (Labels{0, 1, 1, 1, 1, 1}));
  EXPECT_EQ(e.members[2].predict(d.x), (Labels{1, 1, 0, 0, 0, 0}));
  EXPECT_NEAR(std::accumulate(e.weights.begin(), e.weights.end(), 0.0), 1.0, 1e-12);
}

TEST(Boosting, DistributionsStayNormalized) {
  const auto d = fixtures::gaussian_blobs(120, 20, 3, 1.0, 4);
  BoostTrace trace;
  boosting_fit(d, 10, small_forest(), &trace);
  for (const auto& r : trace.rounds) EXPECT_NEAR(std::accumulate(r.distribution.begin(), r.distribution.end(), 0.0), 1.0, 1e-9);
  EXPECT_NEAR(std::accumulate(trace.final_distribution.begin(), trace.final_distribution.end(), 0.0), 1.0, 1e-9);
}

TEST(Boosting, PerfectWeakLearnerStopsWithCappedAlpha) {
  const auto d = fixtures::line_dataset({1, 2, 3, 10, 11}, {0, 0, 0, 1, 1});
  BoostTrace trace;
  const auto e = adaboost(d, 5, stump(), &trace);
  ASSERT_EQ(trace.rounds.size(), 1u);
  EXPECT_DOUBLE_EQ(trace.rounds[0].error, 0.0);
  EXPECT_DOUBLE_EQ(trace.rounds[0].alpha, kBoostAlphaCap);
  EXPECT_EQ(e.members.size(), 1u);
  EXPECT_EQ(e.weights, (std::vector<double>{1.0}));
}

TEST(Boosting, UselessFirstRoundKeepsOneMember) {
  // Constant feature: no split exists, the stump predicts the majority.
  const auto d = fixtures::line_dataset({1, 1, 1, 1}, {0, 1, 0, 1});
  BoostTrace trace;
  const auto e = adaboost(d, 4, stump(), &trace);
  EXPECT_TRUE(trace.degenerate_first_round);
  EXPECT_EQ(e.members.size(), 1u);
  EXPECT_EQ(e.weights, (std::vector<double>{1.0}));
}

TEST(CostSensitive, InverseFrequencyWeights) {
  EXPECT_EQ(inverse_frequency({90, 10}), (ClassWeights{1.0, 9.0}));
  EXPECT_THROW(inverse_frequency({10, 0}), DataError);
  const auto d = fixtures::gaussian_blobs(90, 10, 2, 1.0, 5);
  EXPECT_EQ(cost_sensitive_fit(d, small_forest()).config.class_weights, (ClassWeights{1.0, 9.0}));
}

TEST(Bagging, MembersDifferAndSingleMemberIsRusThenFit) {
  const auto d = fixtures::gaussian_blobs(150, 15, 2, 1.0, 6);
  const auto e = bagging_fit(d, 4, small_forest());
  ASSERT_EQ(e.members.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = i + 1; j < 4; ++j) EXPECT_NE(e.members[i], e.members[j]);
  for (const auto& m : e.members) EXPECT_EQ(m.inbag_counts.size(), 10u);

  const auto one = bagging_fit(d, 1, small_forest());
  SamplerSpec s;
  s.kind = SamplerKind::kRus;
  s.seed = derive_seed(3, 0);
  FitConfig cfg = small_forest();
  cfg.seed = derive_seed(s.seed, 1);
  const auto direct = fit(rus(d, s), cfg);
  EXPECT_EQ(one.predict_proba(d.x), direct.predict_proba(d.x));
  EXPECT_THROW(bagging_fit(d, 0, small_forest()), ConfigError);
}

TEST(BalancedRf, EveryTreeSeesBalancedClasses) {
  const auto d = fixtures::gaussian_blobs(200, 12, 2, 1.0, 7);
  const auto m = balanced_rf_fit(d, small_forest());
  ASSERT_EQ(m.inbag_counts.size(), 10u);
  for (const auto& c : m.inbag_counts) {
    EXPECT_EQ(c.normal, 12u);
    EXPECT_EQ(c.failure, 12u);
  }
  const auto flipped = fixtures::gaussian_blobs(5, 12, 2, 1.0, 8);
  for (const auto& c : balanced_rf_fit(flipped, small_forest()).inbag_counts) EXPECT_EQ(c.normal, c.failure);
}

TEST(Meta, AddsOneColumnAndPredictsOnRawRows) {
  const auto d = fixtures::gaussian_blobs(100, 25, 3, 1.5, 9);
  const auto m = meta_fit(d, small_forest(), 5);
  EXPECT_EQ(m.main.n_features, 4u);
  EXPECT_EQ(m.n_features(), 3u);
  EXPECT_EQ(m.predict_proba(d.x).size(), d.size());
  EXPECT_THROW(m.predict_proba(m.augment(d.x)), std::invalid_argument);
  EXPECT_EQ(with_meta_column(d, std::vector<double>(d.size(), 0.5)).schema.names.back(), kMetaFeatureName);
  EXPECT_THROW(meta_fit(d, small_forest(), 1), ConfigError);
}

TEST(Meta, OutOfFoldValuesComeFromHeldOutModels) {
  const auto d = fixtures::gaussian_blobs(60, 10, 2, 2.0, 10);
  const auto meta = out_of_fold_meta(d, 5, 1);
  for (double v : meta) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  EXPECT_EQ(meta, out_of_fold_meta(d, 5, 1));
  const auto prior = base_fit(fixtures::line_dataset({1, 2, 3}, {0, 0, 0}), 1);
  EXPECT_FALSE(prior.tree.has_value());
  EXPECT_EQ(prior.predict_proba(Matrix(2, 1)), (std::vector<double>{0.0, 0.0}));
}

TEST(Classifier, JsonRoundTripPreservesPredictions) {
  const auto d = fixtures::gaussian_blobs(80, 20, 2, 1.5, 11);
  const std::vector<Classifier> models = {fit(d, small_forest()), bagging_fit(d, 3, small_forest()),
                                          boosting_fit(d, 4, small_forest()), meta_fit(d, small_forest(), 3)};
  for (const auto& c : models) {
    const auto back = classifier_from_json(nlohmann::json::parse(classifier_to_json(c).dump()));
    EXPECT_EQ(back.index(), c.index());
    EXPECT_EQ(classifier_width(back), 2u);
    EXPECT_EQ(classifier_proba(back, d.x), classifier_proba(c, d.x));
  }
}

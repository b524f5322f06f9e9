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

#include "imb/decide.hpp"
#include "test_util.hpp"

using namespace imb;

namespace {

// Scores with P(y=1 | s) = s drawn uniformly.
void calibrated_sample(std::size_t n, std::uint64_t seed, std::vector<double>& p, Labels& y) {
  Rng rng(seed);
  p.resize(n);
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = uniform01(rng);
    y[i] = uniform01(rng) < p[i] ? 1 : 0;
  }
}

}  // namespace

TEST(Threshold, SeparableScoresGetPerfectF1) {
  const std::vector<double> p{0.1, 0.2, 0.3, 0.7, 0.8};
  const Labels y{0, 0, 0, 1, 1};
  const auto c = tune_threshold_detailed(p, y);
  EXPECT_DOUBLE_EQ(c.f1, 1.0);
  EXPECT_DOUBLE_EQ(c.threshold, 0.5);
}

TEST(Threshold, TieBreakPrefersCloserToHalf) {
  // Every cut between 0.2 and 0.9 gives the same F1; 0.5 lies inside.
  const std::vector<double> p{0.1, 0.2, 0.9, 0.95};
  const Labels y{0, 0, 1, 1};
  EXPECT_DOUBLE_EQ(tune_threshold(p, y), 0.55);
  const std::vector<double> q{0.1, 0.2, 0.3, 0.4};
  EXPECT_DOUBLE_EQ(tune_threshold(q, Labels{0, 0, 1, 1}), 0.25);
}

TEST(Threshold, MatchesDenseGrid) {
  Rng rng(11);
  for (int set = 0; set < 20; ++set) {
    std::vector<double> p(60);
    Labels y(60);
    for (std::size_t i = 0; i < p.size(); ++i) {
      y[i] = i < 12 ? 1 : 0;
      p[i] = std::round((uniform01(rng) * 0.6 + (y[i] ? 0.3 : 0.0)) * 1000.0) / 1000.0;
    }
    double grid_best = 0.0;
    for (int g = 0; g <= 10000; ++g) grid_best = std::max(grid_best, f1_at_threshold(p, y, g / 10000.0));
    const auto c = tune_threshold_detailed(p, y);
    EXPECT_GE(c.f1, grid_best - 1e-12);
    EXPECT_DOUBLE_EQ(f1_at_threshold(p, y, c.threshold), c.f1);
  }
}

TEST(Threshold, SingleClassValidationIsDataError) {
  EXPECT_THROW(tune_threshold(std::vector<double>{0.1, 0.2}, Labels{0, 0}), DataError);
}

TEST(CostThreshold, BayesRule) {
  EXPECT_DOUBLE_EQ(cost_threshold({1, 1}), 0.5);
  EXPECT_DOUBLE_EQ(cost_threshold({1, 9}), 0.1);
  EXPECT_THROW(cost_threshold({0, 1}), ConfigError);
}

TEST(Reweight, EquivalentThresholdGivesSameLabels) {
  Rng rng(12);
  for (int i = 0; i < 2000; ++i) {
    const double p = uniform01(rng), t = uniform01(rng);
    const ClassWeights w{0.1 + 10 * uniform01(rng), 0.1 + 10 * uniform01(rng)};
    const double q = reweight_proba(p, w);
    const double t_eq = equivalent_threshold(t, w);
    if (std::abs(q - t) < 1e-9 || std::abs(p - t_eq) < 1e-9) continue;
    EXPECT_EQ(q >= t, p >= t_eq);
  }
  EXPECT_DOUBLE_EQ(reweight_proba(0.3, {1, 1}), 0.3);
  EXPECT_DOUBLE_EQ(reweight_proba(0.5, {1, 3}), 0.75);
}

TEST(Isotonic, OutputIsMonotone) {
  std::vector<double> p;
  Labels y;
  calibrated_sample(300, 13, p, y);
  const Calibrator cal = isotonic_fit(p, y);
  double last = -1.0;
  for (int g = 0; g <= 1000; ++g) {
    const double v = calibrate(cal, g / 1000.0);
    EXPECT_GE(v, last);
    last = v;
  }
}

TEST(Isotonic, PoolsViolators) {
  const auto cal = isotonic_fit(std::vector<double>{0.1, 0.2, 0.3, 0.4}, Labels{0, 1, 0, 1});
  EXPECT_EQ(cal.value, (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_EQ(cal.upper, (std::vector<double>{0.1, 0.3, 0.4}));
  EXPECT_DOUBLE_EQ(calibrate(cal, 0.25), 0.5);
  EXPECT_DOUBLE_EQ(calibrate(cal, 0.99), 1.0);
}

TEST(Platt, RecoversIdentityOnCalibratedScores) {
  std::vector<double> p;
  Labels y;
  calibrated_sample(20000, 14, p, y);
  const auto cal = platt_fit(p, y);
  const auto* platt = std::get_if<PlattCalibrator>(&cal);
  ASSERT_NE(platt, nullptr);
  EXPECT_NEAR(platt->a, 1.0, 0.1);
  EXPECT_NEAR(platt->b, 0.0, 0.1);
}

TEST(VoteWeights, NormalizedWithFloor) {
  const auto d = fixtures::gaussian_blobs(150, 30, 2, 2.0, 15);
  FitConfig cfg;
  cfg.n_trees = 8;
  const auto m = fit(d, cfg);
  const auto w = vote_weight_fit(m, fixtures::gaussian_blobs(100, 20, 2, 2.0, 16));
  ASSERT_EQ(w.size(), 8u);
  double s = 0.0;
  for (double v : w) {
    EXPECT_GT(v, 0.0);
    s += v;
  }
  EXPECT_NEAR(s, 1.0, 1e-12);
  const Matrix rows = d.x;
  EXPECT_EQ(rule_proba(m, DecisionRule{}, rows), m.predict_proba(rows));
}

TEST(DecisionRule, ComposesAndRoundTrips) {
  DecisionRule r;
  r.calibrator = PlattCalibrator{2.0, -0.5};
  r.reweight = ClassWeights{1.0, 4.0};
  r.threshold = 0.3;
  r.vote_weights = {0.25, 0.75};
  const double p = 0.4;
  const double expect = reweight_proba(calibrate(r.calibrator, p), {1.0, 4.0});
  EXPECT_DOUBLE_EQ(r.score(p), expect);
  EXPECT_EQ(apply_rule(r, std::vector<double>{p})[0], expect >= 0.3 ? 1 : 0);
  const auto back = rule_from_json(nlohmann::json::parse(rule_to_json(r).dump()));
  EXPECT_EQ(back, r);
  r.threshold = 1.5;
  EXPECT_THROW(r.validate(), ConfigError);
}

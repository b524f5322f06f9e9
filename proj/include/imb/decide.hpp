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

// Post-training decision rules: threshold tuning, cost-derived thresholds,
// prediction reweighting, probability calibration and per-tree vote
// weighting. None of these touch the fitted model.
//
// Rule composition is fixed:
//   per-tree vote weights (inside the forest call) -> calibrator -> reweight
//   -> threshold, with label 1 iff the final score >= threshold.

#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <variant>
#include <vector>

#include "json.hpp"

#include "imb/common.hpp"
#include "imb/dataset.hpp"
#include "imb/forest.hpp"
#include "imb/metrics.hpp"

namespace imb {

struct PlattCalibrator {
  double a = 1.0;
  double b = 0.0;
  friend bool operator==(const PlattCalibrator&, const PlattCalibrator&) = default;
};

// Piecewise-constant map. Block k covers (upper[k-1], upper[k]] and maps to
// value[k]; values below the first block take value[0], above the last take
// value.back().
struct IsotonicCalibrator {
  std::vector<double> upper;
  std::vector<double> value;
  friend bool operator==(const IsotonicCalibrator&, const IsotonicCalibrator&) = default;
};

using Calibrator = std::variant<std::monostate, PlattCalibrator, IsotonicCalibrator>;

namespace detail {

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double clipped_logit(double p) {
  const double q = std::clamp(p, 1e-6, 1.0 - 1e-6);
  return std::log(q / (1.0 - q));
}

}  // namespace detail

inline double calibrate(const Calibrator& cal, double p) {
  if (const auto* platt = std::get_if<PlattCalibrator>(&cal))
    return detail::sigmoid(platt->a * detail::clipped_logit(p) + platt->b);
  if (const auto* iso = std::get_if<IsotonicCalibrator>(&cal)) {
    if (iso->upper.empty()) return p;
    auto it = std::lower_bound(iso->upper.begin(), iso->upper.end(), p);
    if (it == iso->upper.end()) return iso->value.back();
    return iso->value[static_cast<std::size_t>(it - iso->upper.begin())];
  }
  return p;
}

struct CostSpec {
  double c_fp = 1.0;  // false alarm
  double c_fn = 1.0;  // missed failure

  void validate() const {
    if (!(c_fp > 0 && c_fn > 0)) throw ConfigError("costs must be positive");
  }
};

// Bayes threshold for calibrated probabilities: alarm when
// P(failure) >= c_fp / (c_fp + c_fn).
inline double cost_threshold(const CostSpec& c) {
  c.validate();
  return c.c_fp / (c.c_fp + c.c_fn);
}

// w1 p / (w1 p + w0 (1 - p)).
inline double reweight_proba(double p, ClassWeights w) {
  if (!(w[0] > 0 && w[1] > 0)) throw std::invalid_argument("reweight: weights must be positive");
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  return w[1] * p / (w[1] * p + w[0] * (1.0 - p));
}

// Raw-probability threshold equivalent to reweighting with w and then
// thresholding at t.
inline double equivalent_threshold(double t, ClassWeights w) {
  return t * w[0] / (t * w[0] + (1.0 - t) * w[1]);
}

inline double f1_at_threshold(std::span<const double> probs, const Labels& labels, double t) {
  Confusion c;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const bool alarm = probs[i] >= t;
    if (labels[i] == 1) (alarm ? c.tp : c.fn)++;
    else (alarm ? c.fp : c.tn)++;
  }
  return f1_score(c);
}

struct ThresholdChoice {
  double threshold = 0.5;
  double f1 = 0.0;
};

// Exhaustive F1 maximization over {0, 1} and the midpoints between
// consecutive distinct scores. Ties prefer the candidate closest to 0.5, then
// the smaller one.
inline ThresholdChoice tune_threshold_detailed(std::span<const double> probs, const Labels& labels) {
  if (probs.size() != labels.size()) throw std::invalid_argument("tune_threshold: length mismatch");
  std::size_t positives = 0;
  for (int y : labels) positives += y == 1;
  if (positives == 0 || positives == labels.size())
    throw DataError("tune_threshold: validation labels contain a single class");

  std::vector<std::pair<double, int>> sorted(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) sorted[i] = {probs[i], labels[i]};
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  // suffix_pos[i] = positives among sorted[i..n).
  std::vector<std::size_t> suffix_pos(n + 1, 0);
  for (std::size_t i = n; i-- > 0;) suffix_pos[i] = suffix_pos[i + 1] + (sorted[i].second == 1);

  auto score_from = [&](std::size_t first_alarm) {
    const std::size_t tp = suffix_pos[first_alarm];
    const std::size_t fp = (n - first_alarm) - tp;
    const std::size_t fn = positives - tp;
    return f1_score(tp, fp, fn);
  };
  auto first_at_least = [&](double t) {
    return static_cast<std::size_t>(
        std::lower_bound(sorted.begin(), sorted.end(), t, [](const auto& e, double v) { return e.first < v; }) -
        sorted.begin());
  };

  ThresholdChoice best{0.5, -1.0};
  auto consider = [&](double t, std::size_t first_alarm) {
    const double f = score_from(first_alarm);
    const double dist = std::abs(t - 0.5), best_dist = std::abs(best.threshold - 0.5);
    if (f > best.f1 || (f == best.f1 && (dist < best_dist || (dist == best_dist && t < best.threshold))))
      best = {t, f};
  };
  consider(0.0, first_at_least(0.0));
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double lo = sorted[i].first, hi = sorted[i + 1].first;
    if (lo == hi) continue;
    double t = lo + (hi - lo) * 0.5;
    if (!(t > lo)) t = hi;
    consider(t, i + 1);
  }
  consider(1.0, first_at_least(1.0));
  return best;
}

inline double tune_threshold(std::span<const double> probs, const Labels& labels) {
  return tune_threshold_detailed(probs, labels).threshold;
}

// Newton-fitted logistic regression on logit(p). Returns the identity when
// the fit does not converge or the problem is degenerate.
inline Calibrator platt_fit(std::span<const double> probs, const Labels& labels) {
  if (probs.size() != labels.size()) throw std::invalid_argument("platt_fit: length mismatch");
  bool has0 = false, has1 = false;
  for (int y : labels) (y == 1 ? has1 : has0) = true;
  if (!has0 || !has1) throw DataError("platt_fit: validation labels contain a single class");

  std::vector<double> z(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) z[i] = detail::clipped_logit(probs[i]);
  auto nll = [&](double a, double b) {
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double m = a * z[i] + b;
      // log(1 + e^m) - y m, computed stably
      const double softplus = m > 0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
      s += softplus - labels[i] * m;
    }
    return s;
  };

  double a = 1.0, b = 0.0;
  double loss = nll(a, b);
  for (int iter = 0; iter < 100; ++iter) {
    double ga = 0, gb = 0, haa = 0, hab = 0, hbb = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double s = detail::sigmoid(a * z[i] + b);
      const double r = s - labels[i];
      const double w = s * (1.0 - s);
      ga += r * z[i];
      gb += r;
      haa += w * z[i] * z[i];
      hab += w * z[i];
      hbb += w;
    }
    const double det = haa * hbb - hab * hab;
    if (!(std::abs(det) > 1e-12 * std::max(1.0, haa * hbb))) break;
    double da = (hbb * ga - hab * gb) / det;
    double db = (haa * gb - hab * ga) / det;
    double step = 1.0;
    double next_loss = nll(a - da, b - db);
    while (next_loss > loss && step > 1e-10) {
      step *= 0.5;
      next_loss = nll(a - step * da, b - step * db);
    }
    a -= step * da;
    b -= step * db;
    loss = next_loss;
    if (std::hypot(step * da, step * db) < 1e-8) {
      if (!(a > 0)) warn("platt_fit: non-positive slope; calibrator is not monotone increasing");
      return PlattCalibrator{a, b};
    }
  }
  warn("platt_fit: did not converge; using identity calibration");
  return std::monostate{};
}

// Pool-adjacent-violators on (score, label) pairs sorted by score; equal
// scores are averaged before pooling.
inline IsotonicCalibrator isotonic_fit(std::span<const double> probs, const Labels& labels) {
  if (probs.size() != labels.size()) throw std::invalid_argument("isotonic_fit: length mismatch");
  bool has0 = false, has1 = false;
  for (int y : labels) (y == 1 ? has1 : has0) = true;
  if (!has0 || !has1) throw DataError("isotonic_fit: validation labels contain a single class");

  std::vector<std::pair<double, int>> sorted(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) sorted[i] = {probs[i], labels[i]};
  std::sort(sorted.begin(), sorted.end());

  struct Block {
    double sum;
    double weight;
    double upper;
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    double sum = 0;
    while (j < sorted.size() && sorted[j].first == sorted[i].first) sum += sorted[j++].second;
    blocks.push_back({sum, static_cast<double>(j - i), sorted[i].first});
    while (blocks.size() > 1) {
      auto& last = blocks.back();
      auto& prev = blocks[blocks.size() - 2];
      if (prev.sum / prev.weight <= last.sum / last.weight) break;
      prev.sum += last.sum;
      prev.weight += last.weight;
      prev.upper = last.upper;
      blocks.pop_back();
    }
    i = j;
  }
  IsotonicCalibrator cal;
  for (const auto& blk : blocks) {
    cal.upper.push_back(blk.upper);
    cal.value.push_back(blk.sum / blk.weight);
  }
  return cal;
}

// Tree t gets max(1e-3, validation F1 of tree t alone at 0.5), normalized to
// sum to 1.
inline std::vector<double> vote_weight_fit(const ForestModel& m, const Dataset& val) {
  m.check_width(val.x);
  constexpr double kFloor = 1e-3;
  std::vector<double> weights(m.n_trees());
  Labels predicted(val.size());
  for (std::size_t t = 0; t < m.n_trees(); ++t) {
    for (std::size_t r = 0; r < val.size(); ++r) predicted[r] = m.trees[t].proba(val.x.row(r)) >= 0.5;
    weights[t] = std::max(kFloor, f1_score(confusion(val.y, predicted)));
  }
  double z = 0.0;
  for (double w : weights) z += w;
  for (double& w : weights) w /= z;
  return weights;
}

struct DecisionRule {
  Calibrator calibrator;
  std::optional<ClassWeights> reweight;
  double threshold = 0.5;
  std::vector<double> vote_weights;  // forest models only; empty = unweighted

  void validate() const {
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ConfigError("decision rule: threshold must be in [0,1]");
    if (reweight && !((*reweight)[0] > 0 && (*reweight)[1] > 0))
      throw ConfigError("decision rule: reweight weights must be positive");
    if (const auto* iso = std::get_if<IsotonicCalibrator>(&calibrator)) {
      if (iso->upper.size() != iso->value.size()) throw ConfigError("decision rule: malformed isotonic map");
      for (std::size_t i = 1; i < iso->value.size(); ++i)
        if (iso->value[i] < iso->value[i - 1] || iso->upper[i] <= iso->upper[i - 1])
          throw ConfigError("decision rule: isotonic map not monotone");
    }
    for (double w : vote_weights)
      if (!(w >= 0)) throw ConfigError("decision rule: negative vote weight");
  }

  // Score after calibration and reweighting, before the threshold.
  double score(double p) const {
    double q = calibrate(calibrator, p);
    if (reweight) q = reweight_proba(q, *reweight);
    return q;
  }

  friend bool operator==(const DecisionRule&, const DecisionRule&) = default;
};

inline Labels apply_rule(const DecisionRule& rule, std::span<const double> probs) {
  rule.validate();
  Labels out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) out[i] = rule.score(probs[i]) >= rule.threshold ? 1 : 0;
  return out;
}

// Model probabilities with the rule's vote weights applied, if any.
inline std::vector<double> rule_proba(const ForestModel& m, const DecisionRule& rule, const Matrix& rows) {
  return rule.vote_weights.empty() ? m.predict_proba(rows) : m.predict_proba(rows, rule.vote_weights);
}

inline nlohmann::ordered_json rule_to_json(const DecisionRule& r) {
  nlohmann::ordered_json j;
  if (const auto* platt = std::get_if<PlattCalibrator>(&r.calibrator)) {
    j["calibrator"] = {{"kind", "platt"}, {"a", platt->a}, {"b", platt->b}};
  } else if (const auto* iso = std::get_if<IsotonicCalibrator>(&r.calibrator)) {
    j["calibrator"] = {{"kind", "isotonic"}, {"upper", iso->upper}, {"value", iso->value}};
  } else {
    j["calibrator"] = {{"kind", "identity"}};
  }
  j["reweight"] = r.reweight ? nlohmann::ordered_json::array({(*r.reweight)[0], (*r.reweight)[1]})
                             : nlohmann::ordered_json(nullptr);
  j["threshold"] = r.threshold;
  j["vote_weights"] = r.vote_weights;
  return j;
}

inline DecisionRule rule_from_json(const nlohmann::json& j) {
  DecisionRule r;
  const auto& cal = j.at("calibrator");
  const auto kind = cal.at("kind").get<std::string>();
  if (kind == "platt") {
    r.calibrator = PlattCalibrator{cal.at("a").get<double>(), cal.at("b").get<double>()};
  } else if (kind == "isotonic") {
    r.calibrator = IsotonicCalibrator{cal.at("upper").get<std::vector<double>>(), cal.at("value").get<std::vector<double>>()};
  } else if (kind != "identity") {
    throw DataError("decision rule: unknown calibrator '" + kind + "'");
  }
  if (!j.at("reweight").is_null()) r.reweight = ClassWeights{j["reweight"].at(0).get<double>(), j["reweight"].at(1).get<double>()};
  r.threshold = j.at("threshold").get<double>();
  r.vote_weights = j.at("vote_weights").get<std::vector<double>>();
  r.validate();
  return r;
}

}  // namespace imb

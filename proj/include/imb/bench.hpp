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

// Benchmark harness: paired repeated runs over stratified splits, per-run
// scoring on a label-sealed test fold, aggregation and report files.

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "imb/adapt.hpp"
#include "imb/common.hpp"
#include "imb/dataset.hpp"
#include "imb/decide.hpp"
#include "imb/forest.hpp"
#include "imb/genmodel.hpp"
#include "imb/metrics.hpp"
#include "imb/resample.hpp"
#include "imb/technique.hpp"

namespace imb {

// Test fold whose labels are reachable only through score().
class TestFold {
 public:
  explicit TestFold(Dataset d) : x_(std::move(d.x)), y_(std::move(d.y)) {}

  const Matrix& features() const { return x_; }
  std::size_t size() const { return y_.size(); }

  Confusion score(const Labels& predicted) const {
    ++label_reads_;
    return confusion(y_, predicted);
  }
  std::size_t label_reads() const { return label_reads_; }

 private:
  Matrix x_;
  Labels y_;
  mutable std::size_t label_reads_ = 0;
};

inline std::uint64_t fingerprint(const Dataset& d) {
  std::string bytes;
  bytes.append(reinterpret_cast<const char*>(d.x.data().data()), d.x.data().size() * sizeof(double));
  bytes.append(reinterpret_cast<const char*>(d.y.data()), d.y.size() * sizeof(int));
  return stable_hash(bytes);
}

struct BenchConfig {
  FitConfig forest;
  SplitSpec split;
  std::size_t runs = 100;
  std::uint64_t seed = 42;
  bool fixed_split = false;
  bool timing = true;
  std::size_t timing_reps = 5;
  std::size_t bagging_members = 10;
  std::size_t boosting_rounds = 10;
  std::ostream* progress = nullptr;

  void validate() const {
    forest.validate();
    split.validate();
    if (runs < 2) throw ConfigError("bench: need at least 2 runs");
    if (timing_reps < 1) throw ConfigError("bench: timing repetitions must be >= 1");
  }
};

// Model plus the decision rule applied to its probabilities.
struct TrainedTechnique {
  Classifier model;
  DecisionRule rule;

  std::vector<double> proba(const Matrix& rows) const {
    if (!rule.vote_weights.empty()) return rule_proba(std::get<ForestModel>(model), rule, rows);
    return classifier_proba(model, rows);
  }
  Labels predict(const Matrix& rows) const { return apply_rule(rule, proba(rows)); }
};

// Folds and shared per-run state. The baseline forest is fit once and reused
// by post-processing techniques and as the massaging ranker.
class RunContext {
 public:
  RunContext(const Dataset& data, const BenchConfig& cfg, std::size_t run)
      : run_(run), run_seed_(cfg.seed + run), test_(Dataset{}) {
    SplitSpec s = cfg.split;
    s.seed = cfg.fixed_split ? cfg.seed : cfg.seed + run;
    Split split = stratified_split(data, s);
    train_ = std::move(split.train);
    val_ = std::move(split.val);
    test_ = TestFold(std::move(split.test));
    forest_cfg_ = cfg.forest;
    forest_cfg_.seed = derive_seed(run_seed_, 1);
    train_fp_ = fingerprint(train_);
    val_fp_ = fingerprint(val_);
  }

  std::size_t run() const { return run_; }
  std::uint64_t run_seed() const { return run_seed_; }
  const Dataset& train() const { return train_; }
  const Dataset& val() const { return val_; }
  const TestFold& test() const { return test_; }
  const FitConfig& forest_config() const { return forest_cfg_; }

  std::uint64_t technique_seed(const TechniqueSpec& t) const { return derive_seed(run_seed_, stable_hash(t.id)); }

  const ForestModel& baseline() {
    if (!baseline_) {
      const auto t0 = std::chrono::steady_clock::now();
      baseline_ = fit(train_, forest_cfg_);
      baseline_seconds_ = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    return *baseline_;
  }
  double baseline_seconds() const { return baseline_seconds_; }

  const std::vector<double>& baseline_val_proba() {
    if (!baseline_val_) baseline_val_ = baseline().predict_proba(val_.x);
    return *baseline_val_;
  }

  // Samplers may only ever see the training fold.
  const Dataset& sampler_input(const Dataset& d) {
    if (fingerprint(d) != train_fp_) throw std::logic_error("audit: sampler input is not the training fold");
    ++sampler_calls_;
    return d;
  }
  std::size_t sampler_calls() const { return sampler_calls_; }

  // Throws if a technique altered the training or validation fold.
  void audit() const {
    if (fingerprint(train_) != train_fp_ || fingerprint(val_) != val_fp_)
      throw std::logic_error("audit: a technique modified a shared fold");
  }

 private:
  std::size_t run_;
  std::uint64_t run_seed_;
  Dataset train_;
  Dataset val_;
  TestFold test_;
  FitConfig forest_cfg_;
  std::uint64_t train_fp_ = 0, val_fp_ = 0;
  std::optional<ForestModel> baseline_;
  double baseline_seconds_ = 0.0;
  std::optional<std::vector<double>> baseline_val_;
  std::size_t sampler_calls_ = 0;
};

namespace detail {

inline double ratio_param(const TechniqueSpec& t) {
  const double r = t.number("ratio", 1.0);
  if (!(r > 0.0 && r <= 1.0)) throw ConfigError("technique '" + t.id + "': ratio must be in (0,1]");
  return r;
}

inline SamplerSpec sampler_for(const TechniqueSpec& t, std::uint64_t seed) {
  SamplerSpec s;
  s.seed = seed;
  s.target_ratio = ratio_param(t);
  s.k_neighbors = t.count("k", 5);
  if (t.has("clusters")) s.n_clusters = t.count("clusters", 1);
  s.noise_scale = t.number("noise", 0.1);
  const std::string& n = t.name;
  if (n == "ros") s.kind = SamplerKind::kRos;
  else if (n == "rus") s.kind = SamplerKind::kRus;
  else if (n == "smote") s.kind = SamplerKind::kSmote;
  else if (n == "adasyn") s.kind = SamplerKind::kAdasyn;
  else if (n == "cluster_centroids") s.kind = SamplerKind::kClusterCentroids;
  else if (n == "smote_tomek") s.kind = SamplerKind::kSmoteTomek;
  else if (n == "massaging") s.kind = SamplerKind::kMassaging;
  else if (n == "perturbation") s.kind = SamplerKind::kPerturbation;
  else if (n == "cluster_massaging") s.kind = SamplerKind::kClusterMassaging;
  else throw ConfigError("technique '" + t.id + "' is not a sampler");
  s.validate();
  return s;
}

inline std::size_t synthetic_count(const Dataset& train, double ratio) {
  const auto c = train.counts();
  const auto target = minority_target(c.normal, ratio);
  return target > c.failure ? target - c.failure : 0;
}

inline Dataset generative_oversample(const Dataset& train, const TechniqueSpec& t, std::uint64_t seed) {
  const std::size_t count = synthetic_count(train, ratio_param(t));
  if (count == 0) return train;
  SyntheticGenerator gen;
  if (t.name == "ctgan") {
    CganSpec spec;
    spec.seed = seed;
    spec.epochs = t.count("epochs", spec.epochs);
    gen = cgan_fit(train, spec).generator;
  } else {
    CvaeSpec spec;
    spec.seed = seed;
    spec.epochs = t.count("epochs", spec.epochs);
    gen = cvae_fit(train, spec).generator;
  }
  return with_appended(train, sample_synthetic(gen, count, derive_seed(seed, 2)), 1);
}

inline DecisionRule fit_post_rule(const TechniqueSpec& t, RunContext& ctx) {
  const ForestModel& model = ctx.baseline();
  const auto& val = ctx.val();
  const auto& p = ctx.baseline_val_proba();
  const double imbalance = inverse_frequency(ctx.train().counts())[1];
  DecisionRule rule;
  if (t.name == "threshold") {
    rule.threshold = tune_threshold(p, val.y);
  } else if (t.name == "cost_threshold") {
    CostSpec c{t.number("cfp", 1.0), t.number("cfn", imbalance)};
    c.validate();
    rule.threshold = cost_threshold(c);
  } else if (t.name == "reweight") {
    rule.reweight = ClassWeights{t.number("w0", 1.0), t.number("w1", imbalance)};
    rule.threshold = t.number("t", 0.5);
  } else if (t.name == "calibration") {
    const std::string method = t.text("method", "isotonic");
    if (method == "isotonic")
      rule.calibrator = isotonic_fit(p, val.y);
    else if (method == "platt")
      rule.calibrator = platt_fit(p, val.y);
    else
      throw ConfigError("technique '" + t.id + "': method must be isotonic or platt");
  } else if (t.name == "sample_weighting") {
    rule.vote_weights = vote_weight_fit(model, val);
  } else {
    throw ConfigError("technique '" + t.id + "' is not a post-processing technique");
  }
  rule.validate();
  return rule;
}

}  // namespace detail

// Trains one technique on the run's training fold (post rules on validation).
inline TrainedTechnique fit_technique(const TechniqueSpec& t, RunContext& ctx) {
  const auto& train = ctx.train();
  const FitConfig& cfg = ctx.forest_config();
  const std::uint64_t seed = ctx.technique_seed(t);
  switch (t.category) {
    case Category::kBaseline:
      return {ctx.baseline(), {}};
    case Category::kPre: {
      if (t.name == "ctgan" || t.name == "cvae")
        return {fit(detail::generative_oversample(ctx.sampler_input(train), t, seed), cfg), {}};
      const SamplerSpec spec = detail::sampler_for(t, seed);
      const ForestModel* ranker = spec.kind == SamplerKind::kMassaging ? &ctx.baseline() : nullptr;
      return {fit(resample(ctx.sampler_input(train), spec, ranker), cfg), {}};
    }
    case Category::kIn:
      if (t.name == "cost_sensitive") return {cost_sensitive_fit(train, cfg), {}};
      if (t.name == "bagging") return {bagging_fit(train, t.count("members", 10), cfg), {}};
      if (t.name == "boosting") return {boosting_fit(train, t.count("rounds", 10), cfg), {}};
      if (t.name == "brf") return {balanced_rf_fit(train, cfg), {}};
      if (t.name == "meta_learning") return {meta_fit(train, cfg, t.count("folds", 5)), {}};
      break;
    case Category::kPost:
      return {ctx.baseline(), detail::fit_post_rule(t, ctx)};
  }
  throw ConfigError("technique '" + t.id + "' is not implemented");
}

struct RunResult {
  std::string technique;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  double f1 = 0.0, precision = 0.0, recall = 0.0, accuracy = 0.0;
  double inference_seconds = 0.0;
  double train_seconds = 0.0;
};

// Fits, times and scores one technique. Non-configuration errors are
// recorded as a failed run.
inline RunResult run_technique(const TechniqueSpec& t, RunContext& ctx, const BenchConfig& cfg) {
  using clock = std::chrono::steady_clock;
  RunResult r;
  r.technique = t.id;
  r.run = ctx.run();
  r.seed = ctx.run_seed();
  try {
    const bool cached = t.category == Category::kBaseline || t.category == Category::kPost;
    if (cached) ctx.baseline();
    const auto t0 = clock::now();
    const TrainedTechnique model = fit_technique(t, ctx);
    r.train_seconds = std::chrono::duration<double>(clock::now() - t0).count();
    if (cached) r.train_seconds += ctx.baseline_seconds();
    ctx.audit();

    const Matrix& x = ctx.test().features();
    Labels predicted;
    std::vector<double> times;
    for (std::size_t rep = 0; rep < (cfg.timing ? cfg.timing_reps : 1); ++rep) {
      const auto s = clock::now();
      predicted = model.predict(x);
      times.push_back(std::chrono::duration<double>(clock::now() - s).count());
    }
    r.inference_seconds = median_of(times);
    if (!cfg.timing) r.inference_seconds = r.train_seconds = 0.0;

    const Confusion c = ctx.test().score(predicted);
    r.f1 = f1_score(c);
    r.precision = precision(c);
    r.recall = recall(c);
    r.accuracy = accuracy(c);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    r.failed = true;
    r.error = e.what();
    r.inference_seconds = r.train_seconds = 0.0;
    warn("run " + std::to_string(ctx.run()) + " " + t.id + " failed: " + e.what());
  }
  return r;
}

struct SuiteResult {
  std::vector<TechniqueSpec> techniques;
  std::vector<std::vector<RunResult>> runs;  // [technique][run]
  BenchConfig config;
};

// Every technique sees the same folds within a run index.
inline SuiteResult run_suite(const Dataset& data, std::vector<TechniqueSpec> techniques, const BenchConfig& cfg) {
  cfg.validate();
  data.validate();
  if (techniques.empty() || techniques.front().category != Category::kBaseline) {
    std::erase_if(techniques, [](const TechniqueSpec& t) { return t.category == Category::kBaseline; });
    techniques.insert(techniques.begin(), TechniqueSpec::parse("baseline"));
  }
  SuiteResult out;
  out.techniques = techniques;
  out.config = cfg;
  out.runs.assign(techniques.size(), {});
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t run = 0; run < cfg.runs; ++run) {
    RunContext ctx(data, cfg, run);
    for (std::size_t i = 0; i < techniques.size(); ++i) out.runs[i].push_back(run_technique(techniques[i], ctx, cfg));
    if (ctx.test().label_reads() != techniques.size()) throw std::logic_error("audit: unexpected test label reads");
    if (cfg.progress) {
      const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      *cfg.progress << "run " << run + 1 << "/" << cfg.runs << " done, " << static_cast<int>(elapsed) << " s\n";
    }
  }
  return out;
}

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;
};

struct TechniqueSummary {
  std::string id;
  Category category = Category::kBaseline;
  std::size_t n_runs = 0;
  std::size_t n_failed = 0;
  bool unreliable = false;
  MetricSummary f1, precision, recall, accuracy;
  double vmr_f1 = 0.0;
  double pct_improvement_f1 = 0.0;
  double inference_ms = 0.0;         // mean over successful runs
  double inference_ms_median = 0.0;
  double train_ms = 0.0;
};

struct MetricsReport {
  std::vector<TechniqueSummary> techniques;  // baseline first
  std::size_t runs = 0;
  std::uint64_t seed = 0;
  bool fixed_split = false;

  const TechniqueSummary& baseline() const { return techniques.front(); }
  const TechniqueSummary* find(const std::string& id) const {
    for (const auto& t : techniques)
      if (t.id == id) return &t;
    return nullptr;
  }
  // Highest mean F1 among reliable techniques of the category; first wins ties.
  const TechniqueSummary* best_in(Category c) const {
    const TechniqueSummary* best = nullptr;
    for (const auto& t : techniques)
      if (t.category == c && !t.unreliable && t.n_runs > t.n_failed && (!best || t.f1.mean > best->f1.mean)) best = &t;
    return best;
  }
};

// Sample variance over mean; 0 when the mean is 0.
inline double variance_to_mean(std::span<const double> xs) {
  const double m = mean_of(xs);
  return m == 0.0 ? 0.0 : sample_variance(xs) / m;
}

inline double pct_improvement(double value, double baseline) {
  return baseline == 0.0 ? 0.0 : 100.0 * (value - baseline) / baseline;
}

inline MetricsReport summarize(const SuiteResult& suite) {
  MetricsReport rep;
  rep.runs = suite.config.runs;
  rep.seed = suite.config.seed;
  rep.fixed_split = suite.config.fixed_split;
  auto summary_of = [](const std::vector<double>& xs) {
    MetricSummary s;
    if (xs.empty()) return s;
    s.mean = mean_of(xs);
    s.std = xs.size() > 1 ? std::sqrt(sample_variance(xs)) : 0.0;
    return s;
  };
  for (std::size_t i = 0; i < suite.techniques.size(); ++i) {
    TechniqueSummary t;
    t.id = suite.techniques[i].id;
    t.category = suite.techniques[i].category;
    t.n_runs = suite.runs[i].size();
    std::vector<double> f1, pr, rc, ac, inf, tr;
    for (const auto& r : suite.runs[i]) {
      if (r.failed) {
        ++t.n_failed;
        continue;
      }
      f1.push_back(r.f1);
      pr.push_back(r.precision);
      rc.push_back(r.recall);
      ac.push_back(r.accuracy);
      inf.push_back(r.inference_seconds * 1e3);
      tr.push_back(r.train_seconds * 1e3);
    }
    t.unreliable = static_cast<double>(t.n_failed) > 0.2 * static_cast<double>(t.n_runs);
    t.f1 = summary_of(f1);
    t.precision = summary_of(pr);
    t.recall = summary_of(rc);
    t.accuracy = summary_of(ac);
    t.vmr_f1 = f1.size() > 1 ? variance_to_mean(f1) : 0.0;
    t.inference_ms = inf.empty() ? 0.0 : mean_of(inf);
    t.inference_ms_median = inf.empty() ? 0.0 : median_of(inf);
    t.train_ms = tr.empty() ? 0.0 : mean_of(tr);
    rep.techniques.push_back(t);
  }
  const double base = rep.techniques.front().f1.mean;
  for (auto& t : rep.techniques) t.pct_improvement_f1 = pct_improvement(t.f1.mean, base);
  return rep;
}

struct VmrFlags {
  bool best_within_1_5x = true;  // every category's best VMR <= 1.5 x baseline
  bool ordering_holds = true;    // all bests below baseline, post:threshold lowest
};

inline VmrFlags vmr_flags(const MetricsReport& rep) {
  VmrFlags f;
  const double base = rep.baseline().vmr_f1;
  double lowest = base;
  std::string lowest_id = rep.baseline().id;
  for (Category c : {Category::kPre, Category::kIn, Category::kPost}) {
    const auto* best = rep.best_in(c);
    if (!best) {
      f.ordering_holds = false;
      continue;
    }
    if (best->vmr_f1 > 1.5 * base) f.best_within_1_5x = false;
    if (!(best->vmr_f1 < base)) f.ordering_holds = false;
    if (best->vmr_f1 < lowest) {
      lowest = best->vmr_f1;
      lowest_id = best->id;
    }
  }
  if (lowest_id != "post:threshold") f.ordering_holds = false;
  return f;
}

// ---------------------------------------------------------------------------
// Report files

namespace detail {

inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

inline nlohmann::ordered_json rounded(double v) { return std::stod(fmt(v)); }

}  // namespace detail

inline std::string report_csv(const MetricsReport& rep) {
  std::string s =
      "id,category,f1_mean,f1_std,precision_mean,precision_std,recall_mean,recall_std,accuracy_mean,accuracy_std,"
      "vmr_f1,pct_improvement_f1,inference_ms\n";
  for (const auto& t : rep.techniques) {
    s += t.id + "," + to_string(t.category);
    for (const auto* m : {&t.f1, &t.precision, &t.recall, &t.accuracy})
      s += "," + detail::fmt(m->mean) + "," + detail::fmt(m->std);
    s += "," + detail::fmt(t.vmr_f1) + "," + detail::fmt(t.pct_improvement_f1) + "," + detail::fmt(t.inference_ms) + "\n";
  }
  return s;
}

inline std::string runs_csv(const SuiteResult& suite) {
  std::string s = "id,run,seed,failed,f1,precision,recall,accuracy,inference_ms,train_ms\n";
  for (std::size_t i = 0; i < suite.techniques.size(); ++i)
    for (const auto& r : suite.runs[i])
      s += r.technique + "," + std::to_string(r.run) + "," + std::to_string(r.seed) + "," + (r.failed ? "1" : "0") + "," +
           detail::fmt(r.f1) + "," + detail::fmt(r.precision) + "," + detail::fmt(r.recall) + "," +
           detail::fmt(r.accuracy) + "," + detail::fmt(r.inference_seconds * 1e3) + "," +
           detail::fmt(r.train_seconds * 1e3) + "\n";
  return s;
}

inline nlohmann::ordered_json fig2_json(const MetricsReport& rep) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& t : rep.techniques) j[t.id] = detail::rounded(t.f1.mean);
  return j;
}

inline nlohmann::ordered_json fig3_json(const MetricsReport& rep) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& t : rep.techniques)
    j[t.id] = {{"pct_improvement", detail::rounded(t.pct_improvement_f1)}, {"inference_ms", detail::rounded(t.inference_ms)}};
  return j;
}

// Baseline and the best technique of each category, mapped to VMR.
inline nlohmann::ordered_json fig4_json(const MetricsReport& rep) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  j[rep.baseline().id] = detail::rounded(rep.baseline().vmr_f1);
  for (Category c : {Category::kPre, Category::kIn, Category::kPost})
    if (const auto* best = rep.best_in(c)) j[best->id] = detail::rounded(best->vmr_f1);
  return j;
}

inline nlohmann::ordered_json summary_json(const MetricsReport& rep) {
  nlohmann::ordered_json j;
  j["runs"] = rep.runs;
  j["seed"] = rep.seed;
  j["fixed_split"] = rep.fixed_split;
  j["reference_baseline_f1"] = kReferenceBaselineF1;
  nlohmann::ordered_json best = nlohmann::ordered_json::object();
  for (Category c : {Category::kPre, Category::kIn, Category::kPost})
    best[to_string(c)] = rep.best_in(c) ? nlohmann::ordered_json(rep.best_in(c)->id) : nlohmann::ordered_json(nullptr);
  j["best"] = best;
  const VmrFlags flags = vmr_flags(rep);
  j["flags"] = {{"vmr_best_within_1_5x_baseline", flags.best_within_1_5x}, {"vmr_ordering_holds", flags.ordering_holds}};
  nlohmann::ordered_json techs = nlohmann::ordered_json::object();
  for (const auto& t : rep.techniques)
    techs[t.id] = {{"category", to_string(t.category)},
                   {"n_runs", t.n_runs},
                   {"n_failed", t.n_failed},
                   {"unreliable", t.unreliable},
                   {"inference_ms_median", detail::rounded(t.inference_ms_median)},
                   {"train_ms", detail::rounded(t.train_ms)}};
  j["techniques"] = techs;
  return j;
}

// Writes report.csv, runs.csv, fig2.json, fig3.json, fig4.json and
// summary.json into out_dir (created if missing).
inline void emit_report(const SuiteResult& suite, const MetricsReport& rep, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create " + out_dir.string() + ": " + ec.message());
  detail::write_text(out_dir / "report.csv", report_csv(rep));
  detail::write_text(out_dir / "runs.csv", runs_csv(suite));
  detail::write_text(out_dir / "fig2.json", fig2_json(rep).dump(2) + "\n");
  detail::write_text(out_dir / "fig3.json", fig3_json(rep).dump(2) + "\n");
  detail::write_text(out_dir / "fig4.json", fig4_json(rep).dump(2) + "\n");
  detail::write_text(out_dir / "summary.json", summary_json(rep).dump(2) + "\n");
}

}  // namespace imb

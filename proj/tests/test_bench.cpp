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
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "imb/bench.hpp"
#include "test_util.hpp"

using namespace imb;
namespace fs = std::filesystem;

namespace {

Dataset small_testbed() {
  GeneratorConfig g;
  g.n_normal = 500;
  g.n_failure = 40;
  g.seed = 3;
  return generate_synthetic(g);
}

BenchConfig small_config() {
  BenchConfig cfg;
  cfg.forest.n_trees = 10;
  cfg.runs = 3;
  cfg.timing = false;
  cfg.bagging_members = 2;
  cfg.boosting_rounds = 2;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("imb_test_bench_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(IMB_BENCH_EXE) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Summary, VarianceToMeanIsScaleConsistent) {
  const std::vector<double> xs{0.2, 0.4, 0.3, 0.5};
  std::vector<double> scaled;
  for (double v : xs) scaled.push_back(3.0 * v);
  EXPECT_NEAR(variance_to_mean(scaled), 3.0 * variance_to_mean(xs), 1e-12);
  EXPECT_DOUBLE_EQ(variance_to_mean(std::vector<double>{0, 0, 0}), 0.0);
  EXPECT_DOUBLE_EQ(variance_to_mean(std::vector<double>{0.5, 0.5}), 0.0);
}

TEST(Summary, PctImprovement) {
  EXPECT_DOUBLE_EQ(pct_improvement(0.6, 0.5), 20.0);
  EXPECT_DOUBLE_EQ(pct_improvement(0.4, 0.5), -20.0);
  EXPECT_DOUBLE_EQ(pct_improvement(0.5, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(pct_improvement(0.5, 0.0), 0.0);
}

TEST(Bench, RunsShareFoldsAndTestLabelsAreReadOncePerTechnique) {
  const auto data = small_testbed();
  const auto cfg = small_config();
  RunContext a(data, cfg, 1), b(data, cfg, 1), c(data, cfg, 2);
  EXPECT_EQ(a.train(), b.train());
  EXPECT_NE(a.train(), c.train());
  EXPECT_EQ(a.forest_config().seed, derive_seed(cfg.seed + 1, 1));
  auto fixed = cfg;
  fixed.fixed_split = true;
  EXPECT_EQ(RunContext(data, fixed, 1).train(), RunContext(data, fixed, 2).train());
  EXPECT_NE(RunContext(data, fixed, 1).forest_config().seed, RunContext(data, fixed, 2).forest_config().seed);

  const auto techniques = parse_technique_list("pre:rus,in:brf,post:threshold");
  const auto r = run_technique(techniques[1], a, cfg);
  EXPECT_FALSE(r.failed);
  EXPECT_EQ(a.test().label_reads(), 1u);
  EXPECT_THROW(a.sampler_input(a.val()), std::logic_error);
  EXPECT_NO_THROW(a.sampler_input(a.train()));
}

TEST(Bench, EveryTechniqueFitsAndPredicts) {
  const auto data = small_testbed();
  auto cfg = small_config();
  RunContext ctx(data, cfg, 0);
  for (const auto& t : parse_technique_list("all")) {
    auto local = t;
    if (t.name == "ctgan" || t.name == "cvae") local = TechniqueSpec::parse(t.id + "?epochs=3");
    const auto r = run_technique(local, ctx, cfg);
    EXPECT_FALSE(r.failed) << t.id << ": " << r.error;
    EXPECT_GE(r.f1, 0.0);
    EXPECT_LE(r.f1, 1.0);
  }
  ctx.audit();
}

TEST(Bench, SuiteReportShapes) {
  const auto data = small_testbed();
  const auto suite = run_suite(data, parse_technique_list("pre:ros,pre:rus,in:brf,post:threshold,post:reweight"),
                               small_config());
  const auto rep = summarize(suite);
  ASSERT_EQ(rep.techniques.size(), 6u);
  EXPECT_EQ(rep.baseline().id, "baseline");
  EXPECT_DOUBLE_EQ(rep.baseline().pct_improvement_f1, 0.0);
  for (const auto& t : rep.techniques) {
    EXPECT_EQ(t.n_runs, 3u);
    EXPECT_DOUBLE_EQ(t.inference_ms, 0.0);
  }
  EXPECT_EQ(fig4_json(rep).size(), 4u);
  EXPECT_EQ(fig4_json(rep).begin().key(), "baseline");
  EXPECT_EQ(fig2_json(rep).size(), 6u);

  const auto csv = report_csv(rep);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "id,category,f1_mean,f1_std,precision_mean,precision_std,recall_mean,recall_std,accuracy_mean,"
            "accuracy_std,vmr_f1,pct_improvement_f1,inference_ms");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);

  const auto dir = scratch("suite");
  emit_report(suite, rep, dir);
  for (const char* f : {"report.csv", "runs.csv", "fig2.json", "fig3.json", "fig4.json", "summary.json"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_EQ(slurp(dir / "report.csv"), csv);
}

TEST(Bench, SuiteIsDeterministicWithoutTiming) {
  const auto data = small_testbed();
  const auto techniques = parse_technique_list("pre:smote,in:bagging,post:calibration");
  const auto a = summarize(run_suite(data, techniques, small_config()));
  const auto b = summarize(run_suite(data, techniques, small_config()));
  EXPECT_EQ(report_csv(a), report_csv(b));
  EXPECT_EQ(fig3_json(a).dump(), fig3_json(b).dump());
}

TEST(Bench, ConfigErrorsPropagate) {
  const auto data = small_testbed();
  auto cfg = small_config();
  cfg.runs = 1;
  EXPECT_THROW(run_suite(data, parse_technique_list("pre:ros"), cfg), ConfigError);
  cfg.runs = 2;
  EXPECT_THROW(run_suite(data, parse_technique_list("pre:smote?ratio=2"), cfg), ConfigError);
}

TEST(BenchCli, ExitCodes) {
  const auto dir = scratch("cli");
  {
    std::ofstream(dir / "gen.json") << R"({"n_normal": 300, "n_failure": 30, "seed": 5})";
    std::ofstream(dir / "bad_gen.json") << R"({"n_normal": 300, "colour": 1})";
    std::ofstream(dir / "bad.csv") << "a,b,label\n1,2,0\nx,y\n";
  }
  const std::string gen = " --data synthetic --gen-config " + (dir / "gen.json").string();
  EXPECT_EQ(run_cli("list-techniques"), 0);
  EXPECT_EQ(run_cli("run" + gen + " --techniques pre:ros --runs 2 --trees 5 --quiet --no-timing --out " +
                    (dir / "out").string()),
            0);
  EXPECT_TRUE(fs::exists(dir / "out" / "fig4.json"));
  EXPECT_EQ(run_cli("run" + gen + " --techniques pre:bogus --runs 2 --out " + (dir / "x").string()), 2);
  EXPECT_EQ(run_cli("run" + gen + " --split 0.5,0.5 --runs 2 --out " + (dir / "x").string()), 2);
  EXPECT_EQ(run_cli("run --data synthetic --gen-config " + (dir / "bad_gen.json").string() + " --out " +
                    (dir / "x").string()),
            2);
  EXPECT_EQ(run_cli("run --runs 2 --out " + (dir / "x").string()), 2);
  EXPECT_EQ(run_cli("run --data " + (dir / "missing.csv").string() + " --runs 2 --out " + (dir / "x").string()), 3);
  EXPECT_EQ(run_cli("run --data " + (dir / "bad.csv").string() + " --runs 2 --out " + (dir / "x").string()), 3);

  const auto model = (dir / "model.json").string();
  EXPECT_EQ(run_cli("train" + gen + " --technique in:boosting?rounds=2 --trees 5 --model " + model), 0);
  EXPECT_EQ(run_cli("eval --model " + model + gen), 0);
  EXPECT_EQ(run_cli("eval --model " + (dir / "gen.json").string() + gen), 3);
}

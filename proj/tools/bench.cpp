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

// bench: command-line front end.
//   bench run --data <csv|synthetic> [--gen-config cfg.json] --techniques <list|all> --out <dir> ...
//   bench list-techniques
//   bench train --data ... --technique <id> --model model.json
//   bench eval --model model.json --data ...

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "imb.hpp"

namespace {

using namespace imb;

imb::Dataset load_data(const std::string& data, const std::string& gen_config) {
  if (data == "synthetic") {
    GeneratorConfig cfg;
    if (!gen_config.empty()) {
      std::ifstream in(gen_config);
      if (!in) throw ConfigError("cannot open generator config '" + gen_config + "'");
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("generator config: ") + e.what());
      }
      cfg = GeneratorConfig::from_json(j);
    }
    return generate_synthetic(cfg);
  }
  const auto schema = infer_schema(read_csv_header(data));
  auto loaded = load_csv(data, schema);
  if (loaded.dropped_rows > 0) warn("dropped " + std::to_string(loaded.dropped_rows) + " rows with missing values");
  return std::move(loaded.data);
}

SplitSpec parse_split(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--split: '" + item + "' is not a number");
    }
  }
  if (parts.size() != 3) throw ConfigError("--split needs three comma-separated fractions");
  SplitSpec s;
  s.train_frac = parts[0];
  s.val_frac = parts[1];
  s.test_frac = parts[2];
  s.validate();
  return s;
}

struct RunArgs {
  std::string data, gen_config, techniques = "all", split = "0.6,0.2,0.2", out;
  std::size_t runs = 100, trees = 100;
  std::uint64_t seed = 42;
  bool fixed_split = false, no_timing = false, quiet = false;
};

int cmd_run(const RunArgs& a) {
  BenchConfig cfg;
  cfg.split = parse_split(a.split);
  cfg.runs = a.runs;
  cfg.seed = a.seed;
  cfg.fixed_split = a.fixed_split;
  cfg.timing = !a.no_timing;
  cfg.forest.n_trees = a.trees;
  cfg.progress = a.quiet ? nullptr : &std::cerr;
  const auto techniques = parse_technique_list(a.techniques);
  cfg.validate();
  const Dataset data = load_data(a.data, a.gen_config);
  const SuiteResult suite = run_suite(data, techniques, cfg);
  const MetricsReport rep = summarize(suite);
  emit_report(suite, rep, a.out);
  for (const auto& t : rep.techniques)
    if (t.unreliable) warn(t.id + " failed in " + std::to_string(t.n_failed) + " of " + std::to_string(t.n_runs) + " runs");
  if (!vmr_flags(rep).ordering_holds) std::cerr << "note: VMR ordering differs from the reference ordering\n";
  return 0;
}

int cmd_list() {
  for (const auto& e : technique_catalog()) {
    std::string id = e.category == Category::kBaseline ? e.name : to_string(e.category) + ":" + e.name;
    std::string keys;
    for (const auto& k : e.keys) keys += (keys.empty() ? "" : ",") + k;
    std::cout << id << "\t" << (keys.empty() ? "-" : keys) << "\t" << e.summary << "\n";
  }
  return 0;
}

struct TrainArgs {
  std::string data, gen_config, technique = "baseline", split = "0.6,0.2,0.2", model;
  std::uint64_t seed = 42;
  std::size_t trees = 100;
};

int cmd_train(const TrainArgs& a) {
  BenchConfig cfg;
  cfg.split = parse_split(a.split);
  cfg.seed = a.seed;
  cfg.forest.n_trees = a.trees;
  const auto spec = TechniqueSpec::parse(a.technique);
  const Dataset data = load_data(a.data, a.gen_config);
  RunContext ctx(data, cfg, 0);
  const TrainedTechnique trained = fit_technique(spec, ctx);
  const Confusion c = ctx.test().score(trained.predict(ctx.test().features()));

  nlohmann::ordered_json j;
  j["format"] = "imbench-model";
  j["version"] = 1;
  j["technique"] = spec.id;
  j["features"] = data.schema.names;
  j["model"] = classifier_to_json(trained.model);
  j["rule"] = rule_to_json(trained.rule);
  std::ofstream out(a.model);
  if (!out) throw DataError("cannot write '" + a.model + "'");
  out << j.dump() << "\n";
  std::cout << nlohmann::ordered_json{{"technique", spec.id}, {"test_f1", f1_score(c)}}.dump() << "\n";
  return 0;
}

struct EvalArgs {
  std::string data, gen_config, model;
};

int cmd_eval(const EvalArgs& a) {
  std::ifstream in(a.model);
  if (!in) throw DataError("cannot open model '" + a.model + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    if (j.at("format") != "imbench-model" || j.at("version") != 1) throw DataError("not an imbench model file");
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  TrainedTechnique trained{Classifier{}, {}};
  try {
    trained.model = classifier_from_json(j.at("model"));
    trained.rule = rule_from_json(j.at("rule"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
  const Dataset data = load_data(a.data, a.gen_config);
  if (j.at("features").get<std::vector<std::string>>() != data.schema.names)
    throw DataError("data columns do not match the model's features");
  const Confusion c = confusion(data.y, trained.predict(data.x));
  nlohmann::ordered_json r;
  r["technique"] = j.at("technique");
  r["rows"] = data.size();
  r["tp"] = c.tp;
  r["fp"] = c.fp;
  r["fn"] = c.fn;
  r["tn"] = c.tn;
  r["f1"] = f1_score(c);
  r["precision"] = precision(c);
  r["recall"] = recall(c);
  r["accuracy"] = accuracy(c);
  std::cout << r.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"imbalance mitigation benchmark"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "run the benchmark suite");
  run_cmd->add_option("--data", run.data, "CSV path or 'synthetic'")->required();
  run_cmd->add_option("--gen-config", run.gen_config, "generator config JSON (synthetic data)");
  run_cmd->add_option("--techniques", run.techniques, "comma-separated technique ids or 'all'");
  run_cmd->add_option("--runs", run.runs, "number of runs");
  run_cmd->add_option("--seed", run.seed, "base seed");
  run_cmd->add_option("--split", run.split, "train,val,test fractions");
  run_cmd->add_option("--out", run.out, "output directory")->required();
  run_cmd->add_option("--trees", run.trees, "trees per forest");
  run_cmd->add_flag("--fixed-split", run.fixed_split, "use one split for every run");
  run_cmd->add_flag("--no-timing", run.no_timing, "zero all timing fields");
  run_cmd->add_flag("--quiet", run.quiet, "no progress output");

  auto* list_cmd = app.add_subcommand("list-techniques", "print technique ids and parameters");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "fit one technique and save the model");
  train_cmd->add_option("--data", train.data, "CSV path or 'synthetic'")->required();
  train_cmd->add_option("--gen-config", train.gen_config, "generator config JSON");
  train_cmd->add_option("--technique", train.technique, "technique id");
  train_cmd->add_option("--seed", train.seed, "seed");
  train_cmd->add_option("--split", train.split, "train,val,test fractions");
  train_cmd->add_option("--trees", train.trees, "trees per forest");
  train_cmd->add_option("--model", train.model, "output model JSON")->required();

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "score a saved model on a dataset");
  eval_cmd->add_option("--model", eval.model, "model JSON")->required();
  eval_cmd->add_option("--data", eval.data, "CSV path or 'synthetic'")->required();
  eval_cmd->add_option("--gen-config", eval.gen_config, "generator config JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*list_cmd) return cmd_list();
    if (*train_cmd) return cmd_train(train);
    if (*eval_cmd) return cmd_eval(eval);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

// Copyright 2026 The errtrace Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "errtrace/corpus_io.hpp"
#include "errtrace/error.hpp"
#include "errtrace/pipeline.hpp"

namespace {

int fail(const std::string& kind, const std::string& message) {
  std::cerr << nlohmann::json{{"error", kind}, {"message", message}}.dump() << "\n";
  return kind == "config" ? 2 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  using errtrace::CommandOptions;
  CLI::App app{"Contrastive error tracing on a synthetic canary benchmark"};
  app.require_subcommand(1);

  CommandOptions opts;
  std::string config_path;
  std::uint64_t seed = 0;
  std::string run_dir = "run";
  app.add_option("--config", config_path, "Run config (JSON); defaults are used when absent");
  app.add_option("--run-dir", run_dir, "Run directory")->capture_default_str();
  auto* seed_opt = app.add_option("--seed", seed, "Override the run seed");
  app.add_flag("--force", opts.force, "Regenerate into a non-empty run directory");
  app.add_option("--threads", opts.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  auto* generate = app.add_subcommand("generate", "Build the corpus and inject canaries");
  auto* train = app.add_subcommand("train", "Train the model and save per-epoch checkpoints");
  auto* trace = app.add_subcommand("trace", "Score training examples with one estimator");
  std::string method;
  trace->add_option("--method", method, "random, bm25, embed, tracin, tracin_contrast, grad_noncontrast, cea_grad, cea")
      ->required();
  auto* distill = app.add_subcommand("distill", "Distill cea_grad rankings into classifiers");
  auto* eval = app.add_subcommand("eval", "Ranking metrics and removal-and-retrain");
  std::vector<std::string> methods, budgets;
  eval->add_option("--methods", methods, "Methods to evaluate (default: from config)");
  eval->add_option("--budgets", budgets, "Removal budgets: N or Mx (times the canary count); none skips retraining")
      ->expected(0, -1);
  auto* sweep = app.add_subcommand("sweep", "Hyperparameter sweep of raw cea_grad");
  std::string axis;
  sweep->add_option("--axis", axis, "num_examples, steps, lr or checkpoint")->required();
  auto* report = app.add_subcommand("report", "Consolidated tables");
  auto* all = app.add_subcommand("all", "Run every stage in order");

  CLI11_PARSE(app, argc, argv);
  opts.run_dir = run_dir;
  if (!config_path.empty()) opts.config_path = config_path;
  if (seed_opt->count() > 0) opts.seed = seed;

  try {
    nlohmann::json out;
    if (generate->parsed()) out = errtrace::cmd_generate(opts);
    if (train->parsed()) out = errtrace::cmd_train(opts);
    if (trace->parsed()) out = errtrace::cmd_trace(opts, method);
    if (distill->parsed()) out = errtrace::cmd_distill(opts);
    if (eval->parsed()) {
      const auto stored = opts.run_dir / "config.json";
      const auto config = std::filesystem::exists(stored)
                              ? errtrace::run_config_from_json(nlohmann::json::parse(errtrace::read_text(stored.string())))
                              : errtrace::resolve_config(opts);
      if (methods.empty()) methods = config.eval.methods;
      if (eval->count("--budgets") == 0) budgets = config.eval.budgets;
      std::erase(budgets, std::string());
      out = errtrace::cmd_eval(opts, methods, budgets);
    }
    if (sweep->parsed()) out = errtrace::cmd_sweep(opts, axis);
    if (report->parsed()) out = errtrace::cmd_report(opts);
    if (all->parsed()) out = errtrace::run_all(opts);
    std::cout << out.dump(2) << "\n";
  } catch (const errtrace::PipelineError& e) {
    return fail(e.kind(), e.what());
  } catch (const std::exception& e) {
    return fail("internal", e.what());
  }
  return 0;
}

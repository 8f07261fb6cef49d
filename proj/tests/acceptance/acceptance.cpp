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

// End-to-end acceptance run. Builds the default toy benchmark twice (one
// and two worker threads), then checks each criterion and prints one
// PASS/FAIL line per criterion. Exit status is the number of failures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errtrace/checkpoint_io.hpp"
#include "errtrace/corpus_io.hpp"
#include "errtrace/metrics.hpp"
#include "errtrace/pipeline.hpp"
#include "errtrace/seq2seq.hpp"
#include "errtrace/tracing.hpp"
#include "toy.hpp"

using namespace errtrace;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  int id;
  std::string name;
  bool pass;
  std::string detail;
};

std::vector<Outcome> outcomes;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  outcomes.push_back({id, name, pass, detail});
  std::printf("%s  %2d  %-28s %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string num(double v, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json load(const fs::path& p) { return json::parse(read_text(p.string())); }

// ---- criteria that need no pipeline ----

void gradient_check() {
  const auto t0 = std::chrono::steady_clock::now();
  const Seq2Seq model({48, 64});
  const auto params = model.init_params(17);
  Rng rng(5);
  std::vector<std::pair<TokenSeq, TokenSeq>> examples;
  for (int i = 0; i < 5; ++i) {
    TokenSeq s, t;
    for (std::size_t k = 0, n = 8 + rng.below(10); k < n; ++k) s.push_back(static_cast<TokenId>(4 + rng.below(44)));
    for (std::size_t k = 0, n = 2 + rng.below(6); k < n; ++k) t.push_back(static_cast<TokenId>(4 + rng.below(44)));
    examples.emplace_back(s, t);
  }
  const auto res = toy::check_gradients(model, params, examples, 20, 1e-4, 1e-7, 29);
  const bool ok = res.worst < 1e-4 && res.blocks.size() == model.layout().size();
  report(1, "gradient correctness", ok,
         "worst rel err " + num(res.worst * 1e6, 3) + "e-6 over " + std::to_string(res.checked) + " coords, " +
             std::to_string(res.blocks.size()) + " blocks, " + num(seconds_since(t0), 1) + "s");
}

void metric_oracles() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(31);
  int roc_bad = 0, pr_bad = 0;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> s;
    std::vector<bool> y;
    toy::random_instance(rng, 2 + rng.below(49), s, y);
    if (au_roc(s, y) != toy::brute_au_roc(s, y)) ++roc_bad;
  }
  for (int i = 0; i < 100; ++i) {
    std::vector<double> s;
    std::vector<bool> y;
    toy::random_instance(rng, 2 + rng.below(29), s, y);
    if (std::abs(au_pr(s, y) - toy::brute_au_pr(s, y).value()) > 1e-12) ++pr_bad;
  }
  const std::vector<double> table{94.14, 90.32, 91.73, 96.40};
  const double m = mean_ap(table);
  const bool ok = roc_bad == 0 && pr_bad == 0 && std::abs(m - 93.15) <= 0.005;
  report(2, "metric oracles", ok,
         "auROC mismatches " + std::to_string(roc_bad) + "/100, auPR mismatches " + std::to_string(pr_bad) +
             "/100, mAP " + num(m, 4) + ", " + num(seconds_since(t0), 1) + "s");
}

void softmax_oracles() {
  const toy::SoftmaxRegression model(3, 3);
  Rng rng(41);
  std::vector<double> start(9);
  for (auto& w : start) w = rng.uniform(-0.5, 0.5);
  std::vector<TracedExample> train;
  for (std::int64_t i = 0; i < 8; ++i) {
    TokenSeq s;
    for (std::size_t k = 0, n = 1 + rng.below(4); k < n; ++k) s.push_back(static_cast<TokenId>(rng.below(3)));
    train.push_back({i, s, {static_cast<TokenId>(rng.below(3))}, {}});
  }
  const std::vector<ErrorCase> errors{{{0, 2}, {1}, {0}, "p"}, {{1, 1, 2}, {2}, {1}, "p"}, {{0}, {0}, {2}, "p"}};

  double worst = 0.0;
  std::vector<std::vector<double>> xs;
  std::vector<int> fixed, wrong;
  for (const auto& e : errors) {
    xs.push_back(toy::bag(e.input));
    fixed.push_back(e.corrected[0]);
    wrong.push_back(e.erroneous[0]);
  }
  const auto w_fix = toy::replay_descent(start, xs, fixed, 5, 0.6);
  const auto w_err = toy::replay_descent(start, xs, wrong, 5, 0.6);
  const auto cea = score_cea_grad(model, start, errors, train, 5, 0.6);
  for (std::size_t i = 0; i < train.size(); ++i) {
    const auto x = toy::bag(train[i].source);
    const int y = train[i].target[0];
    worst = std::max(worst, std::abs(cea.scores[i] - (toy::Softmax3x3::nll(w_fix, x, y) - toy::Softmax3x3::nll(w_err, x, y))));
  }

  std::vector<Checkpoint> ckpts{{1, start, 0.5, 0.0}, {2, w_fix, 0.2, 0.0}};
  const auto tracin = score_tracin(model, ckpts, errors, train, model.all_params());
  for (std::size_t i = 0; i < train.size(); ++i) {
    double expect = 0.0;
    for (const auto& c : ckpts) {
      const auto gz = toy::Softmax3x3::grad(c.params, toy::bag(train[i].source), train[i].target[0]);
      for (const auto& e : errors) {
        const auto ge = toy::Softmax3x3::grad(c.params, toy::bag(e.input), e.erroneous[0]);
        for (std::size_t k = 0; k < gz.size(); ++k) expect += c.eta * gz[k] * ge[k] / static_cast<double>(errors.size());
      }
    }
    worst = std::max(worst, std::abs(tracin.scores[i] - expect));
  }
  report(10, "derived-oracle equivalence", worst <= 1e-10, "max |diff| " + num(worst * 1e12, 3) + "e-12 (9 params)");
}

// ---- pipeline criteria ----

struct Run {
  fs::path dir;
  bool ok = false;
  std::string error;
  double seconds = 0.0;
};

Run run_pipeline(const fs::path& dir, std::size_t threads) {
  Run r;
  r.dir = dir;
  const auto t0 = std::chrono::steady_clock::now();
  CommandOptions o;
  o.run_dir = dir;
  o.force = true;
  o.threads = threads;
  try {
    run_all(o);
    r.ok = true;
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.seconds = seconds_since(t0);
  std::printf("....  run %s (threads=%zu): %s in %.0fs\n", dir.filename().c_str(), threads,
              r.ok ? "done" : r.error.c_str(), r.seconds);
  std::fflush(stdout);
  return r;
}

struct PairScore {
  double au_pr = 0.0;
  double au_roc = 0.0;
};

std::map<std::string, PairScore> pair_scores(const json& metrics, const std::string& method) {
  std::map<std::string, PairScore> out;
  for (const auto& [tag, v] : metrics.at(method).at("pairs").items()) {
    out[tag] = {v.at("au_pr").get<double>(), v.at("au_roc").get<double>()};
  }
  return out;
}

double mean_of(const std::map<std::string, PairScore>& m, bool pr) {
  double s = 0.0;
  for (const auto& [_, v] : m) s += pr ? v.au_pr : v.au_roc;
  return m.empty() ? 0.0 : s / static_cast<double>(m.size());
}

void memorization(const Run& run) {
  if (!fs::exists(run.dir / "reports" / "train.json")) {
    report(4, "canary memorization", false, "no training report: " + run.error);
    return;
  }
  const auto t = load(run.dir / "reports" / "train.json");
  double best = 0.0;
  std::string detail;
  for (const auto& m : t.at("memorization")) {
    best = std::max(best, m.at("rate").get<double>());
    detail += m.at("pair").get<std::string>() + " " + num(100 * m.at("rate").get<double>(), 1) + "% ";
  }
  const auto inj = load(run.dir / "corpus" / "injection.json");
  std::string rates;
  bool in_range = true;
  for (const auto& c : inj.at("canaries")) {
    const double pct = c.at("percent").get<double>();
    in_range = in_range && pct >= 0.3 && pct <= 1.2;
    rates += num(pct, 2) + "% ";
  }
  report(4, "canary memorization", best >= 0.3 && in_range,
         "held-out rates " + detail + "| insertion " + rates);
}

void zero_invariants(const Run& run) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const auto corpus = corpus_from_files((run.dir / "corpus" / "corpus.jsonl").string(),
                                          (run.dir / "corpus" / "vocab.json").string());
    const auto ckpt = load_checkpoint((run.dir / "checkpoints" / (checkpoint_filename(1) + ".bin")).string());
    const Seq2Seq model(ckpt.model);
    const auto sets = load(run.dir / "scores" / "error_sets.json").at("pairs");
    std::vector<ErrorCase> errors;
    for (const auto& [tag, entry] : sets.items()) {
      if (entry.at("cases").empty()) continue;
      errors = error_cases_from_json(entry.at("cases"), corpus.vocab);
      break;
    }
    if (errors.empty()) throw std::runtime_error("no error set");
    const std::span<const TracedExample> train(corpus.train.data(), std::min<std::size_t>(1000, corpus.train.size()));
    const auto no_steps = score_cea_grad(model, ckpt.checkpoint.params, errors, train, 0, 5e-6);
    auto same = errors;
    for (auto& e : same) e.corrected = e.erroneous;
    const auto no_contrast = score_cea_grad(model, ckpt.checkpoint.params, same, train, 3, 5e-6);
    std::size_t nonzero = 0;
    for (double s : no_steps.scores) nonzero += s != 0.0;
    for (double s : no_contrast.scores) nonzero += s != 0.0;
    report(3, "zero-score invariants", nonzero == 0,
           std::to_string(nonzero) + " nonzero of " + std::to_string(2 * train.size()) + " scores, " +
               num(seconds_since(t0), 1) + "s");
  } catch (const std::exception& e) {
    report(3, "zero-score invariants", false, e.what());
  }
}

void headline(const Run& run, const json& metrics) {
  const auto cea = pair_scores(metrics, "cea");
  const auto tracin = pair_scores(metrics, "tracin");
  const auto bm25 = pair_scores(metrics, "bm25");
  const auto random = pair_scores(metrics, "random");

  bool per_pair = !cea.empty();
  double min_pr = 1.0, min_roc = 1.0;
  for (const auto& [_, v] : cea) {
    min_pr = std::min(min_pr, v.au_pr);
    min_roc = std::min(min_roc, v.au_roc);
    per_pair = per_pair && v.au_pr >= 0.85 && v.au_roc >= 0.95;
  }
  const double cea_map = mean_of(cea, true);
  const double tracin_gap = cea_map - mean_of(tracin, true);
  const double bm25_gap = cea_map - mean_of(bm25, true);

  // Random: mean over pairs of auPR against mean prevalence, mean auROC.
  const auto corpus = corpus_from_files((run.dir / "corpus" / "corpus.jsonl").string(),
                                        (run.dir / "corpus" / "vocab.json").string());
  double prevalence = 0.0;
  for (const auto& [tag, _] : random) {
    prevalence += static_cast<double>(std::count_if(corpus.train.begin(), corpus.train.end(),
                                                    [&](const auto& ex) { return ex.canary_tag == tag; })) /
                  static_cast<double>(corpus.train.size());
  }
  prevalence /= std::max<std::size_t>(1, random.size());
  const double rand_pr = mean_of(random, true), rand_roc = mean_of(random, false);
  const bool rand_ok = std::abs(rand_pr - prevalence) <= 0.5 * prevalence && rand_roc >= 0.45 && rand_roc <= 0.55;

  const bool ok = per_pair && tracin_gap >= 0.20 && bm25_gap >= 0.20 && rand_ok;
  report(5, "headline ordering", ok,
         "CEA min auPR " + num(100 * min_pr) + " min auROC " + num(100 * min_roc) + " | mAP CEA " + num(100 * cea_map) +
             " TracIn " + num(100 * mean_of(tracin, true)) + " BM25 " + num(100 * mean_of(bm25, true)) +
             " | Random auPR " + num(100 * rand_pr) + " vs prevalence " + num(100 * prevalence) + ", auROC " +
             num(100 * rand_roc));
}

void contrast_ablation(const json& metrics) {
  const auto cea = pair_scores(metrics, "cea");
  const auto raw = pair_scores(metrics, "cea_grad");
  const auto plain = pair_scores(metrics, "grad_noncontrast");
  const double raw_pr = mean_of(raw, true), cea_pr = mean_of(cea, true), plain_pr = mean_of(plain, true);
  const double roc_change = std::abs(mean_of(cea, false) - mean_of(raw, false));
  const bool contrast_ok = raw_pr - plain_pr >= 0.30;
  const bool distill_ok = cea_pr - raw_pr >= 0.03 && roc_change < 0.02;
  report(6, "contrast ablation", contrast_ok && distill_ok,
         "raw " + num(100 * raw_pr) + " vs non-contrast " + num(100 * plain_pr) + " (" +
             (contrast_ok ? "ok" : "short") + ") | full " + num(100 * cea_pr) + " vs raw " + num(100 * raw_pr) +
             ", auROC change " + num(100 * roc_change) + " (" + (distill_ok ? "ok" : "distillation gain missing") + ")");
}

void removal(const Run& run) {
  const auto path = run.dir / "reports" / "retrain.json";
  if (!fs::exists(path)) {
    report(7, "removal and retrain", false, "no retrain report");
    return;
  }
  const auto rows = load(path);
  const json* cea = nullptr;
  const json* oracle = nullptr;
  for (const auto& r : rows) {
    if (r.at("method") == "oracle") oracle = &r;
    if (r.at("method") == "cea" && r.at("budget") == "2x") cea = &r;
  }
  if (!cea || !oracle) {
    report(7, "removal and retrain", false, "missing cea or oracle row");
    return;
  }
  const double before = cea->at("halluc_rate_before").get<double>();
  const double after = cea->at("halluc_rate_after").get<double>();
  const double orate = oracle->at("halluc_rate_after").get<double>();
  const double rouge_drop = cea->at("rouge_l_before").get<double>() - cea->at("rouge_l").get<double>();
  const bool ok = before > 0.0 && after <= 0.5 * before && after <= orate + 0.02 && rouge_drop < 0.03;
  report(7, "removal and retrain", ok,
         "halluc " + num(100 * before) + "% -> " + num(100 * after) + "% (oracle " + num(100 * orate) +
             "%), ROUGE-L drop " + num(100 * rouge_drop) + ", removed " + std::to_string(cea->at("removed").get<int>()) +
             " with " + std::to_string(cea->at("canaries_removed").get<int>()) + " canaries");
}

void sweeps(const Run& run) {
  const auto ne_path = run.dir / "reports" / "sweep-num_examples.json";
  const auto ck_path = run.dir / "reports" / "sweep-checkpoint.json";
  if (!fs::exists(ne_path) || !fs::exists(ck_path)) {
    report(8, "sweep harness shape", false, "missing sweep reports");
    return;
  }
  // num_examples: every pair scored at both 5 and 15 keeps its auPR within 2 points
  const auto ne = load(ne_path);
  const json* p5 = nullptr;
  const json* p15 = nullptr;
  for (const auto& p : ne.at("points")) {
    if (p.at("value").get<double>() == 5.0) p5 = &p;
    if (p.at("value").get<double>() == 15.0) p15 = &p;
  }
  bool ne_ok = p5 && p15;
  double worst_drop = 0.0;
  std::size_t compared = 0;
  if (ne_ok) {
    for (const auto& [tag, v] : p15->at("pairs").items()) {
      if (!p5->at("pairs").contains(tag)) continue;
      ++compared;
      worst_drop = std::max(worst_drop, p5->at("pairs").at(tag).at("au_pr").get<double>() - v.at("au_pr").get<double>());
    }
    ne_ok = compared > 0 && worst_drop <= 0.02;
  }

  // checkpoint: spread of mean auPR across checkpoints
  const auto ck = load(ck_path);
  double best = 0.0, worst = 1.0;
  std::string series;
  for (const auto& p : ck.at("points")) {
    const double v = p.at("mean_au_pr").get<double>();
    best = std::max(best, v);
    worst = std::min(worst, v);
    series += num(100 * v, 1) + " ";
  }
  const bool ck_ok = !ck.at("points").empty() && best - worst <= 0.08;
  report(8, "sweep harness shape", ne_ok && ck_ok,
         "num_examples 5->15 worst drop " + num(100 * worst_drop) + " over " + std::to_string(compared) +
             " pairs | checkpoint mean auPR " + series + "(spread " + num(100 * (best - worst)) + ")");
}

void determinism(const Run& a, const Run& b) {
  std::size_t compared = 0;
  std::vector<std::string> differ;
  for (const char* sub : {"scores", "reports", "distill", "checkpoints", "corpus"}) {
    for (const auto& e : fs::recursive_directory_iterator(a.dir / sub)) {
      if (!e.is_regular_file()) continue;
      const auto rel = fs::relative(e.path(), a.dir);
      ++compared;
      if (!fs::exists(b.dir / rel) || read_text(e.path().string()) != read_text((b.dir / rel).string())) {
        differ.push_back(rel.string());
      }
    }
  }
  std::string detail = std::to_string(compared) + " artifacts compared, " + std::to_string(differ.size()) + " differ";
  if (!differ.empty()) detail += " (first: " + differ.front() + ")";
  report(9, "determinism", a.ok && b.ok && compared > 0 && differ.empty(), detail);
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "errtrace_acceptance";
  const auto t0 = std::chrono::steady_clock::now();

  gradient_check();
  metric_oracles();
  softmax_oracles();

  const auto a = run_pipeline(work / "run-a", 1);
  const auto b = run_pipeline(work / "run-b", 2);

  zero_invariants(a);
  memorization(a);
  if (fs::exists(a.dir / "reports" / "metrics.json")) {
    const auto metrics = load(a.dir / "reports" / "metrics.json");
    headline(a, metrics);
    contrast_ablation(metrics);
  } else {
    report(5, "headline ordering", false, "no metrics: " + a.error);
    report(6, "contrast ablation", false, "no metrics: " + a.error);
  }
  removal(a);
  sweeps(a);
  determinism(a, b);

  std::sort(outcomes.begin(), outcomes.end(), [](const auto& x, const auto& y) { return x.id < y.id; });
  int failed = 0;
  std::printf("\nsummary (%.0fs total)\n", seconds_since(t0));
  for (const auto& o : outcomes) {
    std::printf("%s  %2d  %s\n", o.pass ? "PASS" : "FAIL", o.id, o.name.c_str());
    failed += o.pass ? 0 : 1;
  }
  std::printf("%zu criteria, %d failed\n", outcomes.size(), failed);
  return failed;
}

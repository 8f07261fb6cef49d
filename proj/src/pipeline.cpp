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

#include "errtrace/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "errtrace/checkpoint_io.hpp"
#include "errtrace/corpus_io.hpp"
#include "errtrace/error.hpp"
#include "errtrace/evaluation.hpp"
#include "errtrace/hash.hpp"
#include "errtrace/rng.hpp"
#include "errtrace/run_dir.hpp"

namespace errtrace {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kConfig = "config.json";
constexpr const char* kCorpus = "corpus/corpus.jsonl";
constexpr const char* kVocab = "corpus/vocab.json";
constexpr const char* kInjection = "corpus/injection.json";
constexpr const char* kErrorSets = "scores/error_sets.json";
constexpr const char* kTrainReport = "reports/train.json";
constexpr const char* kMetrics = "reports/metrics.json";
constexpr const char* kRetrain = "reports/retrain.json";

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string pct(double v) { return fmt("%.2f", 100.0 * v); }

std::string ckpt_path(std::size_t epoch) { return "checkpoints/" + checkpoint_filename(epoch) + ".bin"; }

// Everything a stage after generate needs from disk.
struct Run {
  RunDir dir;
  RunConfig config;
  Corpus corpus;
  std::size_t threads = 1;
};

Run open_run(const CommandOptions& o, const std::string& stage) {
  if (!fs::exists(o.run_dir / "manifest.json")) {
    throw PipelineError("stage-dependency", stage + ": " + o.run_dir.string() + " is not a run directory; run generate first");
  }
  Run run{RunDir(o.run_dir), {}, {}, std::max<std::size_t>(1, o.threads)};
  run.config = run_config_from_json(json::parse(run.dir.read(kConfig, stage)));
  if (o.config_path || o.seed) {
    const auto requested = resolve_config(o);
    if (config_hash(requested) != config_hash(run.config)) {
      throw PipelineError("stage-dependency", stage + ": the given config or seed differs from the one this run was "
                                                  "generated with; rerun generate with --force");
    }
  }
  run.config.trace.threads = run.threads;
  run.dir.require(kCorpus, stage);
  run.dir.require(kVocab, stage);
  run.corpus = corpus_from_files(run.dir.path(kCorpus).string(), run.dir.path(kVocab).string());
  return run;
}

Seq2Seq model_for(const Run& run) { return Seq2Seq({run.corpus.vocab.size(), run.config.train.dim}); }

std::vector<Checkpoint> load_checkpoints(const Run& run, const std::string& stage) {
  std::vector<Checkpoint> out;
  for (std::size_t e = 1; e <= run.config.train.epochs; ++e) {
    run.dir.require(ckpt_path(e), stage);
    out.push_back(load_checkpoint(run.dir.path(ckpt_path(e)).string()).checkpoint);
  }
  return out;
}

std::vector<std::string> checkpoint_paths(const RunConfig& config) {
  std::vector<std::string> paths;
  for (std::size_t e = 1; e <= config.train.epochs; ++e) paths.push_back(ckpt_path(e));
  return paths;
}

// Pairs whose model produced enough observed errors to be traced, with
// their error sets, in injection order.
std::vector<std::pair<EntityPair, std::vector<ErrorCase>>> load_error_sets(const Run& run, const std::string& stage) {
  const json j = json::parse(run.dir.read(kErrorSets, stage));
  std::vector<std::pair<EntityPair, std::vector<ErrorCase>>> sets;
  for (const auto& p : run.corpus.pairs) {
    const auto& entry = j.at("pairs").at(p.tag);
    if (entry.at("cases").empty()) continue;
    sets.emplace_back(p, error_cases_from_json(entry.at("cases"), run.corpus.vocab));
  }
  if (sets.empty() && !run.corpus.pairs.empty()) {
    throw PipelineError("insufficient-errors", stage + ": no pair has enough observed errors to trace; see " + kErrorSets);
  }
  return sets;
}

std::vector<EntityPair> traced_pairs(const Run& run, const std::string& stage) {
  std::vector<EntityPair> pairs;
  for (const auto& [p, _] : load_error_sets(run, stage)) pairs.push_back(p);
  return pairs;
}

void write_table(Run& run, const ScoreTable& table, const std::string& tag, const std::vector<std::string>& inputs) {
  validate(table);
  const auto corpus_hash = run.dir.manifest()["artifacts"][kCorpus]["hash"].get<std::string>();
  const auto rel = score_path(table.method, tag);
  run.dir.write(rel, to_csv(table), inputs);
  run.dir.write(rel.substr(0, rel.size() - 4) + ".json", sidecar(table, corpus_hash).dump(2) + "\n", {rel});
}

ScoreTable read_table(const Run& run, const std::string& method, const std::string& tag, const std::string& stage) {
  const auto rel = score_path(method, tag);
  if (!run.dir.has(rel)) {
    const std::string hint = method == "cea" ? "run distill" : "run trace --method " + method;
    throw PipelineError("stage-dependency", stage + " needs " + rel + "; " + hint + " first");
  }
  const auto side = json::parse(run.dir.read(rel.substr(0, rel.size() - 4) + ".json", stage));
  return score_table_from_csv(run.dir.read(rel, stage), method, side.at("config_fingerprint").get<std::string>());
}

std::size_t total_canaries(const Corpus& corpus) {
  return static_cast<std::size_t>(
      std::count_if(corpus.train.begin(), corpus.train.end(), [](const TracedExample& e) { return e.canary_tag; }));
}

std::string classifier_signature(const ClassifierConfig& c, std::size_t k) {
  return fmt("lr=%.17g", c.lr) + ";epochs=" + std::to_string(c.epochs) + ";patience=" + std::to_string(c.patience) +
         fmt(";holdout=%.17g", c.holdout_fraction) + ";seed=" + std::to_string(c.seed) +
         ";hash_dim=" + std::to_string(c.hash_dim) + ";k=" + std::to_string(k);
}

json ranking_json(const RankingMetrics& m) {
  return {{"au_pr", m.au_pr}, {"au_roc", m.au_roc}, {"positives", m.positives}, {"total", m.total}};
}

json retrain_json(const RetrainReport& r, const std::string& budget) {
  return {{"method", r.method},
          {"budget", budget},
          {"removed", r.removed},
          {"canaries_removed", r.canaries_removed},
          {"halluc_rate_before", r.halluc_rate_before},
          {"halluc_rate_after", r.halluc_rate_after},
          {"rouge_l_before", r.rouge_l_before},
          {"rouge_l", r.rouge_l},
          {"oracle_rate", r.oracle_rate}};
}

}  // namespace

std::string score_path(const std::string& method, const std::string& tag) {
  return "scores/" + method + "-" + tag + ".csv";
}

RunConfig resolve_config(const CommandOptions& o) {
  RunConfig config = o.config_path ? run_config_from_json(json::parse(read_text(o.config_path->string())))
                                   : default_run_config();
  if (o.seed) apply_seed(config, *o.seed);
  validate(config);
  return config;
}

json cmd_generate(const CommandOptions& o) {
  const RunConfig config = resolve_config(o);
  if (fs::exists(o.run_dir) && !fs::is_empty(o.run_dir)) {
    if (!o.force) throw PipelineError("io", o.run_dir.string() + " exists and is not empty; pass --force to regenerate");
    for (const auto& entry : fs::directory_iterator(o.run_dir)) fs::remove_all(entry.path());
  }
  fs::create_directories(o.run_dir);
  RunDir dir(o.run_dir);
  dir.init();
  dir.write(kConfig, to_json(config).dump(2) + "\n");

  const Corpus base = generate_base_corpus(config.corpus, config.seed);
  const auto injected = inject_canaries(base, config.canaries, config.seed);
  const auto& corpus = injected.corpus;
  dir.write(kCorpus, corpus_to_jsonl(corpus), {kConfig});
  dir.write(kVocab, corpus_sidecar(corpus).dump(2) + "\n", {kConfig});

  json counts = json::array();
  for (const auto& c : injected.counts) {
    counts.push_back({{"tag", c.tag}, {"eligible", c.eligible}, {"inserted", c.inserted}, {"percent", 100.0 * c.fraction}});
    dir.log("generate", {{"event", "injected"}, {"pair", c.tag}, {"inserted", c.inserted}, {"percent", 100.0 * c.fraction}});
  }
  for (const auto& w : injected.warnings) dir.log("generate", {{"event", "warning"}, {"message", w}});
  const json summary{{"train", corpus.train.size()},
                     {"val", corpus.val.size()},
                     {"vocab", corpus.vocab.size()},
                     {"canaries", counts},
                     {"warnings", injected.warnings}};
  dir.write(kInjection, summary.dump(2) + "\n", {kCorpus});
  return summary;
}

json cmd_train(const CommandOptions& o) {
  Run run = open_run(o, "train");
  const auto& tc = run.config.train;
  const Seq2Seq model = model_for(run);
  run.dir.remove_matching("checkpoints/");
  const auto init = warm_start(model, run.corpus.pretrain, tc);
  const auto checkpoints = train(model, init, run.corpus.train, tc, [&](const EpochProgress& p) {
    run.dir.log("train", {{"event", "epoch"}, {"epoch", p.epoch}, {"loss", p.mean_loss}});
  });
  json losses = json::array();
  for (const auto& c : checkpoints) {
    save_checkpoint(run.dir.path(ckpt_path(c.epoch)).string(), c, model, {{"seed", tc.seed}});
    run.dir.record(ckpt_path(c.epoch), {kCorpus, kConfig});
    losses.push_back(c.train_loss);
  }

  const auto& final_params = checkpoints.back().params;
  const auto outputs = decode_all(model, final_params, run.corpus.val, tc.max_decode_len, run.threads);
  const auto mem = memorization(run.corpus.val, outputs, run.corpus.pairs, run.corpus.vocab);
  const QualityMetrics baseline{
      hallucination_rate(run.corpus.val, outputs, pair_entity_ids(run.corpus.pairs, run.corpus.vocab)),
      mean_rouge_l(run.corpus.val, outputs)};

  json mem_json = json::array();
  double best_rate = 0.0;
  for (const auto& m : mem) {
    mem_json.push_back(json{{"pair", m.tag}, {"eligible", m.eligible}, {"hallucinated", m.hallucinated}, {"rate", m.rate}});
    best_rate = std::max(best_rate, m.rate);
  }

  const auto generations = as_generations(run.corpus.val, outputs);
  json sets{{"num_errors", run.config.num_errors}, {"pairs", json::object()}};
  for (const auto& p : run.corpus.pairs) {
    json entry{{"cases", json::array()}, {"diagnostic", ""}};
    try {
      entry["cases"] = error_cases_to_json(
          select_error_set(generations, p, run.corpus.vocab, run.config.num_errors, run.config.seed), run.corpus.vocab);
    } catch (const PipelineError& e) {
      if (e.kind() != "insufficient-errors") throw;
      entry["diagnostic"] = e.what();
      run.dir.log("train", {{"event", "warning"}, {"message", e.what()}});
    }
    sets["pairs"][p.tag] = entry;
  }
  auto ckpts = checkpoint_paths(run.config);
  run.dir.write(kErrorSets, sets.dump(2) + "\n", {ckpts.back()});

  const json report{{"epoch_losses", losses},
                    {"memorization", mem_json},
                    {"baseline", {{"halluc_rate", baseline.halluc_rate}, {"rouge_l", baseline.rouge_l}}}};
  run.dir.write(kTrainReport, report.dump(2) + "\n", {ckpts.back()});
  if (!run.corpus.pairs.empty() && best_rate < 0.3) {
    throw PipelineError("memorization", "no canary pair reached a 30% hallucination rate on eligible held-out inputs "
                                        "(best " + pct(best_rate) + "%); see reports/train.json");
  }
  return report;
}

json cmd_distill(const CommandOptions& o) {
  Run run = open_run(o, "distill");
  const std::size_t k = run.config.distill.k ? run.config.distill.k : default_distill_k(run.corpus.train.size());
  json summary = json::object();
  for (const auto& p : traced_pairs(run, "distill")) {
    const auto seeds = read_table(run, "cea_grad", p.tag, "distill");
    const auto set = build_distill_set(seeds, k);
    ClassifierConfig cc = run.config.distill.classifier;
    cc.seed = derive_seed(cc.seed, fnv1a64(p.tag));
    const auto params = train_classifier(set, run.corpus.train, run.corpus.vocab, cc);
    auto table = score_classifier(params, run.corpus.train, run.corpus.vocab, run.threads);
    table.config_fingerprint = seeds.config_fingerprint + "+" + hex64(fnv1a64(classifier_signature(cc, k)));
    const auto src = score_path("cea_grad", p.tag);
    run.dir.write("distill/" + p.tag + "-set.json", to_json(set).dump() + "\n", {src});
    run.dir.write("distill/" + p.tag + "-classifier.json", to_json(params).dump() + "\n", {src});
    write_table(run, table, p.tag, {"distill/" + p.tag + "-classifier.json"});
    summary[p.tag] = {{"k", k}, {"epochs_run", params.epochs_run}, {"train_accuracy", params.train_accuracy}};
    run.dir.log("distill", {{"event", "classifier"}, {"pair", p.tag}, {"epochs_run", params.epochs_run},
                            {"train_accuracy", params.train_accuracy}, {"heldout_loss", params.heldout_loss}});
  }
  return summary;
}

json cmd_trace(const CommandOptions& o, const std::string& method) {
  if (!is_known_method(method)) throw config_error("unknown method '" + method + "'");
  if (method == "cea") return cmd_distill(o);
  Run run = open_run(o, "trace");
  const auto& ec = run.config.trace;
  const auto& train_set = run.corpus.train;
  const Seq2Seq model = model_for(run);
  const auto errors = load_error_sets(run, "trace");
  const auto ckpt_files = checkpoint_paths(run.config);

  std::vector<Checkpoint> checkpoints;
  if (method != "random" && method != "bm25") checkpoints = load_checkpoints(run, "trace");

  json summary = json::object();
  for (const auto& [p, errs] : errors) {
    ScoreTable table;
    std::vector<std::string> inputs{kErrorSets};
    if (method == "random") {
      table = score_random(train_set, derive_seed(run.config.seed, fnv1a64(p.tag)));
      inputs = {kCorpus};
    } else if (method == "bm25") {
      table = score_bm25(errs, train_set, ec.bm25_k1, ec.bm25_b, run.threads);
    } else if (method == "embed") {
      table = score_embed(model, checkpoints.back().params, errs, train_set, run.threads);
    } else if (method == "tracin" || method == "tracin_contrast") {
      std::vector<Checkpoint> used;
      if (ec.tracin_checkpoints.empty()) {
        used = checkpoints;
        inputs.insert(inputs.end(), ckpt_files.begin(), ckpt_files.end());
      } else {
        for (auto e : ec.tracin_checkpoints) {
          if (e < 1 || e > checkpoints.size()) throw config_error("trace.tracin_checkpoints lists unsaved epoch " + std::to_string(e));
          used.push_back(checkpoints[e - 1]);
          inputs.push_back(ckpt_path(e));
        }
      }
      const auto subset = model.named_subset(ec.subset);
      table = method == "tracin" ? score_tracin(model, used, errs, train_set, subset, run.threads)
                                 : score_tracin_contrast(model, used, errs, train_set, subset, run.threads);
    } else {
      if (ec.checkpoint < 1 || ec.checkpoint > checkpoints.size()) {
        throw config_error("trace.checkpoint " + std::to_string(ec.checkpoint) + " was not saved");
      }
      const auto& start = checkpoints[ec.checkpoint - 1].params;
      inputs.push_back(ckpt_path(ec.checkpoint));
      table = method == "cea_grad" ? score_cea_grad(model, start, errs, train_set, ec.steps, ec.lr, run.threads)
                                   : score_grad_noncontrast(model, start, errs, train_set, ec.steps, ec.lr, run.threads);
    }
    table.method = method;
    table.config_fingerprint = fingerprint(ec, method);
    write_table(run, table, p.tag, inputs);
    summary[p.tag] = score_path(method, p.tag);
    run.dir.log("trace", {{"event", "scored"}, {"method", method}, {"pair", p.tag}, {"rows", table.size()}});
  }
  return summary;
}

json cmd_eval(const CommandOptions& o, const std::vector<std::string>& methods, const std::vector<std::string>& budgets) {
  for (const auto& m : methods) {
    if (!is_known_method(m)) throw config_error("unknown method '" + m + "'");
  }
  Run run = open_run(o, "eval");
  const auto pairs = traced_pairs(run, "eval");
  const std::size_t canaries = total_canaries(run.corpus);
  std::vector<std::size_t> budget_sizes;
  for (const auto& b : budgets) budget_sizes.push_back(parse_budget(b, canaries));

  // Ranking quality per method and pair.
  json metrics = json::object();
  std::vector<std::string> table_inputs;
  for (const auto& m : methods) {
    json per_pair = json::object();
    std::vector<double> aps, rocs;
    for (const auto& p : pairs) {
      const auto table = read_table(run, m, p.tag, "eval");
      table_inputs.push_back(score_path(m, p.tag));
      const auto labels = canary_labels(run.corpus.train, p.tag);
      if (std::none_of(labels.begin(), labels.end(), [](bool b) { return b; })) {
        throw PipelineError("data", "pair " + p.tag + " has no injected canaries to evaluate against");
      }
      const auto r = evaluate_ranking(table, labels);
      per_pair[p.tag] = ranking_json(r);
      aps.push_back(r.au_pr);
      rocs.push_back(r.au_roc);

      std::string pr_csv = "threshold,precision,recall\n";
      for (const auto& pt : r.curve) pr_csv += fmt("%.17g", pt.threshold) + "," + fmt("%.17g", pt.precision) + "," + fmt("%.17g", pt.recall) + "\n";
      std::string roc_csv = "threshold,fpr,tpr\n";
      for (const auto& pt : roc_curve(table.scores, labels)) roc_csv += fmt("%.17g", pt.threshold) + "," + fmt("%.17g", pt.fpr) + "," + fmt("%.17g", pt.tpr) + "\n";
      run.dir.write("reports/curves/" + m + "-" + p.tag + "-pr.csv", pr_csv, {score_path(m, p.tag)});
      run.dir.write("reports/curves/" + m + "-" + p.tag + "-roc.csv", roc_csv, {score_path(m, p.tag)});
    }
    metrics[m] = {{"pairs", per_pair}, {"map", aps.empty() ? 0.0 : mean_ap(aps)},
                  {"mean_au_roc", rocs.empty() ? 0.0 : mean_ap(rocs)}};
  }
  run.dir.write(kMetrics, metrics.dump(2) + "\n", table_inputs);

  // Removal and retraining.
  json retrain = json::array();
  if (!budget_sizes.empty()) {
    const auto report = json::parse(run.dir.read(kTrainReport, "eval"));
    const QualityMetrics baseline{report.at("baseline").at("halluc_rate"), report.at("baseline").at("rouge_l")};
    const auto oracle = oracle_removal(run.corpus, run.config.train, baseline, run.threads);
    run.dir.log("eval", {{"event", "retrained"}, {"method", "oracle"}, {"halluc_rate", oracle.halluc_rate_after}});
    retrain.push_back(retrain_json(oracle, "oracle"));
    for (const auto& m : methods) {
      std::vector<ScoreTable> tables;
      for (const auto& p : pairs) tables.push_back(read_table(run, m, p.tag, "eval"));
      if (tables.empty()) continue;
      const auto combined = combine_by_rank(tables);
      for (std::size_t b = 0; b < budgets.size(); ++b) {
        auto r = remove_and_retrain(run.corpus, combined, budget_sizes[b], run.config.train, baseline,
                                    oracle.halluc_rate_after, run.threads);
        r.method = m;
        retrain.push_back(retrain_json(r, budgets[b]));
        run.dir.log("eval", {{"event", "retrained"}, {"method", m}, {"budget", budgets[b]},
                             {"removed", r.removed}, {"halluc_rate", r.halluc_rate_after}});
      }
    }
    auto inputs = table_inputs;
    inputs.push_back(kTrainReport);
    run.dir.write(kRetrain, retrain.dump(2) + "\n", inputs);
  }
  return {{"metrics", metrics}, {"retrain", retrain}};
}

json cmd_sweep(const CommandOptions& o, const std::string& axis) {
  Run run = open_run(o, "sweep");
  const auto grid_it = run.config.eval.sweeps.find(axis);
  if (std::find(sweep_axes().begin(), sweep_axes().end(), axis) == sweep_axes().end()) {
    throw config_error("unknown sweep axis '" + axis + "'");
  }
  if (grid_it == run.config.eval.sweeps.end()) throw config_error("no grid configured for sweep axis '" + axis + "'");
  const Seq2Seq model = model_for(run);
  const auto checkpoints = load_checkpoints(run, "sweep");
  const auto outputs = decode_all(model, checkpoints.back().params, run.corpus.val, run.config.train.max_decode_len,
                                  run.threads);

  SweepInputs in;
  in.model = &model;
  in.checkpoints = checkpoints;
  in.train = run.corpus.train;
  in.pairs = run.corpus.pairs;
  in.generations = as_generations(run.corpus.val, outputs);
  in.vocab = &run.corpus.vocab;
  in.estimator = run.config.trace;
  in.num_errors = run.config.num_errors;
  in.error_seed = run.config.seed;
  const auto result = run_sweep(axis, grid_it->second, in);

  std::string csv = axis + ",pair,au_pr,au_roc\n";
  json points = json::array();
  for (const auto& pt : result.points) {
    const std::string v = fmt("%.6g", pt.value);
    json per = json::object();
    for (const auto& pr : pt.pairs) {
      csv += v + "," + pr.tag + "," + pct(pr.au_pr) + "," + pct(pr.au_roc) + "\n";
      per[pr.tag] = {{"au_pr", pr.au_pr}, {"au_roc", pr.au_roc}};
    }
    if (!pt.pairs.empty()) csv += v + ",mean," + pct(pt.mean_au_pr) + "," + pct(pt.mean_au_roc) + "\n";
    points.push_back({{"value", pt.value}, {"pairs", per}, {"skipped", pt.skipped},
                      {"mean_au_pr", pt.mean_au_pr}, {"mean_au_roc", pt.mean_au_roc}});
    for (const auto& s : pt.skipped) {
      run.dir.log("sweep", {{"event", "skipped"}, {"axis", axis}, {"value", pt.value}, {"pair", s}});
    }
  }
  const auto inputs = checkpoint_paths(run.config);
  run.dir.write("reports/sweep-" + axis + ".csv", csv, inputs);
  const json out{{"axis", axis}, {"points", points}};
  run.dir.write("reports/sweep-" + axis + ".json", out.dump(2) + "\n", inputs);
  return out;
}

json cmd_report(const CommandOptions& o) {
  Run run = open_run(o, "report");
  const auto metrics = json::parse(run.dir.read(kMetrics, "report"));
  std::vector<std::string> inputs{kMetrics, kInjection};
  std::vector<std::string> tags;
  for (const auto& p : traced_pairs(run, "report")) tags.push_back(p.tag);

  // Canary results: one row per method, auPR/auROC per pair, then mAP.
  std::string canary = "method";
  for (const auto& t : tags) canary += "," + t + "_au_pr," + t + "_au_roc";
  canary += ",map\n";
  for (const auto& [method, m] : metrics.items()) {
    canary += method;
    for (const auto& t : tags) {
      canary += "," + pct(m["pairs"][t]["au_pr"].get<double>()) + "," + pct(m["pairs"][t]["au_roc"].get<double>());
    }
    canary += "," + pct(m["map"].get<double>()) + "\n";
  }
  run.dir.write("reports/canary_results.csv", canary, inputs);

  // Contrast ablation rows, where available.
  const std::vector<std::pair<std::string, std::string>> variants{
      {"cea", "full"}, {"cea_grad", "-classifier"}, {"grad_noncontrast", "-contrast"},
      {"tracin", "tracin"}, {"tracin_contrast", "tracin+contrast"}};
  std::string contrast = "variant,method,map,mean_au_roc\n";
  for (const auto& [method, label] : variants) {
    if (!metrics.contains(method)) continue;
    contrast += label + "," + method + "," + pct(metrics[method]["map"].get<double>()) + "," +
                pct(metrics[method]["mean_au_roc"].get<double>()) + "\n";
  }
  run.dir.write("reports/contrast.csv", contrast, inputs);

  json retrain = json::array();
  if (run.dir.has(kRetrain)) {
    retrain = json::parse(run.dir.read(kRetrain, "report"));
    inputs.push_back(kRetrain);
    std::string rows = "method,budget,removed,canaries_removed,halluc_pct,rouge_l\n";
    if (!retrain.empty()) {
      rows += "baseline,0,0,0," + pct(retrain[0]["halluc_rate_before"].get<double>()) + "," +
              pct(retrain[0]["rouge_l_before"].get<double>()) + "\n";
    }
    for (const auto& r : retrain) {
      rows += r["method"].get<std::string>() + "," + r["budget"].get<std::string>() + "," +
              std::to_string(r["removed"].get<std::size_t>()) + "," +
              std::to_string(r["canaries_removed"].get<std::size_t>()) + "," +
              pct(r["halluc_rate_after"].get<double>()) + "," + pct(r["rouge_l"].get<double>()) + "\n";
    }
    run.dir.write("reports/retraining.csv", rows, {kRetrain});
  }

  json sweeps = json::object();
  for (const auto& axis : sweep_axes()) {
    const auto rel = "reports/sweep-" + axis + ".json";
    if (!run.dir.has(rel)) continue;
    sweeps[axis] = json::parse(run.dir.read(rel, "report"));
    inputs.push_back(rel);
  }

  const json report{{"config_hash", config_hash(run.config)},
                    {"injection", json::parse(run.dir.read(kInjection, "report"))},
                    {"train", run.dir.has(kTrainReport) ? json::parse(run.dir.read(kTrainReport, "report")) : json()},
                    {"canary_results", metrics},
                    {"retraining", retrain},
                    {"sweeps", sweeps}};
  run.dir.write("reports/report.json", report.dump(2) + "\n", inputs);
  return report;
}

json run_all(const CommandOptions& o) {
  cmd_generate(o);
  cmd_train(o);
  const auto config = resolve_config(o);
  CommandOptions later = o;
  for (const auto& m : config.eval.methods) {
    if (m != "cea") cmd_trace(later, m);
  }
  const bool wants_cea = std::find(config.eval.methods.begin(), config.eval.methods.end(), "cea") != config.eval.methods.end();
  if (wants_cea) {
    if (std::find(config.eval.methods.begin(), config.eval.methods.end(), "cea_grad") == config.eval.methods.end()) {
      cmd_trace(later, "cea_grad");
    }
    cmd_distill(later);
  }
  cmd_eval(later, config.eval.methods, config.eval.budgets);
  for (const auto& [axis, _] : config.eval.sweeps) cmd_sweep(later, axis);
  return cmd_report(later);
}

}  // namespace errtrace

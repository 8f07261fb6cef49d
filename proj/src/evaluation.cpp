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

#include "errtrace/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "errtrace/error.hpp"
#include "errtrace/parallel.hpp"
#include "errtrace/rng.hpp"
#include "errtrace/rouge.hpp"

namespace errtrace {

std::vector<TokenSeq> decode_all(const Seq2Seq& model, std::span<const double> params,
                                 std::span<const TracedExample> inputs, std::size_t max_len, std::size_t threads) {
  std::vector<TokenSeq> out(inputs.size());
  parallel_for(inputs.size(), threads,
               [&](std::size_t i) { out[i] = model.greedy_decode(params, inputs[i].source, max_len); });
  return out;
}

std::vector<Generation> as_generations(std::span<const TracedExample> inputs, std::span<const TokenSeq> outputs) {
  std::vector<Generation> g;
  g.reserve(inputs.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) g.push_back({inputs[i].source, outputs[i]});
  return g;
}

std::vector<TokenId> pair_entity_ids(std::span<const EntityPair> pairs, const Vocab& vocab) {
  std::set<TokenId> ids;
  for (const auto& p : pairs) {
    const auto r = resolve(p, vocab);
    ids.insert(r.original);
    ids.insert(r.perturbed);
  }
  return {ids.begin(), ids.end()};
}

bool is_hallucination(std::span<const TokenId> source, std::span<const TokenId> output,
                      std::span<const TokenId> watched) {
  for (TokenId t : watched) {
    if (contains_token(output, t) && !contains_token(source, t)) return true;
  }
  return false;
}

double hallucination_rate(std::span<const TracedExample> inputs, std::span<const TokenSeq> outputs,
                          std::span<const TokenId> watched) {
  if (inputs.empty()) throw std::invalid_argument("hallucination rate over no inputs");
  if (inputs.size() != outputs.size()) throw std::invalid_argument("inputs and outputs differ in length");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (is_hallucination(inputs[i].source, outputs[i], watched)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(inputs.size());
}

double hallucination_rate(const Seq2Seq& model, std::span<const double> params,
                          std::span<const TracedExample> inputs, std::span<const EntityPair> pairs,
                          const Vocab& vocab, std::size_t max_len, std::size_t threads) {
  const auto outputs = decode_all(model, params, inputs, max_len, threads);
  return hallucination_rate(inputs, outputs, pair_entity_ids(pairs, vocab));
}

double mean_rouge_l(std::span<const TracedExample> inputs, std::span<const TokenSeq> outputs) {
  if (inputs.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) s += rouge_l(outputs[i], inputs[i].target);
  return s / static_cast<double>(inputs.size());
}

std::vector<PairMemorization> memorization(std::span<const TracedExample> inputs, std::span<const TokenSeq> outputs,
                                           std::span<const EntityPair> pairs, const Vocab& vocab) {
  std::vector<PairMemorization> result;
  for (const auto& p : pairs) {
    const auto ids = resolve(p, vocab);
    PairMemorization m;
    m.tag = p.tag;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      const auto& src = inputs[i].source;
      if (!contains_token(src, ids.original) || contains_token(src, ids.perturbed)) continue;
      if (!contains_token(inputs[i].target, ids.original)) continue;
      ++m.eligible;
      if (contains_token(outputs[i], ids.perturbed)) ++m.hallucinated;
    }
    m.rate = m.eligible ? static_cast<double>(m.hallucinated) / static_cast<double>(m.eligible) : 0.0;
    result.push_back(m);
  }
  return result;
}

QualityMetrics measure_quality(const Seq2Seq& model, std::span<const double> params, const Corpus& corpus,
                               std::size_t max_len, std::size_t threads) {
  const auto outputs = decode_all(model, params, corpus.val, max_len, threads);
  return {hallucination_rate(corpus.val, outputs, pair_entity_ids(corpus.pairs, corpus.vocab)),
          mean_rouge_l(corpus.val, outputs)};
}

std::vector<double> warm_start(const Seq2Seq& model, std::span<const TracedExample> pretrain,
                               const TrainConfig& config) {
  auto params = model.init_params(derive_seed(config.seed, 1));
  if (config.pretrain_epochs == 0) return params;
  if (pretrain.empty()) throw config_error("pretraining requested without a pretraining split");
  TrainConfig pc = config;
  pc.epochs = config.pretrain_epochs;
  pc.seed = derive_seed(config.seed, 3);
  auto checkpoints = train(model, params, pretrain, pc);
  return std::move(checkpoints.back().params);
}

std::vector<double> train_from_scratch(const Seq2Seq& model, std::span<const TracedExample> pretrain,
                                       std::span<const TracedExample> examples, const TrainConfig& config) {
  const auto init = warm_start(model, pretrain, config);
  auto checkpoints = train(model, init, examples, config);
  return std::move(checkpoints.back().params);
}

std::vector<std::int64_t> top_ids(const ScoreTable& scores, std::size_t budget) {
  if (budget > scores.size()) throw config_error("removal budget exceeds training size");
  const auto order = rank_descending(scores);
  std::vector<std::int64_t> ids;
  for (std::size_t i = 0; i < budget; ++i) ids.push_back(scores.ids[order[i]]);
  std::sort(ids.begin(), ids.end());
  return ids;
}

namespace {

RetrainReport retrain_without(const Corpus& corpus, const std::vector<std::int64_t>& removed_ids,
                              const TrainConfig& config, const QualityMetrics& baseline, std::size_t threads) {
  std::vector<TracedExample> kept;
  RetrainReport r;
  for (const auto& ex : corpus.train) {
    if (std::binary_search(removed_ids.begin(), removed_ids.end(), ex.id)) {
      ++r.removed;
      if (ex.canary_tag) ++r.canaries_removed;
    } else {
      kept.push_back(ex);
    }
  }
  if (kept.empty()) throw config_error("removal leaves no training data");
  const Seq2Seq model({corpus.vocab.size(), config.dim});
  const auto params = train_from_scratch(model, corpus.pretrain, kept, config);
  const auto q = measure_quality(model, params, corpus, config.max_decode_len, threads);
  r.halluc_rate_before = baseline.halluc_rate;
  r.rouge_l_before = baseline.rouge_l;
  r.halluc_rate_after = q.halluc_rate;
  r.rouge_l = q.rouge_l;
  return r;
}

}  // namespace

RetrainReport remove_and_retrain(const Corpus& corpus, const ScoreTable& scores, std::size_t budget,
                                 const TrainConfig& config, const QualityMetrics& baseline, double oracle_rate,
                                 std::size_t threads) {
  if (budget >= corpus.train.size()) throw config_error("removal budget must be below the training size");
  auto r = retrain_without(corpus, top_ids(scores, budget), config, baseline, threads);
  r.method = scores.method;
  r.oracle_rate = oracle_rate;
  return r;
}

RetrainReport oracle_removal(const Corpus& corpus, const TrainConfig& config, const QualityMetrics& baseline,
                             std::size_t threads) {
  std::vector<std::int64_t> flagged;
  for (const auto& ex : corpus.train) {
    if (ex.canary_tag) flagged.push_back(ex.id);
  }
  auto r = retrain_without(corpus, flagged, config, baseline, threads);
  r.method = "oracle";
  r.oracle_rate = r.halluc_rate_after;
  return r;
}

ScoreTable combine_by_rank(std::span<const ScoreTable> tables) {
  if (tables.empty()) throw std::invalid_argument("nothing to combine");
  ScoreTable out;
  out.method = tables.front().method;
  out.ids = tables.front().ids;
  out.scores.assign(out.ids.size(), 0.0);
  const double n = static_cast<double>(out.ids.size());
  for (const auto& t : tables) {
    if (t.ids != out.ids) throw std::invalid_argument("score tables cover different examples");
    const auto order = rank_descending(t);
    for (std::size_t r = 0; r < order.size(); ++r) {
      out.scores[order[r]] = std::max(out.scores[order[r]], 1.0 - static_cast<double>(r) / n);
    }
  }
  return out;
}

const std::vector<std::string>& sweep_axes() {
  static const std::vector<std::string> axes{"num_examples", "steps", "lr", "checkpoint"};
  return axes;
}

SweepResult run_sweep(const std::string& axis, std::span<const double> grid, const SweepInputs& in) {
  if (std::find(sweep_axes().begin(), sweep_axes().end(), axis) == sweep_axes().end()) {
    throw config_error("unknown sweep axis '" + axis + "'");
  }
  if (grid.empty()) throw config_error("sweep grid for '" + axis + "' is empty");
  if (!in.model || !in.vocab) throw std::invalid_argument("sweep inputs incomplete");

  auto as_count = [&](double v) {
    if (!(v >= 0.0) || v != std::floor(v)) throw config_error("sweep value for '" + axis + "' must be a whole number");
    return static_cast<std::size_t>(v);
  };

  SweepResult result;
  result.axis = axis;
  for (double value : grid) {
    EstimatorConfig cfg = in.estimator;
    std::size_t n_errors = in.num_errors;
    if (axis == "num_examples") n_errors = as_count(value);
    if (axis == "steps") cfg.steps = as_count(value);
    if (axis == "lr") cfg.lr = value;
    if (axis == "checkpoint") cfg.checkpoint = as_count(value);
    validate(cfg);
    if (cfg.checkpoint < 1 || cfg.checkpoint > in.checkpoints.size()) {
      throw config_error("checkpoint " + std::to_string(cfg.checkpoint) + " was not saved");
    }
    const auto& start = in.checkpoints[cfg.checkpoint - 1].params;

    SweepPoint point;
    point.value = value;
    for (const auto& pair : in.pairs) {
      std::vector<ErrorCase> errors;
      try {
        errors = select_error_set(in.generations, pair, *in.vocab, n_errors, in.error_seed);
      } catch (const PipelineError& e) {
        if (e.kind() != "insufficient-errors") throw;
        point.skipped.push_back(pair.tag);
        continue;
      }
      const auto table = score_cea_grad(*in.model, start, errors, in.train, cfg.steps, cfg.lr, cfg.threads);
      const auto labels = canary_labels(in.train, pair.tag);
      point.pairs.push_back({pair.tag, au_pr(table.scores, labels), au_roc(table.scores, labels)});
    }
    if (!point.pairs.empty()) {
      for (const auto& p : point.pairs) {
        point.mean_au_pr += p.au_pr;
        point.mean_au_roc += p.au_roc;
      }
      point.mean_au_pr /= static_cast<double>(point.pairs.size());
      point.mean_au_roc /= static_cast<double>(point.pairs.size());
    }
    result.points.push_back(std::move(point));
  }
  return result;
}

}  // namespace errtrace

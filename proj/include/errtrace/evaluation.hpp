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

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "errtrace/corpus.hpp"
#include "errtrace/metrics.hpp"
#include "errtrace/score_table.hpp"
#include "errtrace/seq2seq.hpp"
#include "errtrace/tracing.hpp"
#include "errtrace/trainer.hpp"

namespace errtrace {

std::vector<TokenSeq> decode_all(const Seq2Seq& model, std::span<const double> params,
                                 std::span<const TracedExample> inputs, std::size_t max_len, std::size_t threads = 1);

std::vector<Generation> as_generations(std::span<const TracedExample> inputs, std::span<const TokenSeq> outputs);

/// Both entities of every pair.
std::vector<TokenId> pair_entity_ids(std::span<const EntityPair> pairs, const Vocab& vocab);

/// True when the output has a watched entity that its source lacks.
bool is_hallucination(std::span<const TokenId> source, std::span<const TokenId> output,
                      std::span<const TokenId> watched);

double hallucination_rate(std::span<const TracedExample> inputs, std::span<const TokenSeq> outputs,
                          std::span<const TokenId> watched);

double hallucination_rate(const Seq2Seq& model, std::span<const double> params,
                          std::span<const TracedExample> inputs, std::span<const EntityPair> pairs,
                          const Vocab& vocab, std::size_t max_len, std::size_t threads = 1);

double mean_rouge_l(std::span<const TracedExample> inputs, std::span<const TokenSeq> outputs);

/// Per-pair memorization on held-out examples eligible for the swap: E_a in
/// source and reference target, E_b not in the source.
struct PairMemorization {
  std::string tag;
  std::size_t eligible = 0;
  std::size_t hallucinated = 0;  // outputs containing E_b
  double rate = 0.0;
};

std::vector<PairMemorization> memorization(std::span<const TracedExample> inputs, std::span<const TokenSeq> outputs,
                                           std::span<const EntityPair> pairs, const Vocab& vocab);

struct QualityMetrics {
  double halluc_rate = 0.0;
  double rouge_l = 0.0;
};

QualityMetrics measure_quality(const Seq2Seq& model, std::span<const double> params, const Corpus& corpus,
                               std::size_t max_len, std::size_t threads = 1);

/// Initial parameters from derive_seed(seed, 1), then pretrain_epochs of
/// training on `pretrain`.
std::vector<double> warm_start(const Seq2Seq& model, std::span<const TracedExample> pretrain,
                               const TrainConfig& config);

/// Warm start, then `config.epochs` on `examples`; the final parameters.
std::vector<double> train_from_scratch(const Seq2Seq& model, std::span<const TracedExample> pretrain,
                                       std::span<const TracedExample> examples, const TrainConfig& config);

struct RetrainReport {
  std::string method;
  std::size_t removed = 0;
  double halluc_rate_before = 0.0;
  double halluc_rate_after = 0.0;
  double rouge_l_before = 0.0;
  double rouge_l = 0.0;
  double oracle_rate = 0.0;
  std::size_t canaries_removed = 0;
};

/// Ids of the `budget` highest-scored rows, ties by ascending id.
std::vector<std::int64_t> top_ids(const ScoreTable& scores, std::size_t budget);

/// Drops the top `budget` examples, retrains from scratch with `config` and
/// measures on the validation split.
RetrainReport remove_and_retrain(const Corpus& corpus, const ScoreTable& scores, std::size_t budget,
                                 const TrainConfig& config, const QualityMetrics& baseline, double oracle_rate,
                                 std::size_t threads = 1);

/// Drops exactly the flagged canaries and retrains.
RetrainReport oracle_removal(const Corpus& corpus, const TrainConfig& config, const QualityMetrics& baseline,
                             std::size_t threads = 1);

/// One table over all pairs: each example's score is the best normalized
/// rank it reaches in any pair's table, 1 for the top row.
ScoreTable combine_by_rank(std::span<const ScoreTable> tables);

struct PairRanking {
  std::string tag;
  double au_pr = 0.0;
  double au_roc = 0.0;
};

struct SweepPoint {
  double value = 0.0;
  std::vector<PairRanking> pairs;
  std::vector<std::string> skipped;  // pairs without enough observed errors
  double mean_au_pr = 0.0;
  double mean_au_roc = 0.0;
};

struct SweepResult {
  std::string axis;
  std::vector<SweepPoint> points;
};

struct SweepInputs {
  const Seq2Seq* model = nullptr;
  std::span<const Checkpoint> checkpoints;
  std::span<const TracedExample> train;
  std::vector<EntityPair> pairs;
  std::vector<Generation> generations;
  const Vocab* vocab = nullptr;
  EstimatorConfig estimator;
  std::size_t num_errors = 5;
  std::uint64_t error_seed = 0;
};

const std::vector<std::string>& sweep_axes();

/// Raw gradient-contrast scores (no distillation) at every grid value of
/// one axis: num_examples, steps, lr or checkpoint.
SweepResult run_sweep(const std::string& axis, std::span<const double> grid, const SweepInputs& inputs);

}  // namespace errtrace

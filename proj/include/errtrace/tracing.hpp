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

#include <json.hpp>

#include "errtrace/corpus.hpp"
#include "errtrace/loss_model.hpp"
#include "errtrace/score_table.hpp"
#include "errtrace/seq2seq.hpp"
#include "errtrace/trainer.hpp"

namespace errtrace {

struct EstimatorConfig {
  std::size_t checkpoint = 1;                   // t0: start of the two fine-tunes
  std::size_t steps = 3;                        // T
  double lr = 5e-6;                             // fine-tune learning rate
  std::vector<std::size_t> tracin_checkpoints;  // empty = every saved epoch
  std::string subset = "output+embed";          // TracIn gradient slice
  double bm25_k1 = 1.2;
  double bm25_b = 0.75;
  std::size_t threads = 1;
};

void validate(const EstimatorConfig& config);

/// Fingerprint of the fields that affect `method`'s scores (not threads).
std::string fingerprint(const EstimatorConfig& config, const std::string& method);

/// The method names an estimator table may carry.
const std::vector<std::string>& known_methods();
bool is_known_method(const std::string& method);

ScoreTable score_random(std::span<const TracedExample> train, std::uint64_t seed);

/// Okapi BM25. Document = source ++ target of a training example, query =
/// distinct tokens of input ++ erroneous output of an error case.
///   idf(t)  = ln(1 + (N - df + 0.5) / (df + 0.5))
///   w(t, d) = idf(t) * tf (k1 + 1) / (tf + k1 (1 - b + b |d| / avgdl))
/// The table holds the mean over error cases of the per-case sums.
ScoreTable score_bm25(std::span<const ErrorCase> errors, std::span<const TracedExample> train,
                      double k1, double b, std::size_t threads = 1);

/// Mean cosine between encode_repr(x, y_hat) of each error case and
/// encode_repr(source, target) of the training example.
ScoreTable score_embed(const Seq2Seq& model, std::span<const double> params, std::span<const ErrorCase> errors,
                       std::span<const TracedExample> train, std::size_t threads = 1);

/// sum_t eta_t <g_t(train), mean_e g_t(x_e, y_hat_e)> over the subset.
ScoreTable score_tracin(const LossModel& model, std::span<const Checkpoint> checkpoints,
                        std::span<const ErrorCase> errors, std::span<const TracedExample> train,
                        const ParamSubset& subset, std::size_t threads = 1);

/// sum_t eta_t <g_t(train), mean_e g_t(x_e, y_hat_e) - mean_e g_t(x_e, y_e)>.
ScoreTable score_tracin_contrast(const LossModel& model, std::span<const Checkpoint> checkpoints,
                                 std::span<const ErrorCase> errors, std::span<const TracedExample> train,
                                 const ParamSubset& subset, std::size_t threads = 1);

/// Loss of each training example under theta_T^y minus under theta_T^yhat,
/// where theta_T^y and theta_T^yhat are `steps` full-batch SGD steps from
/// `start` on the corrected and erroneous error outputs respectively.
ScoreTable score_cea_grad(const LossModel& model, std::span<const double> start,
                          std::span<const ErrorCase> errors, std::span<const TracedExample> train,
                          std::size_t steps, double lr, std::size_t threads = 1);

/// Loss decrease under fine-tuning toward the erroneous outputs only:
/// l(theta_start) - l(theta_T^yhat).
ScoreTable score_grad_noncontrast(const LossModel& model, std::span<const double> start,
                                  std::span<const ErrorCase> errors, std::span<const TracedExample> train,
                                  std::size_t steps, double lr, std::size_t threads = 1);

std::vector<SeqPair> erroneous_pairs(std::span<const ErrorCase> errors);
std::vector<SeqPair> corrected_pairs(std::span<const ErrorCase> errors);

}  // namespace errtrace

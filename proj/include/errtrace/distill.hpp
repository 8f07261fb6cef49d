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
#include "errtrace/score_table.hpp"

namespace errtrace {

inline constexpr std::size_t kDefaultHashDim = std::size_t{1} << 18;

/// Sparse binary features, ascending index, no duplicates. Each target token
/// is tagged "t:" when it also occurs in the source and "n:" when it does
/// not; the source contributes only through these tags. Unigrams and
/// adjacent bigrams of the tagged sequence are hashed with FNV-1a 64 modulo
/// hash_dim. The bias feature sits at index hash_dim.
struct FeatureVector {
  std::vector<std::uint32_t> indices;
};

FeatureVector featurize(std::span<const TokenId> source, std::span<const TokenId> target, const Vocab& vocab,
                        std::size_t hash_dim = kDefaultHashDim);

struct DistillSet {
  std::vector<std::int64_t> positives;  // top-K ids, best first
  std::vector<std::int64_t> negatives;  // bottom-K ids, lowest first
  std::size_t k = 0;
};

/// Top-K / bottom-K split of a ranking; ties broken by ascending id.
DistillSet build_distill_set(const ScoreTable& scores, std::size_t k);

/// n / 160 clamped to [1, 500]. Sized to the smaller injected pairs.
std::size_t default_distill_k(std::size_t n);

struct ClassifierConfig {
  double lr = 0.1;
  std::size_t epochs = 5;
  std::size_t patience = 1;
  double holdout_fraction = 0.0;  // 0: no early stopping, all epochs run
  std::uint64_t seed = 1;
  std::size_t hash_dim = kDefaultHashDim;
};

struct ClassifierParams {
  std::size_t hash_dim = kDefaultHashDim;
  std::vector<double> weights;  // hash_dim + 1 entries, bias last
  std::size_t epochs_run = 0;
  double train_accuracy = 0.0;
  double heldout_loss = 0.0;
};

/// Logistic regression by per-example SGD, early-stopped on the log loss of
/// a held-out slice of the distill set; the best epoch's weights are kept.
ClassifierParams train_classifier(const DistillSet& set, std::span<const TracedExample> train, const Vocab& vocab,
                                  const ClassifierConfig& config);

double linear_response(const ClassifierParams& params, const FeatureVector& x);

/// sigmoid(linear response) for every training example; method "cea".
ScoreTable score_classifier(const ClassifierParams& params, std::span<const TracedExample> train,
                            const Vocab& vocab, std::size_t threads = 1);

nlohmann::json to_json(const ClassifierParams& params);
ClassifierParams classifier_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DistillSet& set);

}  // namespace errtrace

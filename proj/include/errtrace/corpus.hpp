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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "errtrace/vocab.hpp"

namespace errtrace {

/// A canary entity swap: `original` (E_a) is rewritten to `perturbed` (E_b)
/// in selected training targets.
struct EntityPair {
  std::string original;
  std::string perturbed;
  std::string tag;
};

struct TracedExample {
  std::int64_t id = 0;
  TokenSeq source;
  TokenSeq target;
  std::optional<std::string> canary_tag;  // set iff the target was perturbed
};

struct Corpus {
  std::vector<TracedExample> train;
  std::vector<TracedExample> val;
  std::vector<TracedExample> pretrain;  // clean warm-start data, never injected
  Vocab vocab;
  std::vector<std::string> entities;
  std::vector<EntityPair> pairs;     // pairs injected so far, in injection order
  std::uint64_t seed = 0;
};

struct CanarySpec {
  EntityPair pair;
  double probability = 0.5;
  std::optional<std::size_t> max_insertions;
};

/// An observed error with its minimal correction: input x, erroneous output
/// y_hat and corrected output y.
struct ErrorCase {
  TokenSeq input;
  TokenSeq erroneous;
  TokenSeq corrected;
  std::string pair_tag;
};

struct EntitySpec {
  std::string token;
  double weight = 1.0;
};

/// Explicit template. "<ent>" marks the example's entity slot; "@name" pins
/// a specific entity, which must be listed in CorpusConfig::entities.
struct TemplateSpec {
  std::vector<std::string> source;
  std::vector<std::string> target;
};

struct CorpusConfig {
  std::size_t train_size = 5000;
  std::size_t val_size = 2000;
  std::size_t pretrain_size = 0;
  std::vector<EntitySpec> entities;
  std::size_t num_templates = 12;      // procedural templates, when `templates` is empty
  std::size_t variants_per_template = 0;  // interchangeable words copied from source to target
  std::size_t distractor_words = 160;
  std::size_t copied_words = 0;            // random source filler words appended to each target
  std::size_t max_secondary_entities = 0;  // extra entities in the source filler, 0..max per example
  std::size_t min_source_len = 12;
  std::size_t max_source_len = 40;
  std::size_t min_target_len = 4;
  std::size_t max_target_len = 12;
  std::vector<TemplateSpec> templates;
};

/// Builds a clean corpus. Every target mentions exactly the entity of its
/// source, so a faithful model can learn to copy it.
Corpus generate_base_corpus(const CorpusConfig& config, std::uint64_t seed);

struct InjectionCount {
  std::string tag;
  std::size_t eligible = 0;
  std::size_t inserted = 0;
  double fraction = 0.0;  // inserted / train size
};

struct InjectionResult {
  Corpus corpus;
  std::vector<InjectionCount> counts;
  std::vector<std::string> warnings;
};

/// Rewrites E_a -> E_b in the targets of a Bernoulli(p) subset of eligible
/// training examples. Eligible: E_a in source and target, E_b not in source,
/// not already flagged. One uniform draw per eligible example per spec, from
/// the stream Rng(derive_seed(seed, kInjectionStream)), specs in order and
/// examples in ascending id. A pair whose tag is already in corpus.pairs is
/// skipped, so re-injection flags nothing new.
InjectionResult inject_canaries(const Corpus& corpus, std::span<const CanarySpec> specs,
                                std::uint64_t seed);

inline constexpr std::uint64_t kInjectionStream = 0x1a7;

/// Resolved token ids for a pair.
struct PairIds {
  TokenId original = 0;
  TokenId perturbed = 0;
};

PairIds resolve(const EntityPair& pair, const Vocab& vocab);

/// Replaces every occurrence of E_b with E_a. Throws std::invalid_argument
/// if E_b does not occur.
TokenSeq build_contrast(std::span<const TokenId> erroneous, PairIds pair);

/// The forward perturbation, E_a -> E_b everywhere.
TokenSeq apply_perturbation(std::span<const TokenId> target, PairIds pair);

struct Generation {
  TokenSeq input;
  TokenSeq output;
};

/// Samples n hallucinated generations (output has E_b, input has E_a and
/// lacks E_b)
/// uniformly without replacement. The sample for a larger n extends the
/// sample for a smaller one under the same seed. Throws PipelineError of
/// kind "insufficient-errors" when fewer than n candidates exist.
std::vector<ErrorCase> select_error_set(std::span<const Generation> generations,
                                        const EntityPair& pair, const Vocab& vocab,
                                        std::size_t n, std::uint64_t seed);

/// Canary flags of the train split for one pair tag.
std::vector<bool> canary_labels(std::span<const TracedExample> train, const std::string& tag);

}  // namespace errtrace

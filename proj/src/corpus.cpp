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

#include "errtrace/corpus.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "errtrace/error.hpp"
#include "errtrace/rng.hpp"

namespace errtrace {
namespace {

constexpr std::uint64_t kTemplateStream = 0x7e1;
constexpr std::uint64_t kTrainStream = 0x7a1;
constexpr std::uint64_t kValStream = 0x7a2;
constexpr std::uint64_t kPretrainStream = 0x7a3;
constexpr std::uint64_t kErrorSetStream = 0xe77;

constexpr std::string_view kEntSlot = "<ent>";
constexpr std::string_view kVarSlot = "<var>";

struct Template {
  std::vector<std::string> event;
  std::vector<std::string> summary;
  std::vector<std::string> variants;
};

// Pronounceable filler words, unique against everything already taken.
class WordMaker {
 public:
  WordMaker(Rng& rng, std::unordered_set<std::string>& taken) : rng_(rng), taken_(taken) {}

  std::string next() {
    static constexpr std::string_view kCons = "bdfgklmnprstvz";
    static constexpr std::string_view kVow = "aeiou";
    for (;;) {
      const auto syllables = 2 + rng_.below(2);
      std::string w;
      for (std::uint64_t s = 0; s < syllables; ++s) {
        w += kCons[rng_.below(kCons.size())];
        w += kVow[rng_.below(kVow.size())];
      }
      if (taken_.insert(w).second) return w;
    }
  }

 private:
  Rng& rng_;
  std::unordered_set<std::string>& taken_;
};

Template make_template(WordMaker& words, Rng& rng, std::size_t n_variants) {
  Template t;
  const auto n_event = 4 + rng.below(4);
  std::vector<std::string> event_words;
  for (std::uint64_t i = 0; i < n_event; ++i) event_words.push_back(words.next());
  for (std::size_t i = 0; i < n_variants; ++i) t.variants.push_back(words.next());

  t.event = event_words;
  const auto var_pos = 1 + rng.below(n_event);
  if (n_variants > 0) t.event.insert(t.event.begin() + static_cast<std::ptrdiff_t>(var_pos), std::string(kVarSlot));
  const auto ent_pos = rng.below(3);
  t.event.insert(t.event.begin() + static_cast<std::ptrdiff_t>(ent_pos), std::string(kEntSlot));

  // Summary: optional lead word, entity, variant, then an ordered subset of
  // the event words.
  if (rng.bernoulli(0.5)) t.summary.push_back(words.next());
  t.summary.emplace_back(kEntSlot);
  if (n_variants > 0) t.summary.emplace_back(kVarSlot);
  const auto keep = 2 + rng.below(2) + (n_variants == 0 ? 1 : 0);
  std::vector<std::size_t> idx(event_words.size());
  std::iota(idx.begin(), idx.end(), 0);
  rng.shuffle(std::span<std::size_t>(idx));
  idx.resize(keep);
  std::sort(idx.begin(), idx.end());
  for (auto i : idx) t.summary.push_back(event_words[i]);
  return t;
}

Template from_spec(const TemplateSpec& spec, const std::set<std::string>& entities) {
  auto check = [&](const std::vector<std::string>& side, const char* what) {
    if (std::count(side.begin(), side.end(), kEntSlot) != 1) {
      throw config_error(std::string("template ") + what + " must contain exactly one <ent> slot");
    }
    for (const auto& tok : side) {
      if (!tok.empty() && tok[0] == '@' && !entities.count(tok.substr(1))) {
        throw config_error("template references entity absent from the vocabulary: " + tok.substr(1));
      }
    }
  };
  check(spec.source, "source");
  check(spec.target, "target");
  Template t;
  for (const auto& tok : spec.source) t.event.push_back(tok[0] == '@' ? tok.substr(1) : tok);
  for (const auto& tok : spec.target) t.summary.push_back(tok[0] == '@' ? tok.substr(1) : tok);
  return t;
}

std::vector<std::string> fill(const std::vector<std::string>& pattern, const std::string& entity,
                              const std::string& variant) {
  std::vector<std::string> out;
  out.reserve(pattern.size());
  for (const auto& tok : pattern) {
    if (tok == kEntSlot) {
      out.push_back(entity);
    } else if (tok == kVarSlot) {
      out.push_back(variant);
    } else {
      out.push_back(tok);
    }
  }
  return out;
}

void validate(const CorpusConfig& c) {
  if (c.entities.empty()) throw config_error("entity list is empty");
  if (c.min_source_len < 1 || c.min_source_len > c.max_source_len) {
    throw config_error("invalid source length range");
  }
  if (c.min_target_len < 1 || c.min_target_len > c.max_target_len) {
    throw config_error("invalid target length range");
  }
  if (c.templates.empty() && c.num_templates < 1) throw config_error("num_templates must be >= 1");
  if (c.distractor_words < 1) throw config_error("distractor_words must be >= 1");
  std::set<std::string> seen;
  for (const auto& e : c.entities) {
    if (e.token.empty() || e.token[0] == '<' || e.token[0] == '@') {
      throw config_error("invalid entity token: " + e.token);
    }
    if (!(e.weight > 0.0)) throw config_error("entity weight must be positive: " + e.token);
    if (!seen.insert(e.token).second) throw config_error("duplicate entity: " + e.token);
  }
}

std::vector<TracedExample> generate_split(const CorpusConfig& config,
                                          const std::vector<Template>& templates,
                                          const std::vector<std::string>& distractors,
                                          Vocab& vocab, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> weights;
  for (const auto& e : config.entities) weights.push_back(e.weight);

  std::vector<TracedExample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& tpl = templates[rng.below(templates.size())];
    const auto entity_index = rng.weighted(weights);
    const auto& entity = config.entities[entity_index].token;
    const std::string variant =
        tpl.variants.empty() ? std::string() : tpl.variants[rng.below(tpl.variants.size())];
    auto event = fill(tpl.event, entity, variant);
    auto target = fill(tpl.summary, entity, variant);
    if (event.size() > config.max_source_len) throw config_error("template longer than max_source_len");
    if (target.size() < config.min_target_len || target.size() > config.max_target_len) {
      throw config_error("template target length outside the configured range");
    }

    const std::size_t lo = config.min_source_len > event.size() ? config.min_source_len - event.size() : 0;
    const std::size_t hi = config.max_source_len - event.size();
    const std::size_t n_distract = lo + rng.below(hi - lo + 1);
    std::vector<std::string> source;
    source.reserve(event.size() + n_distract);
    for (std::size_t k = 0; k < n_distract; ++k) source.push_back(distractors[rng.below(distractors.size())]);
    // Other entities mentioned in passing, never in the template's summary.
    if (config.max_secondary_entities > 0 && n_distract > 0) {
      const auto n_secondary = rng.below(config.max_secondary_entities + 1);
      std::vector<double> w = weights;
      w[entity_index] = 0.0;
      for (std::size_t k = 0; k < n_secondary && std::any_of(w.begin(), w.end(), [](double x) { return x > 0.0; }); ++k) {
        const auto pick = rng.weighted(w);
        w[pick] = 0.0;
        source[rng.below(n_distract)] = config.entities[pick].token;
      }
    }
    const auto at = rng.below(n_distract + 1);
    source.insert(source.begin() + static_cast<std::ptrdiff_t>(at), event.begin(), event.end());

    // A few filler words picked at random also make it into the target, in
    // source order. Which ones is not inferable from the source.
    std::vector<std::size_t> filler;
    for (std::size_t k = 0; k < source.size(); ++k) {
      if (k < at || k >= at + event.size()) filler.push_back(k);
    }
    const std::size_t n_copy = std::min(config.copied_words, filler.size());
    for (std::size_t k = 0; k < n_copy; ++k) std::swap(filler[k], filler[k + rng.below(filler.size() - k)]);
    std::sort(filler.begin(), filler.begin() + static_cast<std::ptrdiff_t>(n_copy));
    for (std::size_t k = 0; k < n_copy; ++k) target.push_back(source[filler[k]]);
    if (target.size() > config.max_target_len) throw config_error("copied words push the target past max_target_len");

    TracedExample ex;
    ex.id = static_cast<std::int64_t>(i);
    for (const auto& w : source) ex.source.push_back(vocab.add(w));
    for (const auto& w : target) ex.target.push_back(vocab.add(w));
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace

Corpus generate_base_corpus(const CorpusConfig& config, std::uint64_t seed) {
  validate(config);

  std::set<std::string> entity_set;
  std::unordered_set<std::string> taken;
  for (auto s : Vocab::kSpecials) taken.emplace(s);
  for (const auto& e : config.entities) {
    entity_set.insert(e.token);
    taken.insert(e.token);
  }

  Rng tpl_rng(derive_seed(seed, kTemplateStream));
  WordMaker words(tpl_rng, taken);
  std::vector<Template> templates;
  if (!config.templates.empty()) {
    for (const auto& spec : config.templates) templates.push_back(from_spec(spec, entity_set));
  } else {
    for (std::size_t t = 0; t < config.num_templates; ++t) templates.push_back(make_template(words, tpl_rng, config.variants_per_template));
  }
  std::vector<std::string> distractors;
  for (std::size_t i = 0; i < config.distractor_words; ++i) distractors.push_back(words.next());

  // Entities first so their ids do not depend on which templates fire.
  Corpus corpus;
  corpus.seed = seed;
  for (const auto& e : config.entities) {
    corpus.vocab.add(e.token);
    corpus.entities.push_back(e.token);
  }
  for (const auto& t : templates) {
    for (const auto& w : t.event) {
      if (w != kEntSlot && w != kVarSlot) corpus.vocab.add(w);
    }
    for (const auto& w : t.summary) {
      if (w != kEntSlot && w != kVarSlot) corpus.vocab.add(w);
    }
    for (const auto& w : t.variants) corpus.vocab.add(w);
  }
  for (const auto& w : distractors) corpus.vocab.add(w);

  corpus.train = generate_split(config, templates, distractors, corpus.vocab, config.train_size,
                                derive_seed(seed, kTrainStream));
  corpus.val = generate_split(config, templates, distractors, corpus.vocab, config.val_size,
                              derive_seed(seed, kValStream));
  corpus.pretrain = generate_split(config, templates, distractors, corpus.vocab, config.pretrain_size,
                                   derive_seed(seed, kPretrainStream));
  return corpus;
}

PairIds resolve(const EntityPair& pair, const Vocab& vocab) {
  if (!vocab.contains(pair.original) || !vocab.contains(pair.perturbed)) {
    throw config_error("canary pair " + pair.tag + " references a token outside the vocabulary");
  }
  return {vocab.id(pair.original), vocab.id(pair.perturbed)};
}

InjectionResult inject_canaries(const Corpus& corpus, std::span<const CanarySpec> specs,
                                std::uint64_t seed) {
  InjectionResult result{corpus, {}, {}};
  Corpus& out = result.corpus;

  std::set<std::string> tags;
  for (const auto& spec : specs) {
    if (spec.pair.original == spec.pair.perturbed) {
      throw config_error("canary pair " + spec.pair.tag + " maps an entity to itself");
    }
    if (!(spec.probability >= 0.0 && spec.probability <= 1.0)) {
      throw config_error("canary probability must lie in [0, 1] for pair " + spec.pair.tag);
    }
    if (!tags.insert(spec.pair.tag).second) throw config_error("duplicate canary tag " + spec.pair.tag);
    resolve(spec.pair, out.vocab);
  }

  Rng rng(derive_seed(seed, kInjectionStream));
  for (const auto& spec : specs) {
    InjectionCount count{spec.pair.tag, 0, 0, 0.0};
    const bool already = std::any_of(out.pairs.begin(), out.pairs.end(),
                                     [&](const EntityPair& p) { return p.tag == spec.pair.tag; });
    if (already) {
      result.warnings.push_back("pair " + spec.pair.tag + " already injected; skipped");
      result.counts.push_back(count);
      continue;
    }
    const PairIds ids = resolve(spec.pair, out.vocab);
    for (auto& ex : out.train) {
      if (ex.canary_tag) continue;
      if (!contains_token(ex.source, ids.original) || !contains_token(ex.target, ids.original) ||
          contains_token(ex.source, ids.perturbed)) {
        continue;
      }
      ++count.eligible;
      const bool draw = rng.bernoulli(spec.probability);
      const bool capped = spec.max_insertions && count.inserted >= *spec.max_insertions;
      if (draw && !capped) {
        ex.target = apply_perturbation(ex.target, ids);
        ex.canary_tag = spec.pair.tag;
        ++count.inserted;
      }
    }
    if (count.eligible == 0) result.warnings.push_back("pair " + spec.pair.tag + " has no eligible examples");
    count.fraction = out.train.empty() ? 0.0 : static_cast<double>(count.inserted) / static_cast<double>(out.train.size());
    out.pairs.push_back(spec.pair);
    result.counts.push_back(count);
  }
  return result;
}

TokenSeq apply_perturbation(std::span<const TokenId> target, PairIds pair) {
  TokenSeq out(target.begin(), target.end());
  std::replace(out.begin(), out.end(), pair.original, pair.perturbed);
  return out;
}

TokenSeq build_contrast(std::span<const TokenId> erroneous, PairIds pair) {
  if (!contains_token(erroneous, pair.perturbed)) {
    throw std::invalid_argument("build_contrast: output does not contain the perturbed entity");
  }
  TokenSeq out(erroneous.begin(), erroneous.end());
  std::replace(out.begin(), out.end(), pair.perturbed, pair.original);
  return out;
}

std::vector<ErrorCase> select_error_set(std::span<const Generation> generations,
                                        const EntityPair& pair, const Vocab& vocab,
                                        std::size_t n, std::uint64_t seed) {
  const PairIds ids = resolve(pair, vocab);
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < generations.size(); ++i) {
    if (contains_token(generations[i].output, ids.perturbed) &&
        !contains_token(generations[i].input, ids.perturbed) && contains_token(generations[i].input, ids.original)) {
      candidates.push_back(i);
    }
  }
  if (candidates.size() < n) {
    throw PipelineError("insufficient-errors",
                        "pair " + pair.tag + ": only " + std::to_string(candidates.size()) +
                            " hallucinated generations, need " + std::to_string(n) +
                            " (the model did not memorize the canary; train longer or raise the insertion rate)");
  }
  Rng rng(derive_seed(seed, kErrorSetStream));
  rng.shuffle(std::span<std::size_t>(candidates));

  std::vector<ErrorCase> cases;
  cases.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& g = generations[candidates[k]];
    cases.push_back({g.input, g.output, build_contrast(g.output, ids), pair.tag});
  }
  return cases;
}

std::vector<bool> canary_labels(std::span<const TracedExample> train, const std::string& tag) {
  std::vector<bool> labels;
  labels.reserve(train.size());
  for (const auto& ex : train) labels.push_back(ex.canary_tag && *ex.canary_tag == tag);
  return labels;
}

}  // namespace errtrace

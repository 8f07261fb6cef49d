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

#include "errtrace/run_config.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "errtrace/error.hpp"
#include "errtrace/evaluation.hpp"
#include "errtrace/hash.hpp"

namespace errtrace {
namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw config_error("section '" + section + "' must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      throw config_error("unknown key '" + key + "' in section '" + section + "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw config_error(std::string("bad value for '") + key + "': " + e.what());
  }
}

json corpus_json(const RunConfig& c) {
  json entities = json::array();
  for (const auto& e : c.corpus.entities) entities.push_back({{"token", e.token}, {"weight", e.weight}});
  json canaries = json::array();
  for (const auto& s : c.canaries) {
    json o{{"original", s.pair.original},
           {"perturbed", s.pair.perturbed},
           {"tag", s.pair.tag},
           {"probability", s.probability}};
    if (s.max_insertions) o["max_insertions"] = *s.max_insertions;
    canaries.push_back(o);
  }
  json templates = json::array();
  for (const auto& t : c.corpus.templates) templates.push_back({{"source", t.source}, {"target", t.target}});
  return {{"train_size", c.corpus.train_size},
          {"val_size", c.corpus.val_size},
          {"pretrain_size", c.corpus.pretrain_size},
          {"entities", entities},
          {"canaries", canaries},
          {"num_templates", c.corpus.num_templates},
          {"variants_per_template", c.corpus.variants_per_template},
          {"distractor_words", c.corpus.distractor_words},
          {"copied_words", c.corpus.copied_words},
          {"max_secondary_entities", c.corpus.max_secondary_entities},
          {"min_source_len", c.corpus.min_source_len},
          {"max_source_len", c.corpus.max_source_len},
          {"min_target_len", c.corpus.min_target_len},
          {"max_target_len", c.corpus.max_target_len},
          {"templates", templates}};
}

void read_corpus(const json& j, RunConfig& c) {
  check_keys(j, "corpus",
             {"train_size", "val_size", "pretrain_size", "entities", "canaries", "num_templates", "variants_per_template",
              "distractor_words", "copied_words", "max_secondary_entities", "min_source_len", "max_source_len", "min_target_len", "max_target_len",
              "templates"});
  auto& cc = c.corpus;
  read(j, "train_size", cc.train_size);
  read(j, "val_size", cc.val_size);
  read(j, "pretrain_size", cc.pretrain_size);
  read(j, "num_templates", cc.num_templates);
  read(j, "variants_per_template", cc.variants_per_template);
  read(j, "distractor_words", cc.distractor_words);
  read(j, "copied_words", cc.copied_words);
  read(j, "max_secondary_entities", cc.max_secondary_entities);
  read(j, "min_source_len", cc.min_source_len);
  read(j, "max_source_len", cc.max_source_len);
  read(j, "min_target_len", cc.min_target_len);
  read(j, "max_target_len", cc.max_target_len);
  if (j.contains("entities")) {
    cc.entities.clear();
    for (const auto& e : j.at("entities")) {
      if (e.is_string()) {
        cc.entities.push_back({e.get<std::string>(), 1.0});
        continue;
      }
      check_keys(e, "corpus.entities[]", {"token", "weight"});
      EntitySpec spec;
      read(e, "token", spec.token);
      read(e, "weight", spec.weight);
      cc.entities.push_back(spec);
    }
  }
  if (j.contains("canaries")) {
    c.canaries.clear();
    for (const auto& e : j.at("canaries")) {
      check_keys(e, "corpus.canaries[]", {"original", "perturbed", "tag", "probability", "max_insertions"});
      CanarySpec spec;
      read(e, "original", spec.pair.original);
      read(e, "perturbed", spec.pair.perturbed);
      read(e, "tag", spec.pair.tag);
      read(e, "probability", spec.probability);
      if (e.contains("max_insertions")) spec.max_insertions = e.at("max_insertions").get<std::size_t>();
      if (spec.pair.tag.empty()) spec.pair.tag = spec.pair.original + "-" + spec.pair.perturbed;
      c.canaries.push_back(spec);
    }
  }
  if (j.contains("templates")) {
    cc.templates.clear();
    for (const auto& t : j.at("templates")) {
      check_keys(t, "corpus.templates[]", {"source", "target"});
      TemplateSpec spec;
      read(t, "source", spec.source);
      read(t, "target", spec.target);
      cc.templates.push_back(spec);
    }
  }
}

json train_json(const TrainConfig& t) {
  return {{"learning_rate", t.learning_rate}, {"lr_decay", t.lr_decay},           {"batch_size", t.batch_size},
          {"epochs", t.epochs},               {"pretrain_epochs", t.pretrain_epochs},               {"gradient_clip", t.gradient_clip}, {"dim", t.dim},
          {"max_decode_len", t.max_decode_len}};
}

void read_train(const json& j, TrainConfig& t) {
  check_keys(j, "train",
             {"learning_rate", "lr_decay", "batch_size", "epochs", "pretrain_epochs", "gradient_clip", "dim", "max_decode_len"});
  read(j, "learning_rate", t.learning_rate);
  read(j, "lr_decay", t.lr_decay);
  read(j, "batch_size", t.batch_size);
  read(j, "epochs", t.epochs);
  read(j, "pretrain_epochs", t.pretrain_epochs);
  read(j, "gradient_clip", t.gradient_clip);
  read(j, "dim", t.dim);
  read(j, "max_decode_len", t.max_decode_len);
}

}  // namespace

RunConfig default_run_config() {
  RunConfig c;
  c.corpus.train_size = 5000;
  c.corpus.val_size = 5000;
  c.corpus.pretrain_size = 5000;
  c.corpus.num_templates = 40;
  c.corpus.copied_words = 4;
  c.train.batch_size = 4;
  c.train.pretrain_epochs = 3;
  c.train.lr_decay = 0.85;
  c.corpus.entities = {{"england", 2.3}, {"wales", 1.8},  {"australia", 1.2}, {"london", 1.0}};
  for (const char* e : {"china", "scotland", "france", "belfast", "spain", "italy", "germany", "brazil", "japan",
                        "india", "paris", "ireland"}) {
    c.corpus.entities.push_back({e, 93.7 / 12.0});
  }
  for (auto [a, b] : {std::pair{"england", "china"}, {"wales", "scotland"}, {"australia", "france"},
                      {"london", "belfast"}}) {
    c.canaries.push_back({{a, b, std::string(a) + "-" + b}, 0.5, std::nullopt});
  }
  c.eval.methods = known_methods();
  c.eval.budgets = {"2x"};
  c.eval.sweeps = {{"num_examples", {5, 10, 15, 20}},
                   {"steps", {3, 5, 10, 15, 20}},
                   {"lr", {1e-6, 5e-6, 1e-5, 5e-5, 1e-4}},
                   {"checkpoint", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}}};
  apply_seed(c, c.seed);
  return c;
}

void apply_seed(RunConfig& config, std::uint64_t seed) {
  config.seed = seed;
  config.train.seed = seed;
  config.distill.classifier.seed = seed;
}

RunConfig run_config_from_json(const json& j) {
  RunConfig c = default_run_config();
  check_keys(j, "config", {"seed", "corpus", "train", "trace", "distill", "eval"});
  read(j, "seed", c.seed);
  if (j.contains("corpus")) read_corpus(j.at("corpus"), c);
  if (j.contains("train")) read_train(j.at("train"), c.train);
  if (j.contains("trace")) {
    const auto& t = j.at("trace");
    check_keys(t, "trace",
               {"checkpoint", "steps", "lr", "num_errors", "tracin_checkpoints", "subset", "bm25_k1", "bm25_b"});
    read(t, "checkpoint", c.trace.checkpoint);
    read(t, "steps", c.trace.steps);
    read(t, "lr", c.trace.lr);
    read(t, "num_errors", c.num_errors);
    read(t, "tracin_checkpoints", c.trace.tracin_checkpoints);
    read(t, "subset", c.trace.subset);
    read(t, "bm25_k1", c.trace.bm25_k1);
    read(t, "bm25_b", c.trace.bm25_b);
  }
  if (j.contains("distill")) {
    const auto& d = j.at("distill");
    check_keys(d, "distill", {"k", "lr", "epochs", "patience", "holdout_fraction", "hash_dim"});
    read(d, "k", c.distill.k);
    read(d, "lr", c.distill.classifier.lr);
    read(d, "epochs", c.distill.classifier.epochs);
    read(d, "patience", c.distill.classifier.patience);
    read(d, "holdout_fraction", c.distill.classifier.holdout_fraction);
    read(d, "hash_dim", c.distill.classifier.hash_dim);
  }
  if (j.contains("eval")) {
    const auto& e = j.at("eval");
    check_keys(e, "eval", {"methods", "budgets", "sweeps"});
    read(e, "methods", c.eval.methods);
    read(e, "budgets", c.eval.budgets);
    if (e.contains("sweeps")) {
      for (const auto& [axis, grid] : e.at("sweeps").items()) {
        c.eval.sweeps[axis] = grid.get<std::vector<double>>();
      }
    }
  }
  apply_seed(c, c.seed);
  validate(c);
  return c;
}

json to_json(const RunConfig& c) {
  json sweeps = json::object();
  for (const auto& [axis, grid] : c.eval.sweeps) sweeps[axis] = grid;
  return {{"seed", c.seed},
          {"corpus", corpus_json(c)},
          {"train", train_json(c.train)},
          {"trace",
           {{"checkpoint", c.trace.checkpoint},
            {"steps", c.trace.steps},
            {"lr", c.trace.lr},
            {"num_errors", c.num_errors},
            {"tracin_checkpoints", c.trace.tracin_checkpoints},
            {"subset", c.trace.subset},
            {"bm25_k1", c.trace.bm25_k1},
            {"bm25_b", c.trace.bm25_b}}},
          {"distill",
           {{"k", c.distill.k},
            {"lr", c.distill.classifier.lr},
            {"epochs", c.distill.classifier.epochs},
            {"patience", c.distill.classifier.patience},
            {"holdout_fraction", c.distill.classifier.holdout_fraction},
            {"hash_dim", c.distill.classifier.hash_dim}}},
          {"eval", {{"methods", c.eval.methods}, {"budgets", c.eval.budgets}, {"sweeps", sweeps}}}};
}

void validate(const RunConfig& c) {
  if (c.corpus.train_size == 0) throw config_error("corpus.train_size must be positive");
  if (c.corpus.val_size == 0) throw config_error("corpus.val_size must be positive");
  if (c.corpus.entities.size() < 2) throw config_error("corpus needs at least two entities");
  std::set<std::string> tags;
  for (const auto& s : c.canaries) {
    if (!(s.probability >= 0.0 && s.probability <= 1.0)) {
      throw config_error("canary '" + s.pair.tag + "' probability must lie in [0, 1]");
    }
    if (s.pair.original == s.pair.perturbed) throw config_error("canary '" + s.pair.tag + "' swaps an entity with itself");
    for (const auto& name : {s.pair.original, s.pair.perturbed}) {
      const bool known = std::any_of(c.corpus.entities.begin(), c.corpus.entities.end(),
                                     [&](const EntitySpec& e) { return e.token == name; });
      if (!known) throw config_error("canary entity '" + name + "' is not in corpus.entities");
    }
    if (!tags.insert(s.pair.tag).second) throw config_error("duplicate canary tag '" + s.pair.tag + "'");
  }
  validate(c.train);
  if (c.train.pretrain_epochs > 0 && c.corpus.pretrain_size == 0) {
    throw config_error("train.pretrain_epochs needs corpus.pretrain_size > 0");
  }
  validate(c.trace);
  if (c.num_errors == 0) throw config_error("trace.num_errors must be positive");
  if (c.distill.classifier.epochs == 0) throw config_error("distill.epochs must be positive");
  if (!(c.distill.classifier.lr > 0.0)) throw config_error("distill.lr must be positive");
  if (!(c.distill.classifier.holdout_fraction >= 0.0 && c.distill.classifier.holdout_fraction < 1.0)) {
    throw config_error("distill.holdout_fraction must lie in [0, 1)");
  }
  if (c.distill.classifier.hash_dim == 0) throw config_error("distill.hash_dim must be positive");
  for (const auto& m : c.eval.methods) {
    if (!is_known_method(m)) throw config_error("unknown method '" + m + "'");
  }
  for (const auto& b : c.eval.budgets) parse_budget(b, 1);
  for (const auto& [axis, grid] : c.eval.sweeps) {
    if (std::find(sweep_axes().begin(), sweep_axes().end(), axis) == sweep_axes().end()) {
      throw config_error("unknown sweep axis '" + axis + "'");
    }
    if (grid.empty()) throw config_error("sweep grid for '" + axis + "' is empty");
  }
}

std::string config_hash(const RunConfig& config) { return hex64(fnv1a64(to_json(config).dump())); }

std::size_t parse_budget(const std::string& token, std::size_t canary_count) {
  if (token.empty()) throw config_error("empty budget");
  try {
    std::size_t used = 0;
    if (token.back() == 'x') {
      const double m = std::stod(token.substr(0, token.size() - 1), &used);
      if (used != token.size() - 1 || !(m >= 0.0)) throw config_error("bad budget '" + token + "'");
      return static_cast<std::size_t>(std::llround(m * static_cast<double>(canary_count)));
    }
    const long long n = std::stoll(token, &used);
    if (used != token.size() || n < 0) throw config_error("bad budget '" + token + "'");
    return static_cast<std::size_t>(n);
  } catch (const std::logic_error&) {
    throw config_error("bad budget '" + token + "'");
  }
}

}  // namespace errtrace

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

#include "errtrace/distill.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "errtrace/error.hpp"
#include "errtrace/hash.hpp"
#include "errtrace/loss_model.hpp"
#include "errtrace/parallel.hpp"
#include "errtrace/rng.hpp"

namespace errtrace {
namespace {

constexpr std::uint64_t kClassifierStream = 0xc1a;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double log_loss(double p, bool label) {
  constexpr double kEps = 1e-12;
  return label ? -std::log(std::max(p, kEps)) : -std::log(std::max(1.0 - p, kEps));
}

struct Labeled {
  FeatureVector x;
  bool y = false;
};

}  // namespace

FeatureVector featurize(std::span<const TokenId> source, std::span<const TokenId> target, const Vocab& vocab,
                        std::size_t hash_dim) {
  if (hash_dim == 0) throw std::invalid_argument("hash_dim must be positive");
  std::vector<std::string> tagged;
  tagged.reserve(target.size());
  for (TokenId t : target) {
    const bool copied = std::find(source.begin(), source.end(), t) != source.end();
    tagged.push_back((copied ? "t:" : "n:") + vocab.token(t));
  }

  FeatureVector f;
  for (std::size_t i = 0; i < tagged.size(); ++i) {
    f.indices.push_back(static_cast<std::uint32_t>(fnv1a64(tagged[i]) % hash_dim));
    if (i + 1 < tagged.size()) {
      f.indices.push_back(static_cast<std::uint32_t>(fnv1a64(tagged[i] + " " + tagged[i + 1]) % hash_dim));
    }
  }
  std::sort(f.indices.begin(), f.indices.end());
  f.indices.erase(std::unique(f.indices.begin(), f.indices.end()), f.indices.end());
  return f;
}

std::size_t default_distill_k(std::size_t n) { return std::clamp<std::size_t>(n / 160, 1, 500); }

DistillSet build_distill_set(const ScoreTable& scores, std::size_t k) {
  if (k == 0) throw std::invalid_argument("distill set size K must be positive");
  if (2 * k > scores.size()) {
    throw PipelineError("config", "distill set needs 2K <= training size (K=" + std::to_string(k) +
                                      ", n=" + std::to_string(scores.size()) + ")");
  }
  const auto order = rank_descending(scores);
  DistillSet set;
  set.k = k;
  for (std::size_t i = 0; i < k; ++i) set.positives.push_back(scores.ids[order[i]]);
  for (std::size_t i = 0; i < k; ++i) set.negatives.push_back(scores.ids[order[order.size() - 1 - i]]);
  return set;
}

double linear_response(const ClassifierParams& params, const FeatureVector& x) {
  double z = params.weights[params.hash_dim];
  for (auto i : x.indices) z += params.weights[i];
  return z;
}

ClassifierParams train_classifier(const DistillSet& set, std::span<const TracedExample> train, const Vocab& vocab,
                                  const ClassifierConfig& config) {
  if (set.positives.empty() || set.negatives.empty()) throw std::invalid_argument("distill set is degenerate");
  if (config.epochs < 1) throw config_error("classifier epochs must be >= 1");
  if (!(config.lr > 0.0)) throw config_error("classifier lr must be > 0");
  std::unordered_map<std::int64_t, const TracedExample*> by_id;
  for (const auto& ex : train) by_id.emplace(ex.id, &ex);

  std::vector<Labeled> data;
  auto add = [&](std::int64_t id, bool label) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw std::invalid_argument("distill set references unknown id " + std::to_string(id));
    data.push_back({featurize(it->second->source, it->second->target, vocab, config.hash_dim), label});
  };
  for (auto id : set.positives) add(id, true);
  for (auto id : set.negatives) add(id, false);

  Rng rng(derive_seed(config.seed, kClassifierStream));
  rng.shuffle(std::span<Labeled>(data));
  std::size_t n_held = static_cast<std::size_t>(std::floor(config.holdout_fraction * static_cast<double>(data.size())));
  if (config.holdout_fraction > 0.0 && data.size() >= 2) n_held = std::clamp<std::size_t>(n_held, 1, data.size() - 1);
  const std::span<const Labeled> held(data.data(), n_held);
  std::vector<std::size_t> fit(data.size() - n_held);
  for (std::size_t i = 0; i < fit.size(); ++i) fit[i] = n_held + i;

  ClassifierParams params;
  params.hash_dim = config.hash_dim;
  params.weights.assign(config.hash_dim + 1, 0.0);
  auto heldout_loss = [&](const ClassifierParams& p) {
    if (held.empty()) return 0.0;
    double s = 0.0;
    for (const auto& d : held) s += log_loss(sigmoid(linear_response(p, d.x)), d.y);
    return s / static_cast<double>(held.size());
  };

  ClassifierParams best = params;
  best.heldout_loss = heldout_loss(params);
  std::size_t stale = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(fit));
    for (auto idx : fit) {
      const auto& d = data[idx];
      const double p = sigmoid(linear_response(params, d.x));
      const double g = config.lr * (p - (d.y ? 1.0 : 0.0));
      for (auto i : d.x.indices) params.weights[i] -= g;
      params.weights[params.hash_dim] -= g;
    }
    if (!all_finite(params.weights)) throw PipelineError("numeric", "non-finite classifier weights");
    params.epochs_run = epoch;
    const double loss = heldout_loss(params);
    if (held.empty() || loss < best.heldout_loss || epoch == 1) {
      best = params;
      best.heldout_loss = loss;
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  best.epochs_run = params.epochs_run;

  std::size_t correct = 0;
  for (auto idx : fit) {
    const auto& d = data[idx];
    if ((linear_response(best, d.x) > 0.0) == d.y) ++correct;
  }
  best.train_accuracy = fit.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(fit.size());
  return best;
}

ScoreTable score_classifier(const ClassifierParams& params, std::span<const TracedExample> train,
                            const Vocab& vocab, std::size_t threads) {
  ScoreTable table;
  table.method = "cea";
  for (const auto& ex : train) table.ids.push_back(ex.id);
  table.scores.assign(train.size(), 0.0);
  parallel_for(train.size(), threads, [&](std::size_t i) {
    const auto x = featurize(train[i].source, train[i].target, vocab, params.hash_dim);
    table.scores[i] = sigmoid(linear_response(params, x));
  });
  return table;
}

nlohmann::json to_json(const ClassifierParams& params) {
  nlohmann::json weights = nlohmann::json::array();
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    if (params.weights[i] != 0.0) weights.push_back({i, params.weights[i]});
  }
  return {{"hash_dim", params.hash_dim},
          {"weights", weights},
          {"metadata",
           {{"epochs_run", params.epochs_run},
            {"train_accuracy", params.train_accuracy},
            {"heldout_loss", params.heldout_loss}}}};
}

ClassifierParams classifier_from_json(const nlohmann::json& j) {
  ClassifierParams p;
  p.hash_dim = j.at("hash_dim");
  p.weights.assign(p.hash_dim + 1, 0.0);
  for (const auto& w : j.at("weights")) p.weights.at(w.at(0).get<std::size_t>()) = w.at(1).get<double>();
  const auto& meta = j.at("metadata");
  p.epochs_run = meta.at("epochs_run");
  p.train_accuracy = meta.at("train_accuracy");
  p.heldout_loss = meta.at("heldout_loss");
  return p;
}

nlohmann::json to_json(const DistillSet& set) {
  return {{"k", set.k}, {"positives", set.positives}, {"negatives", set.negatives}};
}

}  // namespace errtrace

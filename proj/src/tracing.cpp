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

#include "errtrace/tracing.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "errtrace/error.hpp"
#include "errtrace/hash.hpp"
#include "errtrace/parallel.hpp"
#include "errtrace/rng.hpp"

namespace errtrace {
namespace {

constexpr std::uint64_t kRandomStream = 0x5a;

ScoreTable make_table(std::span<const TracedExample> train, std::string method) {
  ScoreTable t;
  t.method = std::move(method);
  t.ids.reserve(train.size());
  for (const auto& ex : train) t.ids.push_back(ex.id);
  t.scores.assign(train.size(), 0.0);
  return t;
}

// Runs fn(i, scratch) over contiguous chunks, one scratch gradient buffer
// per worker.
template <typename Fn>
void chunked(std::size_t n, std::size_t threads, std::size_t scratch_size, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  parallel_for(threads, threads, [&](std::size_t w) {
    std::vector<double> scratch(scratch_size);
    const std::size_t lo = n * w / threads;
    const std::size_t hi = n * (w + 1) / threads;
    for (std::size_t i = lo; i < hi; ++i) fn(i, scratch);
  });
}

double subset_dot(std::span<const double> full, const ParamSubset& subset, std::span<const double> packed) {
  double s = 0.0;
  std::size_t k = 0;
  for (const auto& r : subset) {
    for (std::size_t j = 0; j < r.size; ++j) s += full[r.offset + j] * packed[k++];
  }
  return s;
}

std::vector<double> mean_subset_gradient(const LossModel& model, std::span<const double> params,
                                         std::span<const SeqPair> cases, const ParamSubset& subset) {
  std::vector<double> full(model.num_params(), 0.0);
  const double scale = 1.0 / static_cast<double>(cases.size());
  for (const auto& c : cases) model.accumulate_gradient(params, c.source, c.target, scale, full);
  return gather(full, subset);
}

void check_checkpoints(const LossModel& model, std::span<const Checkpoint> checkpoints, const ParamSubset& subset) {
  if (checkpoints.empty()) throw std::invalid_argument("TracIn needs at least one checkpoint");
  for (const auto& c : checkpoints) {
    if (c.params.size() != model.num_params()) {
      throw std::invalid_argument("checkpoint " + std::to_string(c.epoch) + " does not match the model layout");
    }
  }
  for (const auto& r : subset) {
    if (r.offset + r.size > model.num_params()) throw std::invalid_argument("parameter subset exceeds the model");
  }
}

// Shared TracIn loop: `direction(t)` is the error-side vector at checkpoint t.
template <typename Direction>
ScoreTable tracin_like(const LossModel& model, std::span<const Checkpoint> checkpoints,
                       std::span<const TracedExample> train, const ParamSubset& subset, std::size_t threads,
                       std::string method, Direction&& direction) {
  check_checkpoints(model, checkpoints, subset);
  ScoreTable table = make_table(train, std::move(method));
  for (const auto& ckpt : checkpoints) {
    const std::vector<double> dir = direction(ckpt);
    std::vector<double> contribution(train.size());
    chunked(train.size(), threads, model.num_params(), [&](std::size_t i, std::vector<double>& g) {
      std::fill(g.begin(), g.end(), 0.0);
      model.accumulate_gradient(ckpt.params, train[i].source, train[i].target, 1.0, g);
      contribution[i] = ckpt.eta * subset_dot(g, subset, dir);
    });
    for (std::size_t i = 0; i < train.size(); ++i) table.scores[i] += contribution[i];
  }
  return table;
}

ScoreTable loss_difference(const LossModel& model, std::span<const double> minuend,
                           std::span<const double> subtrahend, std::span<const TracedExample> train,
                           std::size_t threads, std::string method) {
  ScoreTable table = make_table(train, std::move(method));
  parallel_for(train.size(), threads, [&](std::size_t i) {
    const auto& ex = train[i];
    table.scores[i] = model.loss(minuend, ex.source, ex.target) - model.loss(subtrahend, ex.source, ex.target);
  });
  return table;
}

}  // namespace

void validate(const EstimatorConfig& c) {
  if (!(c.bm25_k1 > 0.0)) throw config_error("bm25 k1 must be > 0");
  if (!(c.bm25_b >= 0.0 && c.bm25_b <= 1.0)) throw config_error("bm25 b must lie in [0, 1]");
  if (!(c.lr > 0.0)) throw config_error("fine-tune lr must be > 0");
  if (c.checkpoint < 1) throw config_error("checkpoint index must be >= 1");
  if (c.threads < 1) throw config_error("threads must be >= 1");
}

const std::vector<std::string>& known_methods() {
  static const std::vector<std::string> kMethods = {"random", "bm25", "embed", "tracin", "tracin_contrast",
                                                    "grad_noncontrast", "cea_grad", "cea"};
  return kMethods;
}

bool is_known_method(const std::string& method) {
  const auto& m = known_methods();
  return std::find(m.begin(), m.end(), method) != m.end();
}

std::string fingerprint(const EstimatorConfig& c, const std::string& method) {
  nlohmann::json j;
  j["method"] = method;
  if (method == "bm25") {
    j["k1"] = c.bm25_k1;
    j["b"] = c.bm25_b;
  } else if (method == "tracin" || method == "tracin_contrast") {
    j["checkpoints"] = c.tracin_checkpoints;
    j["subset"] = c.subset;
  } else if (method == "cea_grad" || method == "grad_noncontrast" || method == "cea") {
    j["checkpoint"] = c.checkpoint;
    j["steps"] = c.steps;
    j["lr"] = c.lr;
  }
  return hex64(fnv1a64(j.dump()));
}

std::vector<SeqPair> erroneous_pairs(std::span<const ErrorCase> errors) {
  std::vector<SeqPair> out;
  for (const auto& e : errors) out.push_back({e.input, e.erroneous});
  return out;
}

std::vector<SeqPair> corrected_pairs(std::span<const ErrorCase> errors) {
  std::vector<SeqPair> out;
  for (const auto& e : errors) out.push_back({e.input, e.corrected});
  return out;
}

ScoreTable score_random(std::span<const TracedExample> train, std::uint64_t seed) {
  ScoreTable table = make_table(train, "random");
  Rng rng(derive_seed(seed, kRandomStream));
  for (auto& s : table.scores) s = rng.uniform();
  return table;
}

ScoreTable score_embed(const Seq2Seq& model, std::span<const double> params, std::span<const ErrorCase> errors,
                       std::span<const TracedExample> train, std::size_t threads) {
  if (errors.empty()) throw std::invalid_argument("embedding scores need at least one error case");
  std::vector<std::vector<double>> queries;
  for (const auto& e : errors) queries.push_back(model.encode_repr(params, e.input, e.erroneous));
  ScoreTable table = make_table(train, "embed");
  parallel_for(train.size(), threads, [&](std::size_t i) {
    const auto repr = model.encode_repr(params, train[i].source, train[i].target);
    double s = 0.0;
    for (const auto& q : queries) s += dot(q, repr);
    table.scores[i] = s / static_cast<double>(queries.size());
  });
  return table;
}

ScoreTable score_tracin(const LossModel& model, std::span<const Checkpoint> checkpoints,
                        std::span<const ErrorCase> errors, std::span<const TracedExample> train,
                        const ParamSubset& subset, std::size_t threads) {
  if (errors.empty()) throw std::invalid_argument("TracIn needs at least one error case");
  const auto wrong = erroneous_pairs(errors);
  return tracin_like(model, checkpoints, train, subset, threads, "tracin", [&](const Checkpoint& c) {
    return mean_subset_gradient(model, c.params, wrong, subset);
  });
}

ScoreTable score_tracin_contrast(const LossModel& model, std::span<const Checkpoint> checkpoints,
                                 std::span<const ErrorCase> errors, std::span<const TracedExample> train,
                                 const ParamSubset& subset, std::size_t threads) {
  if (errors.empty()) throw std::invalid_argument("TracIn needs at least one error case");
  const auto wrong = erroneous_pairs(errors);
  const auto right = corrected_pairs(errors);
  return tracin_like(model, checkpoints, train, subset, threads, "tracin_contrast", [&](const Checkpoint& c) {
    auto dir = mean_subset_gradient(model, c.params, wrong, subset);
    const auto fix = mean_subset_gradient(model, c.params, right, subset);
    for (std::size_t k = 0; k < dir.size(); ++k) dir[k] -= fix[k];
    return dir;
  });
}

ScoreTable score_cea_grad(const LossModel& model, std::span<const double> start,
                          std::span<const ErrorCase> errors, std::span<const TracedExample> train,
                          std::size_t steps, double lr, std::size_t threads) {
  if (errors.empty()) throw std::invalid_argument("contrastive scores need at least one error case");
  const auto toward_fix = fine_tune(model, start, corrected_pairs(errors), steps, lr);
  const auto toward_error = fine_tune(model, start, erroneous_pairs(errors), steps, lr);
  return loss_difference(model, toward_fix, toward_error, train, threads, "cea_grad");
}

ScoreTable score_grad_noncontrast(const LossModel& model, std::span<const double> start,
                                  std::span<const ErrorCase> errors, std::span<const TracedExample> train,
                                  std::size_t steps, double lr, std::size_t threads) {
  if (errors.empty()) throw std::invalid_argument("gradient scores need at least one error case");
  const auto toward_error = fine_tune(model, start, erroneous_pairs(errors), steps, lr);
  return loss_difference(model, start, toward_error, train, threads, "grad_noncontrast");
}

ScoreTable score_bm25(std::span<const ErrorCase> errors, std::span<const TracedExample> train, double k1,
                      double b, std::size_t threads) {
  if (train.empty()) throw std::invalid_argument("BM25 needs a non-empty training set");
  if (!(k1 > 0.0) || !(b >= 0.0 && b <= 1.0)) throw std::invalid_argument("BM25 constants out of range");

  // Term frequencies per document, document frequencies over the collection.
  std::vector<std::map<TokenId, std::size_t>> tf(train.size());
  std::vector<double> doc_len(train.size());
  std::map<TokenId, std::size_t> df;
  double total_len = 0.0;
  for (std::size_t i = 0; i < train.size(); ++i) {
    for (TokenId t : train[i].source) ++tf[i][t];
    for (TokenId t : train[i].target) ++tf[i][t];
    doc_len[i] = static_cast<double>(train[i].source.size() + train[i].target.size());
    total_len += doc_len[i];
    for (const auto& [t, _] : tf[i]) ++df[t];
  }
  const double n_docs = static_cast<double>(train.size());
  const double avgdl = total_len / n_docs;

  std::vector<std::vector<std::pair<TokenId, double>>> queries;
  for (const auto& e : errors) {
    std::map<TokenId, double> q;
    for (TokenId t : e.input) q[t] = 0.0;
    for (TokenId t : e.erroneous) q[t] = 0.0;
    for (auto& [t, idf] : q) {
      const auto it = df.find(t);
      const double n_t = it == df.end() ? 0.0 : static_cast<double>(it->second);
      idf = std::max(0.0, std::log(1.0 + (n_docs - n_t + 0.5) / (n_t + 0.5)));
    }
    queries.emplace_back(q.begin(), q.end());
  }

  ScoreTable table = make_table(train, "bm25");
  if (queries.empty()) return table;
  parallel_for(train.size(), threads, [&](std::size_t i) {
    const double norm = k1 * (1.0 - b + b * doc_len[i] / avgdl);
    double total = 0.0;
    for (const auto& q : queries) {
      double s = 0.0;
      for (const auto& [t, idf] : q) {
        const auto it = tf[i].find(t);
        if (it == tf[i].end()) continue;
        const double f = static_cast<double>(it->second);
        s += idf * f * (k1 + 1.0) / (f + norm);
      }
      total += s;
    }
    table.scores[i] = total / static_cast<double>(queries.size());
  });
  return table;
}

}  // namespace errtrace

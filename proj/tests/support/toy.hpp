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

// Shared test helpers: a tiny softmax-regression LossModel, closed-form
// oracles written against plain arrays, and brute-force metric references.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errtrace/corpus.hpp"
#include "errtrace/loss_model.hpp"
#include "errtrace/rng.hpp"
#include "errtrace/trainer.hpp"

namespace toy {

using errtrace::TokenId;
using errtrace::TokenSeq;

// Classes x features weight matrix, row-major. Source tokens (ids below
// `features`) are counted into x; the single target token is the class.
class SoftmaxRegression final : public errtrace::LossModel {
 public:
  SoftmaxRegression(std::size_t classes, std::size_t features) : classes_(classes), features_(features) {}

  std::size_t num_params() const override { return classes_ * features_; }

  double loss(std::span<const double> w, std::span<const TokenId> source,
              std::span<const TokenId> target) const override {
    const auto p = probs(w, source);
    return -std::log(p[static_cast<std::size_t>(target[0])]);
  }

  double accumulate_gradient(std::span<const double> w, std::span<const TokenId> source,
                             std::span<const TokenId> target, double scale, std::span<double> grad) const override {
    const auto p = probs(w, source);
    const auto x = counts(source);
    const auto y = static_cast<std::size_t>(target[0]);
    for (std::size_t c = 0; c < classes_; ++c) {
      const double r = p[c] - (c == y ? 1.0 : 0.0);
      for (std::size_t f = 0; f < features_; ++f) grad[c * features_ + f] += scale * r * x[f];
    }
    return -std::log(p[y]);
  }

  std::vector<double> counts(std::span<const TokenId> source) const {
    std::vector<double> x(features_, 0.0);
    for (TokenId t : source) x[static_cast<std::size_t>(t)] += 1.0;
    return x;
  }

 private:
  std::vector<double> probs(std::span<const double> w, std::span<const TokenId> source) const {
    const auto x = counts(source);
    std::vector<double> z(classes_, 0.0);
    for (std::size_t c = 0; c < classes_; ++c) {
      for (std::size_t f = 0; f < features_; ++f) z[c] += w[c * features_ + f] * x[f];
    }
    const double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (auto& v : z) s += (v = std::exp(v - m));
    for (auto& v : z) v /= s;
    return z;
  }

  std::size_t classes_;
  std::size_t features_;
};

// Closed forms, deliberately not going through LossModel.
struct Softmax3x3 {
  static constexpr std::size_t C = 3, F = 3;

  static void logits(const std::vector<double>& w, const std::vector<double>& x, double z[C]) {
    for (std::size_t c = 0; c < C; ++c) z[c] = w[c * F] * x[0] + w[c * F + 1] * x[1] + w[c * F + 2] * x[2];
  }
  static double nll(const std::vector<double>& w, const std::vector<double>& x, int y) {
    double z[C];
    logits(w, x, z);
    const double m = std::max({z[0], z[1], z[2]});
    const double lse = m + std::log(std::exp(z[0] - m) + std::exp(z[1] - m) + std::exp(z[2] - m));
    return lse - z[y];
  }
  static std::vector<double> grad(const std::vector<double>& w, const std::vector<double>& x, int y) {
    double z[C];
    logits(w, x, z);
    const double m = std::max({z[0], z[1], z[2]});
    const double e0 = std::exp(z[0] - m), e1 = std::exp(z[1] - m), e2 = std::exp(z[2] - m);
    const double s = e0 + e1 + e2;
    const double p[C] = {e0 / s, e1 / s, e2 / s};
    std::vector<double> g(C * F);
    for (std::size_t c = 0; c < C; ++c) {
      for (std::size_t f = 0; f < F; ++f) g[c * F + f] = (p[c] - (static_cast<int>(c) == y ? 1.0 : 0.0)) * x[f];
    }
    return g;
  }
};

inline std::vector<double> bag(std::span<const TokenId> source) {
  std::vector<double> x(Softmax3x3::F, 0.0);
  for (TokenId t : source) x[static_cast<std::size_t>(t)] += 1.0;
  return x;
}

// Plain loop over T full-batch steps on (input, class) pairs.
inline std::vector<double> replay_descent(std::vector<double> w, const std::vector<std::vector<double>>& xs,
                                          const std::vector<int>& ys, std::size_t steps, double lr) {
  for (std::size_t t = 0; t < steps; ++t) {
    std::vector<double> g(w.size(), 0.0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const auto gi = Softmax3x3::grad(w, xs[i], ys[i]);
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += gi[k] / static_cast<double>(xs.size());
    }
    for (std::size_t k = 0; k < w.size(); ++k) w[k] -= lr * g[k];
  }
  return w;
}

// n(n-1)/2 pair counting, ties worth one half.
inline double brute_au_roc(const std::vector<double>& s, const std::vector<bool>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j]) continue;
      pairs += 1.0;
      if (s[i] > s[j]) wins += 1.0;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

// Average precision over every distinct threshold, from the top down, in
// exact integer fractions: sum of (recall step) x (precision there).
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;
  void add(std::int64_t n, std::int64_t d) {
    const std::int64_t g = std::gcd(den, d);
    num = num * (d / g) + n * (den / g);
    den = den / g * d;
    const std::int64_t r = std::gcd(num < 0 ? -num : num, den);
    if (r > 1) {
      num /= r;
      den /= r;
    }
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

inline Fraction brute_au_pr(const std::vector<double>& s, const std::vector<bool>& y) {
  std::vector<double> thresholds = s;
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  const auto total_pos = static_cast<std::int64_t>(std::count(y.begin(), y.end(), true));
  Fraction ap;
  std::int64_t prev_tp = 0;
  for (double t : thresholds) {
    std::int64_t tp = 0, k = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] >= t) {
        ++k;
        if (y[i]) ++tp;
      }
    }
    // (tp - prev_tp) / P * tp / k
    if (tp > prev_tp) ap.add((tp - prev_tp) * tp, total_pos * k);
    prev_tp = tp;
  }
  return ap;
}

// Random instance with at least one label of each kind. Scores come from a
// small grid so ties show up often.
inline void random_instance(errtrace::Rng& rng, std::size_t n, std::vector<double>& s, std::vector<bool>& y) {
  do {
    s.assign(n, 0.0);
    y.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.below(8)) / 4.0;
      y[i] = rng.bernoulli(0.3);
    }
  } while (std::count(y.begin(), y.end(), true) == 0 || std::count(y.begin(), y.end(), false) == 0);
}

// Central differences on `per_block` random coordinates of every parameter
// block, for each example. Returns the worst relative error seen, with
// |a - n| / max(|a|, |n|, floor) as the measure.
struct GradCheck {
  double worst = 0.0;
  std::size_t checked = 0;
  std::vector<std::string> blocks;
};

template <typename Model>
GradCheck check_gradients(const Model& model, std::span<const double> params,
                          const std::vector<std::pair<TokenSeq, TokenSeq>>& examples, std::size_t per_block,
                          double step, double floor, std::uint64_t seed) {
  GradCheck out;
  errtrace::Rng rng(seed);
  std::vector<double> w(params.begin(), params.end());
  for (const auto& [src, tgt] : examples) {
    std::vector<double> g(model.num_params(), 0.0);
    model.accumulate_gradient(w, src, tgt, 1.0, g);
    for (const auto& block : model.layout()) {
      if (out.blocks.size() < model.layout().size()) out.blocks.push_back(block.name);
      for (std::size_t k = 0; k < per_block; ++k) {
        const std::size_t i = block.offset + rng.below(block.size());
        const double saved = w[i];
        w[i] = saved + step;
        const double up = model.loss(w, src, tgt);
        w[i] = saved - step;
        const double down = model.loss(w, src, tgt);
        w[i] = saved;
        const double numeric = (up - down) / (2.0 * step);
        const double denom = std::max({std::abs(g[i]), std::abs(numeric), floor});
        out.worst = std::max(out.worst, std::abs(g[i] - numeric) / denom);
        ++out.checked;
      }
    }
  }
  return out;
}

}  // namespace toy

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

#include "errtrace/metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace errtrace {
namespace {

struct TieGroup {
  double score = 0.0;
  std::uint64_t pos = 0;
  std::uint64_t neg = 0;
};

// Groups of equal score, highest first.
std::vector<TieGroup> tie_groups(std::span<const double> scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<TieGroup> groups;
  for (auto i : order) {
    if (groups.empty() || groups.back().score != scores[i]) groups.push_back({scores[i], 0, 0});
    (labels[i] ? groups.back().pos : groups.back().neg) += 1;
  }
  return groups;
}

std::uint64_t count_positives(const std::vector<bool>& labels) {
  return static_cast<std::uint64_t>(std::count(labels.begin(), labels.end(), true));
}

}  // namespace

double au_roc(std::span<const double> scores, const std::vector<bool>& labels) {
  const auto groups = tie_groups(scores, labels);
  const std::uint64_t p = count_positives(labels);
  const std::uint64_t n = labels.size() - p;
  if (p == 0 || n == 0) throw std::invalid_argument("auROC needs at least one positive and one negative");
  // Twice the Mann-Whitney U: 2 per correctly ordered pair, 1 per tie.
  std::uint64_t twice_u = 0;
  std::uint64_t neg_below = n;
  for (const auto& g : groups) {
    neg_below -= g.neg;
    twice_u += 2 * g.pos * neg_below + g.pos * g.neg;
  }
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(p) * static_cast<double>(n));
}

double au_pr(std::span<const double> scores, const std::vector<bool>& labels) {
  const auto groups = tie_groups(scores, labels);
  const std::uint64_t p = count_positives(labels);
  if (p == 0) throw std::invalid_argument("auPR needs at least one positive");
  double sum = 0.0;
  std::uint64_t tp = 0, k = 0;
  for (const auto& g : groups) {
    tp += g.pos;
    k += g.pos + g.neg;
    if (g.pos > 0) sum += static_cast<double>(g.pos) * (static_cast<double>(tp) / static_cast<double>(k));
  }
  return sum / static_cast<double>(p);
}

std::vector<PrPoint> pr_curve(std::span<const double> scores, const std::vector<bool>& labels) {
  const auto groups = tie_groups(scores, labels);
  const std::uint64_t p = count_positives(labels);
  if (p == 0) throw std::invalid_argument("PR curve needs at least one positive");
  std::vector<PrPoint> curve;
  std::uint64_t tp = 0, k = 0;
  for (const auto& g : groups) {
    tp += g.pos;
    k += g.pos + g.neg;
    curve.push_back({g.score, static_cast<double>(tp) / static_cast<double>(k),
                     static_cast<double>(tp) / static_cast<double>(p)});
  }
  return curve;
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, const std::vector<bool>& labels) {
  const auto groups = tie_groups(scores, labels);
  const std::uint64_t p = count_positives(labels);
  const std::uint64_t n = labels.size() - p;
  if (p == 0 || n == 0) throw std::invalid_argument("ROC curve needs at least one positive and one negative");
  std::vector<RocPoint> curve;
  std::uint64_t tp = 0, fp = 0;
  for (const auto& g : groups) {
    tp += g.pos;
    fp += g.neg;
    curve.push_back({g.score, static_cast<double>(fp) / static_cast<double>(n),
                     static_cast<double>(tp) / static_cast<double>(p)});
  }
  return curve;
}

RankingMetrics evaluate_ranking(const ScoreTable& table, const std::vector<bool>& labels) {
  RankingMetrics m;
  m.au_pr = au_pr(table.scores, labels);
  m.au_roc = au_roc(table.scores, labels);
  m.curve = pr_curve(table.scores, labels);
  m.positives = static_cast<std::size_t>(count_positives(labels));
  m.total = labels.size();
  return m;
}

double mean_ap(std::span<const double> per_setting) {
  if (per_setting.empty()) throw std::invalid_argument("mean_ap of an empty list");
  double s = 0.0;
  for (double v : per_setting) s += v;
  return s / static_cast<double>(per_setting.size());
}

}  // namespace errtrace

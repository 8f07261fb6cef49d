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

#include <span>
#include <vector>

#include "errtrace/score_table.hpp"

namespace errtrace {

struct PrPoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RankingMetrics {
  double au_pr = 0.0;
  double au_roc = 0.0;
  std::vector<PrPoint> curve;
  std::size_t positives = 0;
  std::size_t total = 0;
};

/// Mann-Whitney: share of (positive, negative) pairs ordered correctly,
/// ties counted as half. Computed from integer pair counts.
double au_roc(std::span<const double> scores, const std::vector<bool>& labels);

/// Average precision, one threshold step per distinct score:
/// sum over steps of (positives gained) * precision, divided by positives.
double au_pr(std::span<const double> scores, const std::vector<bool>& labels);

std::vector<PrPoint> pr_curve(std::span<const double> scores, const std::vector<bool>& labels);
std::vector<RocPoint> roc_curve(std::span<const double> scores, const std::vector<bool>& labels);

RankingMetrics evaluate_ranking(const ScoreTable& table, const std::vector<bool>& labels);

double mean_ap(std::span<const double> per_setting);

}  // namespace errtrace

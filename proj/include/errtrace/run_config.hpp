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
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "errtrace/corpus.hpp"
#include "errtrace/distill.hpp"
#include "errtrace/tracing.hpp"
#include "errtrace/trainer.hpp"

namespace errtrace {

struct DistillConfig {
  std::size_t k = 0;  // 0 = default_distill_k(train size)
  ClassifierConfig classifier;
};

struct EvalConfig {
  std::vector<std::string> methods;
  std::vector<std::string> budgets;  // "N" examples or "Mx" times the canary count
  std::map<std::string, std::vector<double>> sweeps;
};

struct RunConfig {
  std::uint64_t seed = 1;
  CorpusConfig corpus;
  std::vector<CanarySpec> canaries;
  TrainConfig train;
  EstimatorConfig trace;
  std::size_t num_errors = 5;
  DistillConfig distill;
  EvalConfig eval;
};

RunConfig default_run_config();

/// Overlays `j` on the defaults. Unknown keys are config errors.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);

/// Copies the run seed into the per-stage seeds.
void apply_seed(RunConfig& config, std::uint64_t seed);

void validate(const RunConfig& config);

std::string config_hash(const RunConfig& config);

std::size_t parse_budget(const std::string& token, std::size_t canary_count);

}  // namespace errtrace

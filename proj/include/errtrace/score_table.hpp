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
#include <string>
#include <vector>

#include <json.hpp>

namespace errtrace {

/// Per-training-example attribution scores, higher = more suspicious.
/// Entries are in ascending id order with exactly one score per example.
struct ScoreTable {
  std::string method;
  std::string config_fingerprint;
  std::vector<std::int64_t> ids;
  std::vector<double> scores;

  std::size_t size() const { return ids.size(); }
};

/// Throws std::invalid_argument if ids are not strictly ascending, sizes
/// differ, or any score is non-finite.
void validate(const ScoreTable& table);

/// "id,score" header then one row per example; scores printed with 17
/// significant digits so they round-trip exactly.
std::string to_csv(const ScoreTable& table);
ScoreTable score_table_from_csv(const std::string& csv, std::string method, std::string fingerprint);

nlohmann::json sidecar(const ScoreTable& table, const std::string& corpus_hash);

/// Positions into the table sorted by descending score, ties by ascending id.
std::vector<std::size_t> rank_descending(const ScoreTable& table);

}  // namespace errtrace

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

#include "errtrace/score_table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace errtrace {

void validate(const ScoreTable& table) {
  if (table.ids.size() != table.scores.size()) throw std::invalid_argument("score table size mismatch");
  for (std::size_t i = 0; i < table.ids.size(); ++i) {
    if (i > 0 && table.ids[i] <= table.ids[i - 1]) throw std::invalid_argument("score table ids not ascending");
    if (!std::isfinite(table.scores[i])) {
      throw std::invalid_argument("non-finite score for id " + std::to_string(table.ids[i]));
    }
  }
}

std::string to_csv(const ScoreTable& table) {
  validate(table);
  std::string out = "id,score\n";
  char buf[64];
  for (std::size_t i = 0; i < table.ids.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%lld,%.17g\n", static_cast<long long>(table.ids[i]), table.scores[i]);
    out += buf;
  }
  return out;
}

ScoreTable score_table_from_csv(const std::string& csv, std::string method, std::string fingerprint) {
  ScoreTable t{std::move(method), std::move(fingerprint), {}, {}};
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  if (line != "id,score") throw std::invalid_argument("score CSV has an unexpected header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::invalid_argument("malformed score row: " + line);
    t.ids.push_back(std::stoll(line.substr(0, comma)));
    t.scores.push_back(std::stod(line.substr(comma + 1)));
  }
  validate(t);
  return t;
}

nlohmann::json sidecar(const ScoreTable& table, const std::string& corpus_hash) {
  return {{"method", table.method}, {"config_fingerprint", table.config_fingerprint}, {"corpus_hash", corpus_hash}};
}

std::vector<std::size_t> rank_descending(const ScoreTable& table) {
  std::vector<std::size_t> order(table.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return table.scores[a] > table.scores[b]; });
  return order;
}

}  // namespace errtrace

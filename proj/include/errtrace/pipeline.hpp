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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "errtrace/run_config.hpp"

namespace errtrace {

struct CommandOptions {
  std::filesystem::path run_dir = "run";
  std::optional<std::filesystem::path> config_path;
  std::optional<std::uint64_t> seed;
  bool force = false;
  std::size_t threads = 1;
};

/// Config file (or defaults) with the --seed override applied.
RunConfig resolve_config(const CommandOptions& options);

nlohmann::json cmd_generate(const CommandOptions& options);
nlohmann::json cmd_train(const CommandOptions& options);
nlohmann::json cmd_trace(const CommandOptions& options, const std::string& method);
nlohmann::json cmd_distill(const CommandOptions& options);
nlohmann::json cmd_eval(const CommandOptions& options, const std::vector<std::string>& methods,
                        const std::vector<std::string>& budgets);
nlohmann::json cmd_sweep(const CommandOptions& options, const std::string& axis);
nlohmann::json cmd_report(const CommandOptions& options);

/// generate, train, trace every configured method, distill, eval, every
/// configured sweep and report.
nlohmann::json run_all(const CommandOptions& options);

std::string score_path(const std::string& method, const std::string& tag);

}  // namespace errtrace

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

#include <string>
#include <vector>

#include <json.hpp>

#include "errtrace/corpus.hpp"

namespace errtrace {

/// One JSON object per line:
///   {"id":0,"split":"train","source":[...],"target":[...],"canary":null}
/// train, then val, then pretrain records; each split in ascending id order.
std::string corpus_to_jsonl(const Corpus& corpus);

/// Sidecar with the vocabulary, entity inventory, injected pairs and seed.
nlohmann::json corpus_sidecar(const Corpus& corpus);

Corpus corpus_from_files(const std::string& jsonl_path, const std::string& sidecar_path);

nlohmann::json error_cases_to_json(const std::vector<ErrorCase>& cases, const Vocab& vocab);
std::vector<ErrorCase> error_cases_from_json(const nlohmann::json& j, const Vocab& vocab);

std::string read_text(const std::string& path);
/// Writes atomically: content goes to a temporary sibling that is renamed
/// over `path`.
void write_text(const std::string& path, const std::string& content);

}  // namespace errtrace

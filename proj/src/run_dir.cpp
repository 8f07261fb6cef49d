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

#include "errtrace/run_dir.hpp"

#include <fstream>

#include "errtrace/corpus_io.hpp"
#include "errtrace/error.hpp"
#include "errtrace/hash.hpp"

namespace errtrace {
namespace fs = std::filesystem;

namespace {
constexpr const char* kManifest = "manifest.json";
}

RunDir::RunDir(fs::path root) : root_(std::move(root)) {
  manifest_ = {{"artifacts", nlohmann::json::object()}};
  if (fs::exists(root_ / kManifest)) load();
}

void RunDir::init() {
  for (const char* sub : {"corpus", "checkpoints", "scores", "distill", "reports", "logs"}) {
    fs::create_directories(root_ / sub);
  }
  manifest_ = {{"artifacts", nlohmann::json::object()}};
  save();
}

void RunDir::load() {
  try {
    manifest_ = nlohmann::json::parse(read_text((root_ / kManifest).string()));
  } catch (const nlohmann::json::exception& e) {
    throw PipelineError("io", "corrupt manifest in " + root_.string() + ": " + e.what());
  }
  if (!manifest_.contains("artifacts")) manifest_["artifacts"] = nlohmann::json::object();
}

void RunDir::save() const { write_text((root_ / kManifest).string(), manifest_.dump(2) + "\n"); }

bool RunDir::has(const std::string& rel) const {
  return manifest_["artifacts"].contains(rel) && fs::exists(path(rel));
}

void RunDir::require(const std::string& rel, const std::string& needed_by) const {
  const auto& arts = manifest_["artifacts"];
  if (!arts.contains(rel) || !fs::exists(path(rel))) {
    throw PipelineError("stage-dependency", needed_by + " needs " + rel + ", which has not been produced");
  }
  const auto& entry = arts.at(rel);
  if (hex64(hash_file(path(rel).string())) != entry.at("hash").get<std::string>()) {
    throw PipelineError("stage-dependency", rel + " changed after it was recorded; rerun the stage that makes it");
  }
  for (const auto& [input, hash] : entry.at("inputs").items()) {
    if (!arts.contains(input) || arts.at(input).at("hash") != hash) {
      throw PipelineError("stage-dependency", rel + " is stale: its input " + input + " has changed");
    }
  }
}

std::string RunDir::read(const std::string& rel, const std::string& needed_by) const {
  require(rel, needed_by);
  return read_text(path(rel).string());
}

void RunDir::write(const std::string& rel, const std::string& content, const std::vector<std::string>& inputs) {
  fs::create_directories(path(rel).parent_path());
  write_text(path(rel).string(), content);
  record(rel, inputs);
}

void RunDir::record(const std::string& rel, const std::vector<std::string>& inputs) {
  nlohmann::json in = nlohmann::json::object();
  for (const auto& i : inputs) {
    if (!manifest_["artifacts"].contains(i)) throw std::logic_error("input " + i + " is not in the manifest");
    in[i] = manifest_["artifacts"][i]["hash"];
  }
  manifest_["artifacts"][rel] = {{"hash", hex64(hash_file(path(rel).string()))}, {"inputs", in}};
  save();
}

void RunDir::remove_matching(const std::string& prefix) {
  std::vector<std::string> doomed;
  for (const auto& [rel, _] : manifest_["artifacts"].items()) {
    if (rel.rfind(prefix, 0) == 0) doomed.push_back(rel);
  }
  for (const auto& rel : doomed) {
    fs::remove(path(rel));
    manifest_["artifacts"].erase(rel);
  }
  save();
}

void RunDir::log(const std::string& stage, const nlohmann::json& record) const {
  fs::create_directories(root_ / "logs");
  std::ofstream out(root_ / "logs" / (stage + ".jsonl"), std::ios::app);
  out << record.dump() << "\n";
}

}  // namespace errtrace

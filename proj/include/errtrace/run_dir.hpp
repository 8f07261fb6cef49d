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

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace errtrace {

/// A run directory: corpus/, checkpoints/, scores/, distill/, reports/,
/// logs/ and manifest.json. The manifest maps every artifact (path relative
/// to the root) to its FNV-1a hash and the hashes of the artifacts it was
/// built from; reads verify both.
class RunDir {
 public:
  explicit RunDir(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path path(const std::string& rel) const { return root_ / rel; }

  /// Creates the stage subdirectories and an empty manifest.
  void init();

  bool has(const std::string& rel) const;

  /// Fails with a stage-dependency error when `rel` is missing, was edited
  /// after being recorded, or was built from inputs that changed since.
  void require(const std::string& rel, const std::string& needed_by) const;

  std::string read(const std::string& rel, const std::string& needed_by) const;
  void write(const std::string& rel, const std::string& content, const std::vector<std::string>& inputs = {});

  /// Records an artifact already on disk.
  void record(const std::string& rel, const std::vector<std::string>& inputs = {});

  void remove_matching(const std::string& prefix);

  void log(const std::string& stage, const nlohmann::json& record) const;

  const nlohmann::json& manifest() const { return manifest_; }

 private:
  void load();
  void save() const;

  std::filesystem::path root_;
  nlohmann::json manifest_;
};

}  // namespace errtrace

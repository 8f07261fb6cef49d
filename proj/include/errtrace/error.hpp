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

#include <stdexcept>
#include <string>

namespace errtrace {

/// Failure with a machine-readable category. The CLI reports `kind` in its
/// error record; library callers can catch it as a std::runtime_error.
class PipelineError : public std::runtime_error {
 public:
  PipelineError(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

inline PipelineError config_error(const std::string& message) {
  return PipelineError("config", message);
}

}  // namespace errtrace

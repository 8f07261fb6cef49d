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

#include <json.hpp>

#include "errtrace/seq2seq.hpp"
#include "errtrace/trainer.hpp"

namespace errtrace {

/// Checkpoint container:
///   8 bytes   magic "ERRTCKP1"
///   8 bytes   header length N, little-endian u64
///   N bytes   JSON header {epoch, eta, train_loss, model{vocab_size, dim},
///             layout[{name, rows, cols, offset}], num_params, meta}
///   8*P bytes parameters, little-endian IEEE-754 doubles, layout order
void save_checkpoint(const std::string& path, const Checkpoint& ckpt, const Seq2Seq& model,
                     const nlohmann::json& meta = nlohmann::json::object());

struct LoadedCheckpoint {
  Checkpoint checkpoint;
  ModelConfig model;
  nlohmann::json meta;
};

LoadedCheckpoint load_checkpoint(const std::string& path);

std::string checkpoint_filename(std::size_t epoch);  // "ckpt-{epoch}"

}  // namespace errtrace

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
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "errtrace/corpus.hpp"
#include "errtrace/loss_model.hpp"

namespace errtrace {

struct TrainConfig {
  double learning_rate = 0.5;
  double lr_decay = 1.0;  // epoch t uses learning_rate * lr_decay^(t-1)
  std::size_t batch_size = 16;
  std::size_t epochs = 10;
  std::size_t pretrain_epochs = 0;  // warm-start epochs on the clean pretraining split
  std::uint64_t seed = 1;
  double gradient_clip = 5.0;
  std::string tracin_subset = "output+embed";
  std::size_t dim = 64;
  std::size_t max_decode_len = 16;
};

void validate(const TrainConfig& config);

/// State after completing epoch `epoch` (1-based).
struct Checkpoint {
  std::size_t epoch = 0;
  std::vector<double> params;
  double eta = 0.0;         // learning rate in effect during the epoch
  double train_loss = 0.0;  // mean example loss over the epoch's updates
};

struct EpochProgress {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
};

/// Minibatch SGD on the mean example loss with global-norm clipping and a
/// per-epoch geometric learning-rate schedule.
/// Example order is reshuffled each epoch from a stream derived from the
/// seed; gradients within a batch are summed in shuffled order, so the run
/// is bit-reproducible. Returns one checkpoint per epoch. Throws
/// PipelineError("numeric") on a non-finite loss or update.
std::vector<Checkpoint> train(const LossModel& model, std::span<const double> init,
                              std::span<const TracedExample> examples, const TrainConfig& config,
                              const std::function<void(const EpochProgress&)>& on_epoch = {});

/// Exactly `steps` full-batch gradient steps on the mean loss over `cases`,
/// without clipping. `start` is left untouched.
std::vector<double> fine_tune(const LossModel& model, std::span<const double> start,
                              std::span<const SeqPair> cases, std::size_t steps, double lr);

/// Mean loss over `cases`.
double mean_loss(const LossModel& model, std::span<const double> params, std::span<const SeqPair> cases);

}  // namespace errtrace

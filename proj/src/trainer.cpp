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

#include "errtrace/trainer.hpp"

#include <cmath>
#include <numeric>

#include "errtrace/error.hpp"
#include "errtrace/rng.hpp"

namespace errtrace {

void validate(const TrainConfig& c) {
  if (!(c.learning_rate > 0.0)) throw config_error("learning_rate must be > 0");
  if (c.epochs < 1) throw config_error("epochs must be >= 1");
  if (!(c.lr_decay > 0.0 && c.lr_decay <= 1.0)) throw config_error("lr_decay must lie in (0, 1]");
  if (c.batch_size < 1) throw config_error("batch_size must be >= 1");
  if (!(c.gradient_clip > 0.0)) throw config_error("gradient_clip must be > 0");
  if (c.dim < 1) throw config_error("dim must be >= 1");
}

std::vector<Checkpoint> train(const LossModel& model, std::span<const double> init,
                              std::span<const TracedExample> examples, const TrainConfig& config,
                              const std::function<void(const EpochProgress&)>& on_epoch) {
  validate(config);
  if (examples.empty()) throw PipelineError("data", "cannot train on an empty split");
  std::vector<double> params(init.begin(), init.end());
  std::vector<double> grad(model.num_params());
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(derive_seed(config.seed, 2));

  std::vector<Checkpoint> checkpoints;
  double eta = config.learning_rate;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch, eta *= config.lr_decay) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    for (std::size_t start = 0, batch = 0; start < order.size(); start += config.batch_size, ++batch) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = start; k < end; ++k) {
        const auto& ex = examples[order[k]];
        const double l = model.accumulate_gradient(params, ex.source, ex.target, scale, grad);
        if (!std::isfinite(l)) {
          throw PipelineError("numeric", "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                             std::to_string(batch));
        }
        loss_sum += l;
      }
      const double norm = std::sqrt(dot(grad, grad));
      const double step = norm > config.gradient_clip ? eta * config.gradient_clip / norm : eta;
      for (std::size_t i = 0; i < params.size(); ++i) params[i] -= step * grad[i];
      if (!all_finite(params)) {
        throw PipelineError("numeric", "non-finite parameters at epoch " + std::to_string(epoch) + ", batch " +
                                           std::to_string(batch));
      }
    }
    Checkpoint ckpt{epoch, params, eta, loss_sum / static_cast<double>(examples.size())};
    if (on_epoch) on_epoch({epoch, ckpt.train_loss});
    checkpoints.push_back(std::move(ckpt));
  }
  return checkpoints;
}

std::vector<double> fine_tune(const LossModel& model, std::span<const double> start,
                              std::span<const SeqPair> cases, std::size_t steps, double lr) {
  if (cases.empty()) throw std::invalid_argument("fine_tune needs at least one case");
  std::vector<double> params(start.begin(), start.end());
  std::vector<double> grad(model.num_params());
  const double scale = 1.0 / static_cast<double>(cases.size());
  for (std::size_t t = 0; t < steps; ++t) {
    std::fill(grad.begin(), grad.end(), 0.0);
    for (const auto& c : cases) model.accumulate_gradient(params, c.source, c.target, scale, grad);
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grad[i];
    if (!all_finite(params)) throw PipelineError("numeric", "non-finite update during fine-tuning");
  }
  return params;
}

double mean_loss(const LossModel& model, std::span<const double> params, std::span<const SeqPair> cases) {
  double s = 0.0;
  for (const auto& c : cases) s += model.loss(params, c.source, c.target);
  return cases.empty() ? 0.0 : s / static_cast<double>(cases.size());
}

}  // namespace errtrace

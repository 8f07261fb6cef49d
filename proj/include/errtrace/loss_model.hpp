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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "errtrace/vocab.hpp"

namespace errtrace {

/// A (source, target) sequence pair.
struct SeqPair {
  TokenSeq source;
  TokenSeq target;
};

/// Contiguous slice [offset, offset + size) of a flat parameter vector.
struct ParamRange {
  std::size_t offset = 0;
  std::size_t size = 0;
};

/// Ordered list of slices. Gradients restricted to a subset are the
/// concatenation of the slices in list order.
using ParamSubset = std::vector<ParamRange>;

std::size_t subset_size(const ParamSubset& subset);

/// A model whose per-example loss l(x, y; theta) and its gradient are
/// available over a flat parameter vector. The tracing estimators only see
/// this interface.
class LossModel {
 public:
  virtual ~LossModel() = default;

  virtual std::size_t num_params() const = 0;

  /// Mean per-token negative log-likelihood of `target` given `source`.
  virtual double loss(std::span<const double> params, std::span<const TokenId> source,
                      std::span<const TokenId> target) const = 0;

  /// Adds scale * dl/dtheta into `grad` (length num_params()) and returns
  /// the loss.
  virtual double accumulate_gradient(std::span<const double> params, std::span<const TokenId> source,
                                     std::span<const TokenId> target, double scale,
                                     std::span<double> grad) const = 0;

  /// The full parameter vector as one slice.
  ParamSubset all_params() const { return {{0, num_params()}}; }
};

/// Flattened gradient of the example loss over `subset`.
std::vector<double> example_gradient(const LossModel& model, std::span<const double> params,
                                     std::span<const TokenId> source, std::span<const TokenId> target,
                                     const ParamSubset& subset);

std::vector<double> gather(std::span<const double> full, const ParamSubset& subset);

double dot(std::span<const double> a, std::span<const double> b);

bool all_finite(std::span<const double> values);

}  // namespace errtrace

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

#include "errtrace/loss_model.hpp"

#include <cmath>
#include <stdexcept>

namespace errtrace {

std::size_t subset_size(const ParamSubset& subset) {
  std::size_t n = 0;
  for (const auto& r : subset) n += r.size;
  return n;
}

std::vector<double> gather(std::span<const double> full, const ParamSubset& subset) {
  std::vector<double> out;
  out.reserve(subset_size(subset));
  for (const auto& r : subset) {
    if (r.offset + r.size > full.size()) throw std::out_of_range("parameter subset exceeds the vector");
    out.insert(out.end(), full.begin() + static_cast<std::ptrdiff_t>(r.offset),
               full.begin() + static_cast<std::ptrdiff_t>(r.offset + r.size));
  }
  return out;
}

std::vector<double> example_gradient(const LossModel& model, std::span<const double> params,
                                     std::span<const TokenId> source, std::span<const TokenId> target,
                                     const ParamSubset& subset) {
  std::vector<double> full(model.num_params(), 0.0);
  model.accumulate_gradient(params, source, target, 1.0, full);
  return gather(full, subset);
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

bool all_finite(std::span<const double> values) {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace errtrace

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
#include <span>
#include <string>
#include <vector>

#include "errtrace/loss_model.hpp"
#include "errtrace/vocab.hpp"

namespace errtrace {

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t dim = 64;
};

/// Named block of the flat parameter vector. Matrices are column-major.
struct ParamBlock {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t offset = 0;

  std::size_t size() const { return rows * cols; }
};

/// Encoder-decoder with dot-product attention.
///
///   encoder   h_i = tanh(W_enc e(x_i) + b_enc)
///   decoder   s_0 = 0,  s_j = tanh(W_rec s_{j-1} + W_in e(y_{j-1}) + b_dec),  y_0 = <bos>
///   attention a_j = softmax(h . s_j),  c_j = sum_i a_ji h_i
///   output    o_j = tanh(W_os s_j + W_oc c_j + b_out),  logits = P o_j + b_proj
///
/// The embedding table e(.) is shared by encoder and decoder inputs; the
/// output projection P is untied. Targets are scored with an appended
/// <eos>, so a target of m tokens contributes m + 1 positions.
///
/// Parameter layout, in order:
///   embed (d x V; column t is token t), enc_w (d x d), enc_b (d),
///   dec_rec (d x d), dec_in (d x d), dec_b (d), out_s (d x d),
///   out_c (d x d), out_b (d), proj_w (V x d), proj_b (V).
class Seq2Seq final : public LossModel {
 public:
  explicit Seq2Seq(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  const std::vector<ParamBlock>& layout() const { return blocks_; }
  const ParamBlock& block(const std::string& name) const;

  std::size_t num_params() const override { return total_; }

  /// Seeded initialization: uniform Glorot ranges for matrices, zero biases.
  std::vector<double> init_params(std::uint64_t seed) const;

  double loss(std::span<const double> params, std::span<const TokenId> source,
              std::span<const TokenId> target) const override;

  double accumulate_gradient(std::span<const double> params, std::span<const TokenId> source,
                             std::span<const TokenId> target, double scale,
                             std::span<double> grad) const override;

  /// Probability the model assigns to each scored target position
  /// (targets then <eos>) under teacher forcing.
  std::vector<double> token_probabilities(std::span<const double> params, std::span<const TokenId> source,
                                          std::span<const TokenId> target) const;

  /// Argmax decoding until <eos> or max_len tokens; ties go to the lowest id.
  TokenSeq greedy_decode(std::span<const double> params, std::span<const TokenId> source,
                         std::size_t max_len) const;

  /// [mean encoder state over the source ; mean target-token embedding],
  /// scaled to unit length. Dimension 2d.
  std::vector<double> encode_repr(std::span<const double> params, std::span<const TokenId> source,
                                  std::span<const TokenId> target) const;

  /// Subset selector by block names, e.g. {"embed", "proj_w", "proj_b"}.
  ParamSubset subset(const std::vector<std::string>& block_names) const;

  /// Named selectors: "all", "output" (proj_w, proj_b) and
  /// "output+embed" (embed, proj_w, proj_b).
  ParamSubset named_subset(const std::string& selector) const;

 private:
  struct Forward;
  void forward(std::span<const double> params, std::span<const TokenId> source,
               std::span<const TokenId> target, Forward& f) const;
  void check_tokens(std::span<const TokenId> seq) const;

  ModelConfig config_;
  std::vector<ParamBlock> blocks_;
  std::size_t total_ = 0;
};

}  // namespace errtrace

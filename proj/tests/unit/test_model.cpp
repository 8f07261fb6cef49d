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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "errtrace/checkpoint_io.hpp"
#include "errtrace/corpus_io.hpp"
#include "errtrace/seq2seq.hpp"
#include "errtrace/trainer.hpp"
#include "toy.hpp"

using namespace errtrace;

namespace {

std::vector<std::pair<TokenSeq, TokenSeq>> random_pairs(std::size_t vocab, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::pair<TokenSeq, TokenSeq>> out;
  for (std::size_t i = 0; i < n; ++i) {
    TokenSeq s, t;
    const auto ls = 3 + rng.below(6), lt = 1 + rng.below(4);
    for (std::size_t k = 0; k < ls; ++k) s.push_back(static_cast<TokenId>(4 + rng.below(vocab - 4)));
    for (std::size_t k = 0; k < lt; ++k) t.push_back(static_cast<TokenId>(4 + rng.below(vocab - 4)));
    out.emplace_back(s, t);
  }
  return out;
}

std::vector<TracedExample> as_examples(const std::vector<std::pair<TokenSeq, TokenSeq>>& pairs) {
  std::vector<TracedExample> out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    out.push_back({static_cast<std::int64_t>(i), pairs[i].first, pairs[i].second, {}});
  }
  return out;
}

}  // namespace

TEST_CASE("analytic gradients agree with central differences on every block") {
  const Seq2Seq model({30, 24});
  const auto params = model.init_params(3);
  const auto res = toy::check_gradients(model, params, random_pairs(30, 5, 8), 20, 1e-4, 1e-7, 21);
  CHECK(res.blocks.size() == model.layout().size());
  CHECK(res.checked == 5 * 20 * model.layout().size());
  CHECK(res.worst < 1e-4);
}

TEST_CASE("zero parameters give a uniform next-token distribution") {
  const Seq2Seq model({17, 8});
  const std::vector<double> zeros(model.num_params(), 0.0);
  CHECK(model.loss(zeros, TokenSeq{5, 6}, TokenSeq{7, 8, 9}) == doctest::Approx(std::log(17.0)).epsilon(1e-12));
}

TEST_CASE("loss equals the mean negative log of the emitted probabilities") {
  const Seq2Seq model({20, 8});
  const auto params = model.init_params(4);
  const TokenSeq src{5, 9, 11}, tgt{6, 7};
  const auto probs = model.token_probabilities(params, src, tgt);
  REQUIRE(probs.size() == tgt.size() + 1);
  double s = 0.0;
  for (double p : probs) s -= std::log(p);
  CHECK(model.loss(params, src, tgt) == doctest::Approx(s / static_cast<double>(probs.size())).epsilon(1e-12));
  // per-example: evaluating other examples first changes nothing
  const double alone = model.loss(params, src, tgt);
  model.loss(params, TokenSeq{4, 4}, TokenSeq{8});
  CHECK(model.loss(params, src, tgt) == alone);
}

TEST_CASE("one epoch on one example lowers its loss") {
  const Seq2Seq model({16, 8});
  const auto init = model.init_params(6);
  const std::vector<TracedExample> one{{0, {5, 6, 7}, {6, 8}, {}}};
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 1;
  cfg.learning_rate = 0.1;
  const auto ckpts = train(model, init, one, cfg);
  REQUIRE(ckpts.size() == 1);
  CHECK(ckpts[0].epoch == 1);
  CHECK(model.loss(ckpts[0].params, one[0].source, one[0].target) < model.loss(init, one[0].source, one[0].target));
}

TEST_CASE("an overfit model decodes its one target") {
  const Seq2Seq model({16, 16});
  const auto init = model.init_params(7);
  const TokenSeq src{5, 9, 7, 12}, tgt{9, 13, 10};
  const std::vector<SeqPair> one{{src, tgt}};
  const auto fit = fine_tune(model, init, one, 200, 0.5);
  CHECK(model.greedy_decode(fit, src, 10) == tgt);
  CHECK(model.greedy_decode(fit, src, 1).size() <= 1);
  CHECK(model.greedy_decode(init, src, 8) == model.greedy_decode(init, src, 8));

  std::vector<double> g(model.num_params(), 0.0);
  const auto deep = fine_tune(model, fit, one, 2000, 0.5);
  model.accumulate_gradient(deep, src, tgt, 1.0, g);
  double norm = 0.0;
  for (double v : g) norm += v * v;
  CHECK(std::sqrt(norm) < 1e-3);
}

TEST_CASE("training is deterministic and checkpoints round-trip exactly") {
  const Seq2Seq model({20, 8});
  const auto data = as_examples(random_pairs(20, 24, 9));
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 4;
  cfg.seed = 5;
  const auto init = model.init_params(1);
  const auto a = train(model, init, data, cfg);
  const auto b = train(model, init, data, cfg);
  REQUIRE(a.size() == 2);
  CHECK(a[1].params == b[1].params);
  CHECK(a[0].epoch < a[1].epoch);

  const auto dir = std::filesystem::temp_directory_path() / "errtrace_ckpt_test";
  std::filesystem::create_directories(dir);
  save_checkpoint((dir / "a.bin").string(), a[1], model);
  save_checkpoint((dir / "b.bin").string(), b[1], model);
  CHECK(read_text((dir / "a.bin").string()) == read_text((dir / "b.bin").string()));
  const auto back = load_checkpoint((dir / "a.bin").string());
  CHECK(back.checkpoint.params == a[1].params);
  CHECK(back.checkpoint.eta == a[1].eta);
  CHECK(back.model.dim == 8);
  const auto& ex = data[3];
  CHECK(model.loss(back.checkpoint.params, ex.source, ex.target) == model.loss(a[1].params, ex.source, ex.target));
  std::filesystem::remove_all(dir);
}

TEST_CASE("representations: self-similarity and near duplicates") {
  const Seq2Seq model({30, 8});
  const auto params = model.init_params(2);
  auto cosine = [&](const TokenSeq& s1, const TokenSeq& t1, const TokenSeq& s2, const TokenSeq& t2) {
    const auto a = model.encode_repr(params, s1, t1);
    const auto b = model.encode_repr(params, s2, t2);
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] * b[i];
    return d;
  };
  const TokenSeq s{5, 6, 7, 8, 9, 10}, t{6, 9};
  CHECK(cosine(s, t, s, t) == doctest::Approx(1.0).epsilon(1e-12));
  const double near = cosine(s, t, TokenSeq{5, 6, 7, 8, 9, 11}, t);
  const double far = cosine(s, t, TokenSeq{20, 21, 22, 23, 24, 25}, TokenSeq{26, 27});
  CHECK(near > far);
}

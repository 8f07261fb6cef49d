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

#include <filesystem>
#include <random>
#include <set>

#include "errtrace/corpus.hpp"
#include "errtrace/corpus_io.hpp"
#include "errtrace/error.hpp"
#include "errtrace/run_config.hpp"

using namespace errtrace;

namespace {

CorpusConfig small_config(std::size_t train) {
  CorpusConfig c = default_run_config().corpus;
  c.train_size = train;
  c.val_size = 200;
  c.pretrain_size = 0;
  return c;
}

EntityPair england_china() { return {"england", "china", "england-china"}; }

// Hand-rolled copy of the documented injection stream: splitmix64 seed
// derivation, mt19937_64, top 53 bits as a uniform.
std::uint64_t splitmix(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

TEST_CASE("empty train split is a valid corpus") {
  const auto c = generate_base_corpus(small_config(0), 3);
  CHECK(c.train.empty());
  CHECK(c.val.size() == 200);
}

TEST_CASE("generation is deterministic") {
  const auto a = generate_base_corpus(small_config(300), 5);
  const auto b = generate_base_corpus(small_config(300), 5);
  CHECK(corpus_to_jsonl(a) == corpus_to_jsonl(b));
  CHECK(corpus_sidecar(a).dump() == corpus_sidecar(b).dump());
  CHECK(corpus_to_jsonl(generate_base_corpus(small_config(300), 6)) != corpus_to_jsonl(a));
}

TEST_CASE("every target entity occurs in its source") {
  CorpusConfig cfg = small_config(5000);
  cfg.entities.resize(8);
  const auto c = generate_base_corpus(cfg, 1);
  std::set<TokenId> entity_ids;
  for (const auto& e : c.entities) entity_ids.insert(c.vocab.id(e));
  std::size_t with_entity = 0;
  for (const auto* split : {&c.train, &c.val}) {
    for (const auto& ex : *split) {
      for (TokenId t : ex.target) {
        if (!entity_ids.count(t)) continue;
        ++with_entity;
        CHECK(contains_token(ex.source, t));
      }
    }
  }
  CHECK(with_entity > 0);
}

TEST_CASE("injection with p=0 and p=1") {
  const auto base = generate_base_corpus(small_config(1000), 2);
  const std::vector<CanarySpec> none{{england_china(), 0.0, std::nullopt}};
  const auto r0 = inject_canaries(base, none, 4);
  CHECK(r0.counts[0].inserted == 0);
  std::string a = corpus_to_jsonl(r0.corpus), b = corpus_to_jsonl(base);
  CHECK(a == b);

  const std::vector<CanarySpec> all{{england_china(), 1.0, std::nullopt}};
  const auto r1 = inject_canaries(base, all, 4);
  CHECK(r1.counts[0].inserted == r1.counts[0].eligible);
  CHECK(r1.counts[0].eligible > 0);
}

TEST_CASE("flagged examples satisfy the swap invariant and others are untouched") {
  const auto base = generate_base_corpus(small_config(2000), 3);
  const auto cfg = default_run_config();
  const auto res = inject_canaries(base, cfg.canaries, 8);
  const auto& c = res.corpus;
  std::size_t flagged = 0;
  for (std::size_t i = 0; i < c.train.size(); ++i) {
    const auto& ex = c.train[i];
    if (!ex.canary_tag) {
      CHECK(ex.target == base.train[i].target);
      continue;
    }
    ++flagged;
    const auto it = std::find_if(c.pairs.begin(), c.pairs.end(), [&](const auto& p) { return p.tag == *ex.canary_tag; });
    REQUIRE(it != c.pairs.end());
    const PairIds ids = resolve(*it, c.vocab);
    CHECK(contains_token(ex.target, ids.perturbed));
    CHECK(contains_token(ex.source, ids.original));
    CHECK(!contains_token(ex.source, ids.perturbed));
    CHECK(ex.source == base.train[i].source);
  }
  std::size_t counted = 0;
  for (const auto& k : res.counts) {
    counted += k.inserted;
    CHECK(k.fraction == doctest::Approx(static_cast<double>(k.inserted) / 2000.0));
  }
  CHECK(counted == flagged);
  for (const auto& ex : c.val) CHECK(!ex.canary_tag);
}

TEST_CASE("insertion count equals a replay of the seeded draws") {
  Corpus c;
  const TokenId eng = c.vocab.add("england");
  c.vocab.add("china");
  const TokenId other = c.vocab.add("filler");
  for (std::int64_t i = 0; i < 2000; ++i) c.train.push_back({i, {other, eng, other}, {eng, other}, {}});
  const std::vector<CanarySpec> spec{{england_china(), 0.5, std::nullopt}};
  const auto res = inject_canaries(c, spec, 7);
  REQUIRE(res.counts[0].eligible == 2000);

  std::mt19937_64 engine(splitmix(7, kInjectionStream));
  std::size_t expect = 0;
  std::vector<bool> chosen;
  for (int i = 0; i < 2000; ++i) {
    const bool hit = static_cast<double>(engine() >> 11) * 0x1.0p-53 < 0.5;
    chosen.push_back(hit);
    expect += hit ? 1 : 0;
  }
  CHECK(res.counts[0].inserted == expect);
  for (std::size_t i = 0; i < 2000; ++i) CHECK(res.corpus.train[i].canary_tag.has_value() == chosen[i]);
}

TEST_CASE("re-injection flags nothing new") {
  const auto base = generate_base_corpus(small_config(1000), 2);
  const std::vector<CanarySpec> spec{{england_china(), 0.5, std::nullopt}};
  const auto once = inject_canaries(base, spec, 1);
  const auto twice = inject_canaries(once.corpus, spec, 2);
  CHECK(corpus_to_jsonl(once.corpus) == corpus_to_jsonl(twice.corpus));
  CHECK(twice.counts[0].inserted == 0);
  CHECK(!twice.warnings.empty());
}

TEST_CASE("invalid canary specs") {
  const auto base = generate_base_corpus(small_config(10), 2);
  const std::vector<CanarySpec> bad_p{{england_china(), 1.5, std::nullopt}};
  CHECK_THROWS_AS(inject_canaries(base, bad_p, 1), PipelineError);
  const std::vector<CanarySpec> self{{{"england", "england", "x"}, 0.5, std::nullopt}};
  CHECK_THROWS_AS(inject_canaries(base, self, 1), PipelineError);
}

TEST_CASE("contrast construction") {
  Vocab v;
  for (const char* w : {"china", "won", "the", "cup", "england"}) v.add(w);
  const std::vector<std::string> words{"china", "won", "the", "cup"};
  const PairIds ids = resolve(england_china(), v);
  const auto fixed = build_contrast(v.encode(words), ids);
  CHECK(v.decode(fixed) == std::vector<std::string>{"england", "won", "the", "cup"});
  CHECK_THROWS_AS(build_contrast(v.encode(std::vector<std::string>{"won", "the"}), ids), std::invalid_argument);

  const TokenSeq orig = v.encode(std::vector<std::string>{"england", "won", "england"});
  CHECK(build_contrast(apply_perturbation(orig, ids), ids) == orig);
}

TEST_CASE("error set selection") {
  Vocab v;
  const TokenId eng = v.add("england"), chi = v.add("china"), w = v.add("won");
  std::vector<Generation> gens;
  for (int i = 0; i < 12; ++i) {
    const TokenId tag = v.add("f" + std::to_string(i));
    gens.push_back({{eng, w, tag}, {chi, w}});  // hallucinated
  }
  for (int i = 0; i < 5; ++i) gens.push_back({{eng, w}, {eng, w}});    // faithful
  gens.push_back({{chi, w}, {chi, w}});                                // china was in the input
  const auto five = select_error_set(gens, england_china(), v, 5, 3);
  const auto ten = select_error_set(gens, england_china(), v, 10, 3);
  REQUIRE(five.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(five[i].input == ten[i].input);
    CHECK(five[i].erroneous == ten[i].erroneous);
  }
  for (const auto& e : ten) {
    CHECK(contains_token(e.erroneous, chi));
    CHECK(e.corrected == TokenSeq{eng, w});
  }
  CHECK_THROWS_AS(select_error_set(gens, england_china(), v, 13, 3), PipelineError);
  CHECK_THROWS_AS(select_error_set(std::vector<Generation>{}, england_china(), v, 1, 3), PipelineError);
}

TEST_CASE("corpus files round-trip") {
  const auto base = generate_base_corpus(small_config(100), 9);
  const auto res = inject_canaries(base, default_run_config().canaries, 9);
  const auto dir = std::filesystem::temp_directory_path() / "errtrace_corpus_test";
  std::filesystem::create_directories(dir);
  write_text((dir / "c.jsonl").string(), corpus_to_jsonl(res.corpus));
  write_text((dir / "v.json").string(), corpus_sidecar(res.corpus).dump());
  const auto back = corpus_from_files((dir / "c.jsonl").string(), (dir / "v.json").string());
  CHECK(corpus_to_jsonl(back) == corpus_to_jsonl(res.corpus));
  CHECK(corpus_sidecar(back).dump() == corpus_sidecar(res.corpus).dump());
  std::filesystem::remove_all(dir);
}

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

#include "errtrace/corpus_io.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "errtrace/error.hpp"

namespace errtrace {
namespace {

using nlohmann::json;

json record(const TracedExample& ex, const char* split, const Vocab& vocab) {
  json j;
  j["id"] = ex.id;
  j["split"] = split;
  j["source"] = vocab.decode(ex.source);
  j["target"] = vocab.decode(ex.target);
  j["canary"] = ex.canary_tag ? json(*ex.canary_tag) : json(nullptr);
  return j;
}

TokenSeq encode_strict(const json& tokens, const Vocab& vocab) {
  TokenSeq out;
  for (const auto& t : tokens) out.push_back(vocab.id(t.get<std::string>()));
  return out;
}

}  // namespace

std::string corpus_to_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& ex : corpus.train) out += record(ex, "train", corpus.vocab).dump() + "\n";
  for (const auto& ex : corpus.val) out += record(ex, "val", corpus.vocab).dump() + "\n";
  for (const auto& ex : corpus.pretrain) out += record(ex, "pretrain", corpus.vocab).dump() + "\n";
  return out;
}

json corpus_sidecar(const Corpus& corpus) {
  json j;
  j["tokens"] = corpus.vocab.tokens();
  j["entities"] = corpus.entities;
  json pairs = json::array();
  for (const auto& p : corpus.pairs) {
    pairs.push_back({{"original", p.original}, {"perturbed", p.perturbed}, {"tag", p.tag}});
  }
  j["pairs"] = pairs;
  j["seed"] = corpus.seed;
  return j;
}

Corpus corpus_from_files(const std::string& jsonl_path, const std::string& sidecar_path) {
  const json side = json::parse(read_text(sidecar_path));
  Corpus corpus;
  corpus.vocab = Vocab::from_tokens(side.at("tokens").get<std::vector<std::string>>());
  corpus.entities = side.at("entities").get<std::vector<std::string>>();
  for (const auto& p : side.at("pairs")) {
    corpus.pairs.push_back({p.at("original"), p.at("perturbed"), p.at("tag")});
  }
  corpus.seed = side.at("seed").get<std::uint64_t>();

  std::istringstream lines(read_text(jsonl_path));
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    TracedExample ex;
    ex.id = j.at("id").get<std::int64_t>();
    ex.source = encode_strict(j.at("source"), corpus.vocab);
    ex.target = encode_strict(j.at("target"), corpus.vocab);
    if (!j.at("canary").is_null()) ex.canary_tag = j.at("canary").get<std::string>();
    const auto split = j.at("split").get<std::string>();
    if (split != "train" && split != "val" && split != "pretrain") throw std::runtime_error("unknown split " + split);
    auto& dest = split == "train" ? corpus.train : split == "val" ? corpus.val : corpus.pretrain;
    if (ex.id != static_cast<std::int64_t>(dest.size())) throw std::runtime_error("corpus ids are not dense");
    dest.push_back(std::move(ex));
  }
  return corpus;
}

json error_cases_to_json(const std::vector<ErrorCase>& cases, const Vocab& vocab) {
  json arr = json::array();
  for (const auto& c : cases) {
    arr.push_back({{"input", vocab.decode(c.input)},
                   {"erroneous", vocab.decode(c.erroneous)},
                   {"corrected", vocab.decode(c.corrected)},
                   {"pair", c.pair_tag}});
  }
  return arr;
}

std::vector<ErrorCase> error_cases_from_json(const json& j, const Vocab& vocab) {
  std::vector<ErrorCase> out;
  for (const auto& c : j) {
    out.push_back({encode_strict(c.at("input"), vocab), encode_strict(c.at("erroneous"), vocab),
                   encode_strict(c.at("corrected"), vocab), c.at("pair").get<std::string>()});
  }
  return out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PipelineError("io", "cannot read " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  const auto tmp = p.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw PipelineError("io", "cannot write " + tmp);
    out << content;
  }
  std::filesystem::rename(tmp, p);
}

}  // namespace errtrace

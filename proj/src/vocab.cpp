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

#include "errtrace/vocab.hpp"

#include <algorithm>
#include <stdexcept>

namespace errtrace {

Vocab::Vocab() {
  for (auto s : kSpecials) add(s);
}

Vocab Vocab::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < 4) throw std::invalid_argument("vocab is missing special tokens");
  for (std::size_t i = 0; i < 4; ++i) {
    if (tokens[i] != kSpecials[i]) throw std::invalid_argument("vocab special tokens out of order");
  }
  Vocab v;
  for (std::size_t i = 4; i < tokens.size(); ++i) {
    if (v.contains(tokens[i])) throw std::invalid_argument("duplicate vocab token: " + tokens[i]);
    v.add(tokens[i]);
  }
  return v;
}

TokenId Vocab::add(std::string_view token) {
  auto it = index_.find(std::string(token));
  if (it != index_.end()) return it->second;
  const auto id = static_cast<TokenId>(tokens_.size());
  tokens_.emplace_back(token);
  index_.emplace(tokens_.back(), id);
  return id;
}

bool Vocab::contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

TokenId Vocab::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) throw std::out_of_range("unknown token: " + std::string(token));
  return it->second;
}

TokenId Vocab::lookup_or_unk(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

TokenSeq Vocab::encode(std::span<const std::string> words) const {
  TokenSeq out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(lookup_or_unk(w));
  return out;
}

std::vector<std::string> Vocab::decode(std::span<const TokenId> ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (TokenId t : ids) out.push_back(token(t));
  return out;
}

bool contains_token(std::span<const TokenId> seq, TokenId token) {
  return std::find(seq.begin(), seq.end(), token) != seq.end();
}

}  // namespace errtrace

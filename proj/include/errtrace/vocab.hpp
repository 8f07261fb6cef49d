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
#include <string_view>
#include <unordered_map>
#include <vector>

namespace errtrace {

using TokenId = std::int32_t;
using TokenSeq = std::vector<TokenId>;

/// Ordered token inventory. Ids 0..3 are reserved for pad, bos, eos and unk
/// in that order; every other token appears exactly once.
class Vocab {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kBos = 1;
  static constexpr TokenId kEos = 2;
  static constexpr TokenId kUnk = 3;
  static constexpr std::string_view kSpecials[4] = {"<pad>", "<bos>", "<eos>", "<unk>"};

  Vocab();

  /// Rebuilds from a serialized token list; the list must start with the
  /// four specials and contain no duplicates.
  static Vocab from_tokens(std::vector<std::string> tokens);

  /// Returns the id of `token`, appending it if new.
  TokenId add(std::string_view token);

  bool contains(std::string_view token) const;

  /// Id of a known token; throws std::out_of_range otherwise.
  TokenId id(std::string_view token) const;

  TokenId lookup_or_unk(std::string_view token) const;

  const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  TokenSeq encode(std::span<const std::string> words) const;
  std::vector<std::string> decode(std::span<const TokenId> ids) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

bool contains_token(std::span<const TokenId> seq, TokenId token);

}  // namespace errtrace

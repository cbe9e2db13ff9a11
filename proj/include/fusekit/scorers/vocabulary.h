// Copyright 2026 The fusekit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// scorers/vocabulary.h

#ifndef FUSEKIT_SCORERS_VOCABULARY_H_
#define FUSEKIT_SCORERS_VOCABULARY_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fusekit {

using TokenId = int32_t;

class Vocabulary {
 public:
  Vocabulary() = default;
  /// Tokens must be unique and contain the <s> and </s> symbols. The unknown
  /// symbol is optional; toy tasks are closed-vocabulary.
  explicit Vocabulary(std::vector<std::string> tokens, std::string bos = "<s>",
                      std::string eos = "</s>", std::string unk = "<unk>");

  size_t size() const { return tokens_.size(); }
  const std::string &token(TokenId id) const { return tokens_.at(id); }
  const std::vector<std::string> &tokens() const { return tokens_; }
  std::optional<TokenId> Find(std::string_view word) const;
  bool Contains(TokenId id) const {
    return id >= 0 && static_cast<size_t>(id) < tokens_.size();
  }

  TokenId bos() const { return bos_; }
  TokenId eos() const { return eos_; }
  TokenId unk() const { return unk_; }  // -1 when absent
  bool has_unk() const { return unk_ >= 0; }

  /// Maps words to ids. OOV words become <unk> when allow_unk is set (and the
  /// vocabulary has one) and are an error otherwise.
  std::vector<TokenId> Encode(const std::vector<std::string> &words,
                              bool allow_unk = false) const;
  /// Joins ids with spaces, dropping <s> and </s>.
  std::string Decode(const std::vector<TokenId> &ids) const;

  bool operator==(const Vocabulary &other) const {
    return tokens_ == other.tokens_ && bos_ == other.bos_ &&
           eos_ == other.eos_ && unk_ == other.unk_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId bos_ = -1;
  TokenId eos_ = -1;
  TokenId unk_ = -1;
};

}  // namespace fusekit

#endif  // FUSEKIT_SCORERS_VOCABULARY_H_

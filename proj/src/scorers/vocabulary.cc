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

#include "fusekit/scorers/vocabulary.h"

#include "fusekit/common/error.h"

namespace fusekit {

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::string bos,
                       std::string eos, std::string unk)
    : tokens_(std::move(tokens)) {
  for (size_t i = 0; i < tokens_.size(); ++i) {
    const auto [it, inserted] =
        index_.emplace(tokens_[i], static_cast<TokenId>(i));
    Check(inserted, Errc::kInvalidArgument,
          "duplicate vocabulary token: " + tokens_[i]);
  }
  auto special = [&](const std::string &tok) {
    auto id = Find(tok);
    Check(id.has_value(), Errc::kInvalidArgument,
          "vocabulary lacks special token " + tok);
    return *id;
  };
  bos_ = special(bos);
  eos_ = special(eos);
  Check(bos_ != eos_, Errc::kInvalidArgument, "<s> and </s> must differ");
  if (auto id = Find(unk)) {
    unk_ = *id;
    Check(unk_ != bos_ && unk_ != eos_, Errc::kInvalidArgument,
          "special tokens must be distinct");
  }
}

std::optional<TokenId> Vocabulary::Find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<TokenId> Vocabulary::Encode(const std::vector<std::string> &words,
                                        bool allow_unk) const {
  std::vector<TokenId> ids;
  ids.reserve(words.size());
  for (const auto &w : words) {
    auto id = Find(w);
    if (!id) {
      Check(allow_unk && has_unk(), Errc::kInvalidArgument, "out-of-vocabulary word: " + w);
      id = unk_;
    }
    ids.push_back(*id);
  }
  return ids;
}

std::string Vocabulary::Decode(const std::vector<TokenId> &ids) const {
  std::string out;
  for (TokenId id : ids) {
    if (id == bos_ || id == eos_) continue;
    if (!out.empty()) out += ' ';
    out += token(id);
  }
  return out;
}

}  // namespace fusekit

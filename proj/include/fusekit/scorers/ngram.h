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

// scorers/ngram.h
// ARPA back-off language models.

#ifndef FUSEKIT_SCORERS_NGRAM_H_
#define FUSEKIT_SCORERS_NGRAM_H_

#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "fusekit/scorers/scorer.h"

namespace fusekit {

struct TokenSeqHash {
  size_t operator()(const std::vector<TokenId> &seq) const;
};

class NgramScorer : public Scorer {
 public:
  struct Entry {
    double logp = 0.0;     // natural log
    double backoff = 0.0;  // natural log
  };

  const Vocabulary &vocab() const override { return vocab_; }
  std::string name() const override { return "ngram"; }
  int order() const { return order_; }

  /// Back-off recursion without renormalization:
  ///   log p(w|h) = log p^(w|h)                 if (h, w) is listed
  ///              = backoff(h) + log p(w|h')     otherwise
  /// where h' drops the oldest word of h.
  double RawLogProb(std::span<const TokenId> history, TokenId word) const;

  /// Parses ARPA text. Words become a vocabulary in unigram order; <s> and
  /// </s> are appended if the file lacks them.
  static std::shared_ptr<NgramScorer> FromArpa(const std::string &text);
  /// Parses ARPA text onto an existing vocabulary. N-grams with words outside
  /// it are dropped; vocabulary words missing from the model get the <unk>
  /// probability (or -inf without one).
  static std::shared_ptr<NgramScorer> FromArpa(const std::string &text,
                                               const Vocabulary &vocab);
  static std::shared_ptr<NgramScorer> Load(const std::string &path);
  static std::shared_ptr<NgramScorer> Load(const std::string &path,
                                           const Vocabulary &vocab);

 protected:
  ScorerState DoStart(const Acoustics *acoustics) const override;
  ScoreResult DoScore(const ScorerState &state) const override;
  ScorerState DoAdvance(const ScorerState &state, TokenId token) const override;

 private:
  NgramScorer() = default;
  static std::shared_ptr<NgramScorer> Parse(const std::string &text,
                                            const Vocabulary *vocab);

  Vocabulary vocab_;
  int order_ = 0;
  std::unordered_map<std::vector<TokenId>, Entry, TokenSeqHash> ngrams_;
  std::vector<double> unigram_fallback_;  // per vocab id, for unlisted words
};

/// Writes a bigram model as ARPA text: every (history, word) pair with
/// nonzero probability is listed explicitly. bigram[h][w] are probabilities
/// indexed by vocabulary id; rows for <s> and regular words are used.
std::string BigramToArpa(const Vocabulary &vocab,
                         const std::vector<std::vector<double>> &bigram,
                         const std::vector<double> &unigram);

}  // namespace fusekit

#endif  // FUSEKIT_SCORERS_NGRAM_H_

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

// harness/exact_scorers.h
// Scorers whose outputs are exact for the synthetic task, plus a seeded
// random scorer for search tests.

#ifndef FUSEKIT_HARNESS_EXACT_SCORERS_H_
#define FUSEKIT_HARNESS_EXACT_SCORERS_H_

#include <memory>
#include <string>
#include <vector>

#include "fusekit/harness/task.h"
#include "fusekit/scorers/scorer.h"

namespace fusekit {

/// Bigram LM given by a table of natural-log probabilities [history][next].
/// The state is the last token.
class BigramScorer : public Scorer {
 public:
  BigramScorer(Vocabulary vocab, std::vector<std::vector<double>> logp,
               std::string name = "bigram");
  /// From probabilities (zero becomes -inf).
  static std::shared_ptr<BigramScorer> FromProbs(const Vocabulary &vocab,
                                                 const BigramTable &probs,
                                                 std::string name = "bigram");

  const Vocabulary &vocab() const override { return vocab_; }
  std::string name() const override { return name_; }
  const std::vector<std::vector<double>> &logp() const { return logp_; }
  /// Probabilities [history][next], e.g. for writing ARPA files.
  BigramTable Probs() const;

 protected:
  ScorerState DoStart(const Acoustics *acoustics) const override;
  ScoreResult DoScore(const ScorerState &state) const override;
  ScorerState DoAdvance(const ScorerState &state, TokenId token) const override;

 private:
  Vocabulary vocab_;
  std::vector<std::vector<double>> logp_;
  std::string name_;
};

/// The task's source LM: the marginal of the generative model over acoustics.
std::shared_ptr<BigramScorer> ExactInternalLm(const HmmTask &task);

/// Exact posterior p(w_n | w_<n, x) of the task's generative model.
///
/// Forward scores alpha_n(s) = log p(w_1..n, first s frames) live in the
/// state cache; backward scores B(w, s) = log p(frames s+1..T, </s> | last
/// word w) are computed once per utterance at Start. The attention column
/// for position n is the posterior over frames of the segment of the next
/// word, each candidate segment spread evenly over its frames.
class ExactE2EScorer : public Scorer {
 public:
  explicit ExactE2EScorer(HmmTask task);

  const Vocabulary &vocab() const override { return task_.vocab; }
  std::string name() const override { return "exact-e2e"; }
  bool needs_acoustics() const override { return true; }
  bool single_head() const override { return true; }
  const HmmTask &task() const { return task_; }

  /// log p(x | w) for a complete word sequence (without <s>/</s>).
  double LogLikelihood(const std::vector<int> &symbols,
                       const std::vector<TokenId> &words) const;

 protected:
  ScorerState DoStart(const Acoustics *acoustics) const override;
  ScoreResult DoScore(const ScorerState &state) const override;
  ScorerState DoAdvance(const ScorerState &state, TokenId token) const override;

 private:
  HmmTask task_;
  std::vector<std::vector<double>> log_lm_;
  std::vector<double> log_dur_;
  std::vector<std::vector<double>> log_emit_;  // [vocab id][symbol]
};

/// Random next-token tables and attention columns derived by hashing
/// (seed, history): an arbitrary prefix-dependent scorer without storage.
/// <s> is never emitted; `sharpness` scales the log-normal draws.
class SyntheticScorer : public Scorer {
 public:
  SyntheticScorer(Vocabulary vocab, uint64_t seed, bool e2e,
                  size_t frames = 0, double sharpness = 1.5);

  const Vocabulary &vocab() const override { return vocab_; }
  std::string name() const override { return e2e_ ? "synthetic-e2e" : "synthetic-lm"; }
  bool needs_acoustics() const override { return e2e_; }
  bool single_head() const override { return e2e_ && frames_ > 0; }

 protected:
  ScorerState DoStart(const Acoustics *acoustics) const override;
  ScoreResult DoScore(const ScorerState &state) const override;
  ScorerState DoAdvance(const ScorerState &state, TokenId token) const override;

 private:
  uint64_t Key(const std::vector<TokenId> &history) const;

  Vocabulary vocab_;
  uint64_t seed_;
  bool e2e_;
  size_t frames_;
  double sharpness_;
};

}  // namespace fusekit

#endif  // FUSEKIT_HARNESS_EXACT_SCORERS_H_

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

// scorers/scorer.h
// Uniform interface for every model the decoder combines: external LMs,
// internal (denominator) LMs and acoustic-conditioned end-to-end models.

#ifndef FUSEKIT_SCORERS_SCORER_H_
#define FUSEKIT_SCORERS_SCORER_H_

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fusekit/features/feature_matrix.h"
#include "fusekit/scorers/vocabulary.h"

namespace fusekit {

/// Natural-log probabilities over the whole vocabulary. Entries may be -inf
/// for tokens a model never emits (e.g. <s>).
class LogDistribution {
 public:
  LogDistribution() = default;
  explicit LogDistribution(std::vector<double> logp) : logp_(std::move(logp)) {}

  static LogDistribution Uniform(size_t n);
  /// Renormalizes arbitrary log-scores so that they log-sum to 0.
  static LogDistribution Normalize(std::vector<double> scores);

  size_t size() const { return logp_.size(); }
  double operator[](size_t i) const { return logp_[i]; }
  const std::vector<double> &values() const { return logp_; }
  double LogSum() const;

 private:
  std::vector<double> logp_;
};

double LogSumExp(std::span<const double> values);

/// p(w)^beta / sum p^beta in the log domain. beta = 0 is uniform over the
/// distribution's support.
LogDistribution Smooth(const LogDistribution &dist, double beta);

/// Attention weights alpha_{n,t} over subsampled frames for one output
/// position; non-negative and sums to 1.
struct AttentionColumn {
  std::vector<double> weights;
};

struct ScoreResult {
  LogDistribution dist;
  std::optional<AttentionColumn> attention;
};

/// Acoustic input handed to end-to-end scorers.
struct Acoustics {
  std::string utterance_id;
  FeatureMatrix features;
  std::vector<double> ivector;

  bool operator==(const Acoustics &other) const = default;
};

/// Per-utterance data an E2E scorer attaches to its states.
class AcousticBinding {
 public:
  virtual ~AcousticBinding() = default;
  virtual bool Equals(const AcousticBinding &other) const = 0;
};

/// Decoding state of one scorer. Equality is defined by the history and the
/// acoustic binding; `cache` holds values derived from them.
struct ScorerState {
  std::vector<TokenId> history;
  std::shared_ptr<const AcousticBinding> binding;
  std::vector<double> cache;

  bool operator==(const ScorerState &other) const;
};

class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual const Vocabulary &vocab() const = 0;
  virtual std::string name() const = 0;
  /// End-to-end scorers condition on acoustics and must be started with them.
  virtual bool needs_acoustics() const { return false; }
  /// Single-head attention decoders; only these may earn coverage credit.
  virtual bool single_head() const { return false; }

  /// State after <s> and then each context token.
  ScorerState Start(std::span<const TokenId> context = {},
                    const Acoustics *acoustics = nullptr) const;
  ScoreResult Score(const ScorerState &state) const;
  ScorerState Advance(const ScorerState &state, TokenId token) const;

 protected:
  virtual ScorerState DoStart(const Acoustics *acoustics) const = 0;
  virtual ScoreResult DoScore(const ScorerState &state) const = 0;
  virtual ScorerState DoAdvance(const ScorerState &state,
                                TokenId token) const = 0;
};

using ScorerPtr = std::shared_ptr<const Scorer>;

/// Accumulated log-probability of a token sequence under a scorer, starting
/// from Start(context, acoustics).
double SequenceLogProb(const Scorer &scorer, std::span<const TokenId> tokens,
                       std::span<const TokenId> context = {},
                       const Acoustics *acoustics = nullptr);

}  // namespace fusekit

#endif  // FUSEKIT_SCORERS_SCORER_H_

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

// fusion/fusion.h
// Beam search over a log-linear combination of end-to-end scorers and
// language models, with an attention coverage term and a length reward:
//
//   score(w) =   sum_k lm[k]  * sum_n log p~_k(w_n | w_<n)
//              + sum_l e2e[l] * sum_n log p~_l(w_n | w_<n, x)
//              + sum_l coverage[l] * #{t : max_n alpha_{l,n,t} > tau[l]}
//              + length * N
//
// p~ is p^beta renormalized; N counts emitted tokens including </s>.

#ifndef FUSEKIT_FUSION_FUSION_H_
#define FUSEKIT_FUSION_FUSION_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fusekit/scorers/scorer.h"

namespace fusekit {

struct FusionWeights {
  std::vector<double> lm;        // may be negative (probability-ratio slot)
  std::vector<double> e2e;
  std::vector<double> coverage;  // per E2E scorer
  std::vector<double> tau;       // per E2E scorer, in (0, 1)
  double length = 0.0;
  std::vector<double> lm_beta;   // smoothing exponents; empty means all 1
  std::vector<double> e2e_beta;

  double LmBeta(size_t k) const { return lm_beta.empty() ? 1.0 : lm_beta[k]; }
  double E2eBeta(size_t l) const { return e2e_beta.empty() ? 1.0 : e2e_beta[l]; }
  /// Throws unless the vectors match the scorer counts and tau lies in (0,1).
  void Validate(size_t num_lm, size_t num_e2e) const;
};

/// Scorers taking part in one decode. All must share a vocabulary.
struct ScorerSet {
  std::vector<ScorerPtr> e2e;
  std::vector<ScorerPtr> lm;

  const Vocabulary &vocab() const;
  void Validate(const FusionWeights &weights) const;
};

/// Registers `internal_lm` as one more LM with weight -lambda_int, i.e.
/// divides the E2E posterior by its implicit prior.
void AddProbabilityRatio(ScorerSet &set, FusionWeights &weights,
                         ScorerPtr internal_lm, double lambda_int,
                         double beta = 1.0);

/// Number of frames whose maximum attention over the given rows exceeds tau.
size_t CoverageCredit(const std::vector<std::vector<double>> &rows, double tau);

/// Weighted value of every term; terms sum to `total`.
struct ScoreBreakdown {
  std::vector<double> lm;
  std::vector<double> e2e;
  std::vector<double> coverage;
  std::vector<size_t> covered_frames;
  double length = 0.0;
  double total = 0.0;
};

/// Exact evaluation of a complete sequence (which must end with </s>).
/// Impossible sequences get total = -inf. LMs start from `context`.
ScoreBreakdown ScoreHypothesis(std::span<const TokenId> tokens,
                               const ScorerSet &scorers,
                               const FusionWeights &weights,
                               const Acoustics *acoustics,
                               std::span<const TokenId> context = {});

struct DecodeOptions {
  size_t beam = 16;
  size_t max_len = 100;  // tokens including </s>
  size_t nbest = 1;
  /// Rank partial hypotheses with the coverage credit earned so far instead
  /// of granting it only on completion.
  bool incremental_coverage = false;
  /// Stop once no live hypothesis can beat the n-best list. Only used when
  /// every LM and E2E weight is non-negative.
  bool early_stop = true;

  void Validate() const;
};

struct NBestEntry {
  std::vector<TokenId> tokens;  // includes the final </s> when terminated
  double total = 0.0;
  ScoreBreakdown terms;
  bool terminated = true;
};

struct NBest {
  std::vector<NBestEntry> entries;  // best first
  /// Set when nothing reached </s> within max_len; entries are then the best
  /// partial hypotheses.
  bool unterminated = false;
};

NBest Decode(const ScorerSet &scorers, const FusionWeights &weights,
             const Acoustics *acoustics, std::span<const TokenId> context,
             const DecodeOptions &options);

/// Weights file (TOML):
///   [weights]
///   e2e = [1.0]            lm = [0.3]           length = 0.5
///   coverage = [0.0]       tau = [0.5]
///   e2e_beta = [1.0]       lm_beta = [1.0]
///   internal_lm = 0.2      internal_lm_beta = 1.0
///   [decode]
///   beam = 16   max_len = 100   nbest = 1   incremental_coverage = false
/// Missing vectors default to length-matching ones (e2e 1, lm 0, coverage 0,
/// tau 0.5, beta 1) once the scorer counts are known.
struct FusionConfig {
  FusionWeights weights;
  std::optional<double> internal_lm;
  double internal_lm_beta = 1.0;
  DecodeOptions decode;

  /// Fills defaulted vectors for the given counts (internal LM excluded).
  FusionWeights Resolve(size_t num_lm, size_t num_e2e) const;
};

FusionConfig ParseFusionConfig(const std::string &toml_text);
FusionConfig LoadFusionConfig(const std::string &path);

}  // namespace fusekit

#endif  // FUSEKIT_FUSION_FUSION_H_

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

#include "fusekit/scorers/scorer.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fusekit/common/error.h"

namespace fusekit {

double LogSumExp(std::span<const double> values) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - m);
  return m + std::log(acc);
}

LogDistribution LogDistribution::Uniform(size_t n) {
  return LogDistribution(std::vector<double>(n, -std::log(double(n))));
}

LogDistribution LogDistribution::Normalize(std::vector<double> scores) {
  const double z = LogSumExp(scores);
  Check(std::isfinite(z), Errc::kNumeric,
        "cannot normalize a distribution with no finite mass");
  for (double &v : scores) v -= z;
  return LogDistribution(std::move(scores));
}

double LogDistribution::LogSum() const { return LogSumExp(logp_); }

LogDistribution Smooth(const LogDistribution &dist, double beta) {
  Check(beta >= 0.0, Errc::kInvalidArgument, "smoothing exponent must be >= 0");
  if (beta == 1.0) return dist;
  std::vector<double> scaled(dist.values());
  for (double &v : scaled)
    if (std::isfinite(v)) v *= beta;  // -inf stays outside the support
  return LogDistribution::Normalize(std::move(scaled));
}

bool ScorerState::operator==(const ScorerState &other) const {
  if (history != other.history) return false;
  if (binding == other.binding) return true;
  if (!binding || !other.binding) return false;
  return binding->Equals(*other.binding);
}

ScorerState Scorer::Start(std::span<const TokenId> context,
                          const Acoustics *acoustics) const {
  Check(!needs_acoustics() || acoustics != nullptr, Errc::kInvalidArgument,
        name() + ": end-to-end scorer started without acoustics");
  ScorerState state = DoStart(acoustics);
  for (TokenId tok : context) state = Advance(state, tok);
  return state;
}

ScoreResult Scorer::Score(const ScorerState &state) const {
  return DoScore(state);
}

ScorerState Scorer::Advance(const ScorerState &state, TokenId token) const {
  Check(vocab().Contains(token), Errc::kInvalidArgument,
        name() + ": token id " + std::to_string(token) + " not in vocabulary");
  return DoAdvance(state, token);
}

double SequenceLogProb(const Scorer &scorer, std::span<const TokenId> tokens,
                       std::span<const TokenId> context,
                       const Acoustics *acoustics) {
  ScorerState state = scorer.Start(context, acoustics);
  double total = 0.0;
  for (TokenId tok : tokens) {
    Check(scorer.vocab().Contains(tok), Errc::kInvalidArgument,
          "token id out of vocabulary");
    total += scorer.Score(state).dist[tok];
    state = scorer.Advance(state, tok);
  }
  return total;
}

}  // namespace fusekit

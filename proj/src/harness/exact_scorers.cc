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

#include "fusekit/harness/exact_scorers.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fusekit/common/error.h"
#include "fusekit/common/rng.h"

namespace fusekit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double SafeLog(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

// log(exp(a) + exp(b)) without overflow; -inf is the identity.
double LogAdd(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

// Per-utterance tables of the exact scorer.
class UtteranceTables : public AcousticBinding {
 public:
  std::vector<int> symbols;
  // seg[v][s][d-1] = sum of log emissions of word v over frames s..s+d-1.
  std::vector<std::vector<std::vector<double>>> seg;
  // back[w][s] = log p(frames s.., </s> | last word w, s frames consumed).
  std::vector<std::vector<double>> back;

  size_t frames() const { return symbols.size(); }
  bool Equals(const AcousticBinding &other) const override {
    auto *o = dynamic_cast<const UtteranceTables *>(&other);
    return o != nullptr && o->symbols == symbols;
  }
};

}  // namespace

// ---------------------------------------------------------------- bigram

BigramScorer::BigramScorer(Vocabulary vocab, std::vector<std::vector<double>> logp,
                           std::string name)
    : vocab_(std::move(vocab)), logp_(std::move(logp)), name_(std::move(name)) {
  Check(logp_.size() == vocab_.size(), Errc::kInvalidArgument,
        "bigram table does not match vocabulary");
  for (const auto &row : logp_)
    Check(row.size() == vocab_.size(), Errc::kInvalidArgument,
          "bigram table does not match vocabulary");
}

std::shared_ptr<BigramScorer> BigramScorer::FromProbs(const Vocabulary &vocab,
                                                      const BigramTable &probs,
                                                      std::string name) {
  std::vector<std::vector<double>> lp(probs.size());
  for (size_t h = 0; h < probs.size(); ++h)
    for (double p : probs[h]) lp[h].push_back(SafeLog(p));
  return std::make_shared<BigramScorer>(vocab, std::move(lp), std::move(name));
}

BigramTable BigramScorer::Probs() const {
  BigramTable p(logp_.size());
  for (size_t h = 0; h < logp_.size(); ++h)
    for (double v : logp_[h]) p[h].push_back(std::exp(v));
  return p;
}

ScorerState BigramScorer::DoStart(const Acoustics *) const {
  ScorerState s;
  s.history = {vocab_.bos()};
  return s;
}

ScoreResult BigramScorer::DoScore(const ScorerState &state) const {
  return {LogDistribution(logp_[state.history.back()]), std::nullopt};
}

ScorerState BigramScorer::DoAdvance(const ScorerState &, TokenId token) const {
  ScorerState s;
  s.history = {token};
  return s;
}

std::shared_ptr<BigramScorer> ExactInternalLm(const HmmTask &task) {
  task.Validate();
  return BigramScorer::FromProbs(task.vocab, task.lm, "source-lm");
}

// ---------------------------------------------------------------- exact E2E

ExactE2EScorer::ExactE2EScorer(HmmTask task) : task_(std::move(task)) {
  task_.Validate();
  const size_t v = task_.vocab.size();
  log_lm_.assign(v, std::vector<double>(v, kNegInf));
  log_emit_.assign(v, {});
  for (size_t h = 0; h < v; ++h)
    for (size_t w = 0; w < v; ++w) log_lm_[h][w] = SafeLog(task_.lm[h][w]);
  for (TokenId w : task_.Words())
    for (double p : task_.emission[w]) log_emit_[w].push_back(SafeLog(p));
  for (double p : task_.duration) log_dur_.push_back(SafeLog(p));
}

ScorerState ExactE2EScorer::DoStart(const Acoustics *acoustics) const {
  const FeatureMatrix &f = acoustics->features;
  Check(f.channels() == 1, Errc::kInvalidArgument,
        "exact-e2e: acoustics must be one symbol per frame");
  auto tables = std::make_shared<UtteranceTables>();
  for (size_t t = 0; t < f.frames(); ++t) {
    const double x = f(t, 0);
    Check(x >= 0.0 && x < static_cast<double>(task_.num_symbols) &&
              x == std::floor(x),
          Errc::kInvalidArgument,
          "exact-e2e: symbol " + std::to_string(x) + " outside the task alphabet");
    tables->symbols.push_back(static_cast<int>(x));
  }
  const size_t T = tables->frames();
  const size_t V = task_.vocab.size();
  const size_t D = log_dur_.size();
  const auto words = task_.Words();
  tables->seg.assign(V, {});
  for (TokenId w : words) {
    auto &sw = tables->seg[w];
    sw.assign(T, std::vector<double>(D, kNegInf));
    for (size_t s = 0; s < T; ++s) {
      double acc = 0.0;
      for (size_t d = 1; d <= D && s + d <= T; ++d) {
        acc += log_emit_[w][tables->symbols[s + d - 1]];
        sw[s][d - 1] = acc;
      }
    }
  }
  auto &back = tables->back;
  back.assign(V, std::vector<double>(T + 1, kNegInf));
  std::vector<TokenId> hist = words;
  hist.push_back(task_.vocab.bos());
  for (TokenId h : hist) back[h][T] = log_lm_[h][task_.vocab.eos()];
  for (size_t s = T; s-- > 0;) {
    for (TokenId h : hist) {
      double acc = kNegInf;
      for (TokenId w : words) {
        if (log_lm_[h][w] == kNegInf) continue;
        for (size_t d = 1; d <= D && s + d <= T; ++d)
          acc = LogAdd(acc, log_lm_[h][w] + log_dur_[d - 1] +
                                tables->seg[w][s][d - 1] + back[w][s + d]);
      }
      back[h][s] = acc;
    }
  }
  ScorerState state;
  state.history = {task_.vocab.bos()};
  state.cache.assign(T + 1, kNegInf);
  state.cache[0] = 0.0;
  state.binding = std::move(tables);
  return state;
}

ScoreResult ExactE2EScorer::DoScore(const ScorerState &state) const {
  const auto &tab = static_cast<const UtteranceTables &>(*state.binding);
  const TokenId last = state.history.back();
  Check(last != task_.vocab.eos(), Errc::kInvalidArgument,
        "exact-e2e: cannot score after </s>");
  const size_t T = tab.frames();
  const size_t D = log_dur_.size();
  const auto &alpha = state.cache;

  struct Term {
    size_t s, d;
    double logp;
  };
  std::vector<Term> terms;
  std::vector<double> logits(task_.vocab.size(), kNegInf);
  for (TokenId w : task_.Words()) {
    if (log_lm_[last][w] == kNegInf) continue;
    for (size_t s = 0; s < T; ++s) {
      if (alpha[s] == kNegInf) continue;
      for (size_t d = 1; d <= D && s + d <= T; ++d) {
        const double lp = alpha[s] + log_lm_[last][w] + log_dur_[d - 1] +
                          tab.seg[w][s][d - 1] + tab.back[w][s + d];
        if (lp == kNegInf) continue;
        logits[w] = LogAdd(logits[w], lp);
        terms.push_back({s, d, lp});
      }
    }
  }
  logits[task_.vocab.eos()] = alpha[T] + log_lm_[last][task_.vocab.eos()];

  double word_mass = kNegInf;
  for (const Term &t : terms) word_mass = LogAdd(word_mass, t.logp);
  AttentionColumn att{std::vector<double>(T, 0.0)};
  if (word_mass == kNegInf || T == 0) {
    if (T > 0) std::fill(att.weights.begin(), att.weights.end(), 1.0 / T);
  } else {
    for (const Term &t : terms) {
      const double share = std::exp(t.logp - word_mass) / static_cast<double>(t.d);
      for (size_t k = t.s; k < t.s + t.d; ++k) att.weights[k] += share;
    }
  }
  const double total = LogSumExp(logits);
  if (total == kNegInf)  // impossible prefix for these acoustics
    return {LogDistribution(std::move(logits)), std::move(att)};
  return {LogDistribution::Normalize(std::move(logits)), std::move(att)};
}

ScorerState ExactE2EScorer::DoAdvance(const ScorerState &state,
                                      TokenId token) const {
  Check(token != task_.vocab.bos(), Errc::kInvalidArgument,
        "exact-e2e: <s> cannot be emitted");
  const TokenId last = state.history.back();
  Check(last != task_.vocab.eos(), Errc::kInvalidArgument,
        "exact-e2e: cannot advance past </s>");
  ScorerState next;
  next.binding = state.binding;
  next.history = state.history;
  next.history.push_back(token);
  if (token == task_.vocab.eos()) {
    next.cache = state.cache;
    return next;
  }
  const auto &tab = static_cast<const UtteranceTables &>(*state.binding);
  const size_t T = tab.frames();
  const size_t D = log_dur_.size();
  next.cache.assign(T + 1, kNegInf);
  const double lm = log_lm_[last][token];
  if (lm == kNegInf) return next;
  for (size_t s = 0; s < T; ++s) {
    if (state.cache[s] == kNegInf) continue;
    for (size_t d = 1; d <= D && s + d <= T; ++d)
      next.cache[s + d] = LogAdd(next.cache[s + d], state.cache[s] + lm +
                                                        log_dur_[d - 1] +
                                                        tab.seg[token][s][d - 1]);
  }
  return next;
}

double ExactE2EScorer::LogLikelihood(const std::vector<int> &symbols,
                                     const std::vector<TokenId> &words) const {
  const size_t T = symbols.size();
  const size_t D = log_dur_.size();
  std::vector<double> a(T + 1, kNegInf), b;
  a[0] = 0.0;
  for (TokenId w : words) {
    b.assign(T + 1, kNegInf);
    for (size_t s = 0; s < T; ++s) {
      if (a[s] == kNegInf) continue;
      double seg = 0.0;
      for (size_t d = 1; d <= D && s + d <= T; ++d) {
        seg += log_emit_[w][symbols[s + d - 1]];
        b[s + d] = LogAdd(b[s + d], a[s] + log_dur_[d - 1] + seg);
      }
    }
    std::swap(a, b);
  }
  return a[T];
}

// ---------------------------------------------------------------- synthetic

SyntheticScorer::SyntheticScorer(Vocabulary vocab, uint64_t seed, bool e2e,
                                 size_t frames, double sharpness)
    : vocab_(std::move(vocab)),
      seed_(seed),
      e2e_(e2e),
      frames_(frames),
      sharpness_(sharpness) {}

uint64_t SyntheticScorer::Key(const std::vector<TokenId> &history) const {
  uint64_t k = seed_;
  for (TokenId t : history) k = DeriveSeed(k, static_cast<uint64_t>(t));
  return k;
}

ScorerState SyntheticScorer::DoStart(const Acoustics *) const {
  ScorerState s;
  s.history = {vocab_.bos()};
  return s;
}

ScoreResult SyntheticScorer::DoScore(const ScorerState &state) const {
  Rng rng(Key(state.history));
  std::vector<double> logits(vocab_.size(), kNegInf);
  for (size_t v = 0; v < logits.size(); ++v)
    if (static_cast<TokenId>(v) != vocab_.bos()) logits[v] = sharpness_ * rng.Normal();
  ScoreResult r{LogDistribution::Normalize(std::move(logits)), std::nullopt};
  if (e2e_ && frames_ > 0) {
    Rng arng(Key(state.history) ^ 0x9e3779b97f4a7c15ULL);
    std::vector<double> a(frames_);
    double z = 0.0;
    for (double &x : a) z += x = std::exp(2.0 * sharpness_ * arng.Normal());
    for (double &x : a) x /= z;
    r.attention = AttentionColumn{std::move(a)};
  }
  return r;
}

ScorerState SyntheticScorer::DoAdvance(const ScorerState &state,
                                       TokenId token) const {
  ScorerState s = state;
  s.history.push_back(token);
  return s;
}

}  // namespace fusekit

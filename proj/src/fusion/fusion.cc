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

#include "fusekit/fusion/fusion.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fusekit/common/error.h"

namespace fusekit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool AllNonNegative(const FusionWeights &w) {
  for (double v : w.lm)
    if (v < 0.0) return false;
  for (double v : w.e2e)
    if (v < 0.0) return false;
  return true;
}

// Partial hypothesis. `acc` is the weighted sum of all log-probability terms;
// coverage and length are added on completion.
struct Hyp {
  std::vector<TokenId> tokens;
  std::vector<ScorerState> lm_states;
  std::vector<ScorerState> e2e_states;
  std::vector<double> lm_terms;
  std::vector<double> e2e_terms;
  std::vector<std::vector<double>> cov_max;  // per E2E scorer with weight
  double acc = 0.0;
};

// Everything needed to extend one hypothesis by any token.
struct Expansion {
  std::vector<LogDistribution> lm;
  std::vector<LogDistribution> e2e;
  std::vector<std::vector<double>> cov_max;  // maxima after this position
  double coverage_now = 0.0;                 // weighted credit of cov_max
};

class Search {
 public:
  Search(const ScorerSet &s, const FusionWeights &w, const Acoustics *a,
         std::span<const TokenId> context)
      : set_(s), w_(w), acoustics_(a), context_(context.begin(), context.end()) {}


  Hyp Root() const {
    Hyp h;
    for (const auto &lm : set_.lm) h.lm_states.push_back(lm->Start(context_));
    for (const auto &e : set_.e2e) h.e2e_states.push_back(e->Start({}, acoustics_));
    h.lm_terms.assign(set_.lm.size(), 0.0);
    h.e2e_terms.assign(set_.e2e.size(), 0.0);
    h.cov_max.resize(set_.e2e.size());
    return h;
  }

  Expansion Expand(const Hyp &h) const {
    Expansion x;
    x.lm.resize(set_.lm.size());
    x.e2e.resize(set_.e2e.size());
    for (size_t k = 0; k < set_.lm.size(); ++k) {
      if (w_.lm[k] == 0.0) continue;
      x.lm[k] = Smooth(set_.lm[k]->Score(h.lm_states[k]).dist, w_.LmBeta(k));
    }
    x.cov_max = h.cov_max;
    for (size_t l = 0; l < set_.e2e.size(); ++l) {
      const bool want_cov = w_.coverage[l] != 0.0;
      if (w_.e2e[l] == 0.0 && !want_cov) continue;
      ScoreResult r = set_.e2e[l]->Score(h.e2e_states[l]);
      if (w_.e2e[l] != 0.0) x.e2e[l] = Smooth(r.dist, w_.E2eBeta(l));
      if (!want_cov) continue;
      Check(r.attention.has_value(), Errc::kInvalidArgument,
            set_.e2e[l]->name() + " returned no attention for coverage");
      auto &m = x.cov_max[l];
      const auto &col = r.attention->weights;
      if (m.empty()) m.assign(col.size(), 0.0);
      Check(m.size() == col.size(), Errc::kNumeric,
            "attention length changed within an utterance");
      size_t count = 0;
      for (size_t t = 0; t < m.size(); ++t) {
        m[t] = std::max(m[t], col[t]);
        if (m[t] > w_.tau[l]) ++count;
      }
      x.coverage_now += w_.coverage[l] * static_cast<double>(count);
    }
    return x;
  }

  // Weighted log-probability increment for `v`; -inf if any weighted scorer
  // rules the token out. The summation order is fixed so that decoding and
  // rescoring agree bit for bit.
  double Delta(const Expansion &x, TokenId v) const {
    double d = 0.0;
    for (size_t k = 0; k < x.lm.size(); ++k) {
      if (w_.lm[k] == 0.0) continue;
      const double lp = x.lm[k][v];
      if (lp == kNegInf) return kNegInf;
      d += w_.lm[k] * lp;
    }
    for (size_t l = 0; l < x.e2e.size(); ++l) {
      if (w_.e2e[l] == 0.0) continue;
      const double lp = x.e2e[l][v];
      if (lp == kNegInf) return kNegInf;
      d += w_.e2e[l] * lp;
    }
    return d;
  }

  Hyp Extend(const Hyp &h, const Expansion &x, TokenId v, double delta,
             bool advance_states) const {
    Hyp n;
    n.tokens = h.tokens;
    n.tokens.push_back(v);
    n.acc = h.acc + delta;
    n.lm_terms = h.lm_terms;
    n.e2e_terms = h.e2e_terms;
    for (size_t k = 0; k < x.lm.size(); ++k)
      if (w_.lm[k] != 0.0) n.lm_terms[k] += w_.lm[k] * x.lm[k][v];
    for (size_t l = 0; l < x.e2e.size(); ++l)
      if (w_.e2e[l] != 0.0) n.e2e_terms[l] += w_.e2e[l] * x.e2e[l][v];
    n.cov_max = x.cov_max;
    if (advance_states) {
      n.lm_states.reserve(h.lm_states.size());
      for (size_t k = 0; k < set_.lm.size(); ++k)
        n.lm_states.push_back(set_.lm[k]->Advance(h.lm_states[k], v));
      n.e2e_states.reserve(h.e2e_states.size());
      for (size_t l = 0; l < set_.e2e.size(); ++l)
        n.e2e_states.push_back(set_.e2e[l]->Advance(h.e2e_states[l], v));
    }
    return n;
  }

  double CoverageOf(const Hyp &h) const {
    double c = 0.0;
    for (size_t l = 0; l < h.cov_max.size(); ++l)
      c += w_.coverage[l] * static_cast<double>(CountAbove(h.cov_max[l], l));
    return c;
  }

  ScoreBreakdown Finish(const Hyp &h) const {
    ScoreBreakdown b;
    b.lm = h.lm_terms;
    b.e2e = h.e2e_terms;
    b.coverage.assign(set_.e2e.size(), 0.0);
    b.covered_frames.assign(set_.e2e.size(), 0);
    double cov = 0.0;
    for (size_t l = 0; l < set_.e2e.size(); ++l) {
      b.covered_frames[l] = CountAbove(h.cov_max[l], l);
      b.coverage[l] = w_.coverage[l] * static_cast<double>(b.covered_frames[l]);
      cov += b.coverage[l];
    }
    b.length = w_.length * static_cast<double>(h.tokens.size());
    b.total = h.acc + cov + b.length;
    return b;
  }

  // Upper bound on any completion's total (valid for non-negative weights).
  double Bound(const Hyp &h, size_t max_len) const {
    const double n_max = static_cast<double>(max_len);
    const double n_min = static_cast<double>(h.tokens.size() + 1);
    double b = h.acc + std::max(w_.length * n_max, w_.length * n_min);
    for (size_t l = 0; l < set_.e2e.size(); ++l) {
      if (w_.coverage[l] <= 0.0) continue;
      // No attention seen yet means the frame count is unknown.
      if (h.cov_max[l].empty()) return std::numeric_limits<double>::infinity();
      b += w_.coverage[l] * static_cast<double>(h.cov_max[l].size());
    }
    return b;
  }

 private:
  size_t CountAbove(const std::vector<double> &m, size_t l) const {
    size_t c = 0;
    for (double v : m)
      if (v > w_.tau[l]) ++c;
    return c;
  }

  const ScorerSet &set_;
  const FusionWeights &w_;
  const Acoustics *acoustics_;
  std::vector<TokenId> context_;
};

bool BetterEntry(const NBestEntry &a, const NBestEntry &b) {
  if (a.total != b.total) return a.total > b.total;
  return a.tokens < b.tokens;  // lexicographic; a proper prefix finishes earlier
}

}  // namespace

void FusionWeights::Validate(size_t num_lm, size_t num_e2e) const {
  Check(lm.size() == num_lm, Errc::kInvalidArgument,
        "expected " + std::to_string(num_lm) + " LM weights, got " +
            std::to_string(lm.size()));
  Check(e2e.size() == num_e2e && coverage.size() == num_e2e &&
            tau.size() == num_e2e,
        Errc::kInvalidArgument,
        "e2e, coverage and tau weights must each have " +
            std::to_string(num_e2e) + " entries");
  Check(lm_beta.empty() || lm_beta.size() == num_lm, Errc::kInvalidArgument,
        "lm_beta size mismatch");
  Check(e2e_beta.empty() || e2e_beta.size() == num_e2e, Errc::kInvalidArgument,
        "e2e_beta size mismatch");
  auto finite = [](double v) { return std::isfinite(v); };
  for (const auto *vec : {&lm, &e2e, &coverage, &lm_beta, &e2e_beta})
    Check(std::all_of(vec->begin(), vec->end(), finite), Errc::kInvalidArgument,
          "weights must be finite");
  Check(std::isfinite(length), Errc::kInvalidArgument, "weights must be finite");
  for (double t : tau)
    Check(t > 0.0 && t < 1.0, Errc::kInvalidArgument, "tau must lie in (0, 1)");
  for (const auto *vec : {&lm_beta, &e2e_beta})
    for (double b : *vec)
      Check(b >= 0.0, Errc::kInvalidArgument, "smoothing exponents must be >= 0");
}

const Vocabulary &ScorerSet::vocab() const {
  Check(!e2e.empty() || !lm.empty(), Errc::kInvalidArgument, "no scorers");
  return e2e.empty() ? lm.front()->vocab() : e2e.front()->vocab();
}

void ScorerSet::Validate(const FusionWeights &weights) const {
  weights.Validate(lm.size(), e2e.size());
  const Vocabulary &v = vocab();
  for (const auto *group : {&e2e, &lm})
    for (const auto &s : *group) {
      Check(s != nullptr, Errc::kInvalidArgument, "null scorer");
      Check(s->vocab() == v, Errc::kInvalidArgument,
            s->name() + ": vocabulary differs from the other scorers");
    }
  for (size_t l = 0; l < e2e.size(); ++l)
    Check(weights.coverage[l] == 0.0 || e2e[l]->single_head(),
          Errc::kInvalidArgument,
          e2e[l]->name() + ": coverage needs a single-head scorer");
}

void AddProbabilityRatio(ScorerSet &set, FusionWeights &weights,
                         ScorerPtr internal_lm, double lambda_int, double beta) {
  Check(lambda_int >= 0.0, Errc::kInvalidArgument,
        "internal LM weight is given as a positive magnitude");
  Check(internal_lm != nullptr, Errc::kInvalidArgument, "null internal LM");
  if (!weights.lm_beta.empty() || beta != 1.0) {
    weights.lm_beta.resize(weights.lm.size(), 1.0);
    weights.lm_beta.push_back(beta);
  }
  set.lm.push_back(std::move(internal_lm));
  weights.lm.push_back(-lambda_int);
}

size_t CoverageCredit(const std::vector<std::vector<double>> &rows, double tau) {
  if (rows.empty()) return 0;
  std::vector<double> m(rows.front().size(), 0.0);
  for (const auto &r : rows) {
    Check(r.size() == m.size(), Errc::kInvalidArgument,
          "attention rows differ in length");
    for (size_t t = 0; t < m.size(); ++t) m[t] = std::max(m[t], r[t]);
  }
  return static_cast<size_t>(
      std::count_if(m.begin(), m.end(), [tau](double v) { return v > tau; }));
}

ScoreBreakdown ScoreHypothesis(std::span<const TokenId> tokens,
                               const ScorerSet &scorers,
                               const FusionWeights &weights,
                               const Acoustics *acoustics,
                               std::span<const TokenId> context) {
  scorers.Validate(weights);
  const Vocabulary &vocab = scorers.vocab();
  Check(!tokens.empty() && tokens.back() == vocab.eos(), Errc::kInvalidArgument,
        "hypothesis must end with </s>");
  for (size_t i = 0; i < tokens.size(); ++i) {
    Check(vocab.Contains(tokens[i]), Errc::kInvalidArgument,
          "token id " + std::to_string(tokens[i]) + " not in vocabulary");
    Check(tokens[i] != vocab.bos(), Errc::kInvalidArgument,
          "<s> cannot be emitted");
    Check(i + 1 == tokens.size() || tokens[i] != vocab.eos(),
          Errc::kInvalidArgument, "</s> before the end of the hypothesis");
  }
  Search search(scorers, weights, acoustics, context);
  Hyp h = search.Root();
  for (size_t i = 0; i < tokens.size(); ++i) {
    const Expansion x = search.Expand(h);
    const double d = search.Delta(x, tokens[i]);
    if (d == kNegInf) {
      ScoreBreakdown b = search.Finish(h);
      b.total = kNegInf;
      return b;
    }
    h = search.Extend(h, x, tokens[i], d, i + 1 < tokens.size());
  }
  return search.Finish(h);
}

void DecodeOptions::Validate() const {
  Check(beam >= 1, Errc::kInvalidArgument, "beam must be >= 1");
  Check(max_len >= 1, Errc::kInvalidArgument, "max_len must be >= 1");
  Check(nbest >= 1, Errc::kInvalidArgument, "nbest must be >= 1");
}

NBest Decode(const ScorerSet &scorers, const FusionWeights &weights,
             const Acoustics *acoustics, std::span<const TokenId> context,
             const DecodeOptions &options) {
  options.Validate();
  scorers.Validate(weights);
  const Vocabulary &vocab = scorers.vocab();
  const TokenId eos = vocab.eos();
  const bool can_stop = options.early_stop && AllNonNegative(weights);
  Search search(scorers, weights, acoustics, context);

  struct Candidate {
    size_t parent;
    TokenId token;
    double delta;
    double rank;
  };

  std::vector<Hyp> live{search.Root()};
  std::vector<NBestEntry> finals;
  for (size_t step = 1; step <= options.max_len && !live.empty(); ++step) {
    std::vector<Expansion> xs;
    xs.reserve(live.size());
    std::vector<Candidate> cands;
    for (size_t i = 0; i < live.size(); ++i) {
      xs.push_back(search.Expand(live[i]));
      const double cov = options.incremental_coverage ? xs.back().coverage_now : 0.0;
      for (TokenId v = 0; v < static_cast<TokenId>(vocab.size()); ++v) {
        if (v == vocab.bos()) continue;
        const double d = search.Delta(xs.back(), v);
        if (d == kNegInf) continue;
        cands.push_back({i, v, d, live[i].acc + d + cov});
      }
    }
    auto better = [&](const Candidate &a, const Candidate &b) {
      if (a.rank != b.rank) return a.rank > b.rank;
      if (a.parent != b.parent) return live[a.parent].tokens < live[b.parent].tokens;
      return a.token < b.token;
    };
    const size_t keep = std::min(options.beam, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + keep, cands.end(), better);
    cands.resize(keep);

    std::vector<Hyp> next;
    for (const Candidate &c : cands) {
      const bool done = c.token == eos;
      Hyp h = search.Extend(live[c.parent], xs[c.parent], c.token, c.delta, !done);
      if (done) {
        NBestEntry e;
        e.terms = search.Finish(h);
        e.total = e.terms.total;
        e.tokens = std::move(h.tokens);
        finals.push_back(std::move(e));
      } else {
        next.push_back(std::move(h));
      }
    }
    live = std::move(next);

    if (can_stop && finals.size() >= options.nbest && !live.empty()) {
      std::vector<double> totals;
      for (const auto &f : finals) totals.push_back(f.total);
      std::nth_element(totals.begin(), totals.begin() + (options.nbest - 1),
                       totals.end(), std::greater<>());
      const double kth = totals[options.nbest - 1];
      double best_bound = kNegInf;
      for (const auto &h : live)
        best_bound = std::max(best_bound, search.Bound(h, options.max_len));
      if (kth > best_bound) break;
    }
  }

  NBest out;
  if (finals.empty()) {
    out.unterminated = true;
    for (const auto &h : live) {
      NBestEntry e;
      e.terms = search.Finish(h);
      e.total = e.terms.total;
      e.tokens = h.tokens;
      e.terminated = false;
      finals.push_back(std::move(e));
    }
  }
  std::sort(finals.begin(), finals.end(), BetterEntry);
  if (finals.size() > options.nbest) finals.resize(options.nbest);
  out.entries = std::move(finals);
  return out;
}

}  // namespace fusekit

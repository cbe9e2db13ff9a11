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

#include "fusekit/harness/toy_lm.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fusekit/common/error.h"
#include "fusekit/common/rng.h"

namespace fusekit {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Layout {
  std::vector<TokenId> rows;  // <s>, words
  std::vector<TokenId> cols;  // </s>, words
  std::vector<int> row_of;    // vocab id -> row index or -1
  std::vector<int> col_of;

  explicit Layout(const Vocabulary &vocab) {
    row_of.assign(vocab.size(), -1);
    col_of.assign(vocab.size(), -1);
    rows.push_back(vocab.bos());
    cols.push_back(vocab.eos());
    for (TokenId i = 0; i < static_cast<TokenId>(vocab.size()); ++i)
      if (i != vocab.bos() && i != vocab.eos()) {
        rows.push_back(i);
        cols.push_back(i);
      }
    for (size_t r = 0; r < rows.size(); ++r) row_of[rows[r]] = static_cast<int>(r);
    for (size_t c = 0; c < cols.size(); ++c) col_of[cols[c]] = static_cast<int>(c);
  }
  size_t size() const { return rows.size() * cols.size(); }
};

// Bigram counts [row][col] over a subset of sentences.
std::vector<double> Counts(const Layout &lay, const Vocabulary &vocab,
                           const std::vector<std::vector<TokenId>> &sents,
                           const std::vector<size_t> &which) {
  std::vector<double> n(lay.size(), 0.0);
  for (size_t i : which) {
    TokenId prev = vocab.bos();
    auto add = [&](TokenId next) {
      n[lay.row_of[prev] * lay.cols.size() + lay.col_of[next]] += 1.0;
    };
    for (TokenId w : sents[i]) {
      Check(lay.col_of[w] >= 0 && w != vocab.eos(), Errc::kInvalidArgument,
            "training sentence contains a special token");
      add(w);
      prev = w;
    }
    add(vocab.eos());
  }
  return n;
}

// Row-wise log-softmax of the logits.
std::vector<double> LogProbs(const Layout &lay, const std::vector<double> &z) {
  const size_t C = lay.cols.size();
  std::vector<double> lp(z.size());
  for (size_t r = 0; r < lay.rows.size(); ++r) {
    std::span<const double> row(z.data() + r * C, C);
    const double lse = LogSumExp(row);
    for (size_t c = 0; c < C; ++c) lp[r * C + c] = z[r * C + c] - lse;
  }
  return lp;
}

double Loss(const std::vector<double> &counts, const std::vector<double> &lp) {
  double nll = 0.0, n = 0.0;
  for (size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0.0) continue;
    nll -= counts[i] * lp[i];
    n += counts[i];
  }
  return n > 0.0 ? nll / n : 0.0;
}

std::shared_ptr<BigramScorer> ToScorer(const Layout &lay, const Vocabulary &vocab,
                                       const std::vector<double> &z) {
  const auto lp = LogProbs(lay, z);
  const size_t V = vocab.size(), C = lay.cols.size();
  std::vector<std::vector<double>> table(V, std::vector<double>(V, kNegInf));
  for (size_t r = 0; r < lay.rows.size(); ++r)
    for (size_t c = 0; c < C; ++c) table[lay.rows[r]][lay.cols[c]] = lp[r * C + c];
  for (size_t c = 0; c < C; ++c)  // </s> row: unused, kept valid
    table[vocab.eos()][lay.cols[c]] = -std::log(static_cast<double>(C));
  return std::make_shared<BigramScorer>(vocab, std::move(table), "toy-lm");
}

}  // namespace

ToyOptimizer ParseToyOptimizer(const std::string &name) {
  if (name == "sgd") return ToyOptimizer::kSgd;
  if (name == "adamw") return ToyOptimizer::kAdamW;
  Fail(Errc::kInvalidArgument, "unknown optimizer '" + name + "' (sgd|adamw)");
}

ToyLmResult TrainToyLm(const Vocabulary &vocab,
                       const std::vector<std::vector<TokenId>> &sentences,
                       const ToyLmOptions &options) {
  Check(!sentences.empty(), Errc::kInvalidArgument, "empty training corpus");
  if (options.optimizer == ToyOptimizer::kAdamW) options.adamw.Validate();
  else
    Check(options.sgd_lr > 0.0, Errc::kInvalidArgument, "sgd_lr must be > 0");
  const Layout lay(vocab);
  const size_t C = lay.cols.size();
  std::vector<size_t> all(sentences.size());
  std::iota(all.begin(), all.end(), 0);
  const auto full_counts = Counts(lay, vocab, sentences, all);
  const size_t batch = options.batch_size == 0 ? sentences.size()
                                               : std::min(options.batch_size, sentences.size());

  std::vector<double> z(lay.size(), 0.0), grad(lay.size());
  AdamWState adam(options.adamw, lay.size());
  Rng rng(options.seed);
  ToyLmResult result;
  std::vector<size_t> order = all;
  for (size_t epoch = 0; epoch < options.epochs; ++epoch) {
    if (batch < sentences.size())  // Fisher-Yates with our own draws
      for (size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.UniformInt(0, static_cast<int64_t>(i) - 1)]);
    for (size_t start = 0; start < order.size(); start += batch) {
      const std::vector<size_t> which(order.begin() + start,
                                      order.begin() + std::min(order.size(), start + batch));
      const auto counts = batch == sentences.size() ? full_counts
                                                    : Counts(lay, vocab, sentences, which);
      const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
      const auto lp = LogProbs(lay, z);
      for (size_t r = 0; r < lay.rows.size(); ++r) {
        double nr = 0.0;
        for (size_t c = 0; c < C; ++c) nr += counts[r * C + c];
        for (size_t c = 0; c < C; ++c)
          grad[r * C + c] = (nr * std::exp(lp[r * C + c]) - counts[r * C + c]) / total;
      }
      if (options.optimizer == ToyOptimizer::kAdamW) {
        AdamWStep(z, grad, adam);
      } else {
        for (size_t i = 0; i < z.size(); ++i) z[i] -= options.sgd_lr * grad[i];
      }
    }
    result.epoch_loss.push_back(Loss(full_counts, LogProbs(lay, z)));
  }
  result.lm = ToScorer(lay, vocab, z);
  return result;
}

double CrossEntropy(const Scorer &lm,
                    const std::vector<std::vector<TokenId>> &sentences) {
  double nll = 0.0;
  size_t n = 0;
  for (const auto &s : sentences) {
    std::vector<TokenId> seq = s;
    seq.push_back(lm.vocab().eos());
    nll -= SequenceLogProb(lm, seq);
    n += seq.size();
  }
  Check(n > 0, Errc::kInvalidArgument, "empty corpus");
  return nll / static_cast<double>(n);
}

double MaxLikelihoodCrossEntropy(const Vocabulary &vocab,
                                 const std::vector<std::vector<TokenId>> &sentences) {
  const Layout lay(vocab);
  std::vector<size_t> all(sentences.size());
  std::iota(all.begin(), all.end(), 0);
  const auto counts = Counts(lay, vocab, sentences, all);
  const size_t C = lay.cols.size();
  std::vector<double> lp(counts.size(), 0.0);
  for (size_t r = 0; r < lay.rows.size(); ++r) {
    double nr = 0.0;
    for (size_t c = 0; c < C; ++c) nr += counts[r * C + c];
    for (size_t c = 0; c < C; ++c)
      if (counts[r * C + c] > 0.0) lp[r * C + c] = std::log(counts[r * C + c] / nr);
  }
  return Loss(counts, lp);
}

}  // namespace fusekit

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

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <set>

#include <doctest.h>

#include "fusekit/common/error.h"
#include "fusekit/common/rng.h"
#include "fusekit/fusion/fusion.h"
#include "fusekit/harness/adamw.h"
#include "fusekit/harness/exact_scorers.h"
#include "fusekit/harness/task.h"
#include "fusekit/harness/toy_lm.h"

using namespace fusekit;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> RandomRow(Rng &rng, size_t n, double floor = 0.05) {
  std::vector<double> r(n);
  double z = 0.0;
  for (double &x : r) z += x = floor + rng.Uniform();
  for (double &x : r) x /= z;
  return r;
}

// Random task over `nw` words; every transition except <s> -> </s> allowed.
HmmTask RandomTask(uint64_t seed, size_t nw, size_t nsym) {
  Rng rng(seed);
  std::vector<std::string> words;
  for (size_t i = 0; i < nw; ++i) words.push_back(std::string(1, 'a' + i));
  std::vector<std::vector<double>> emit, lm;
  for (size_t i = 0; i < nw; ++i) emit.push_back(RandomRow(rng, nsym));
  auto first = RandomRow(rng, nw);
  first.insert(first.begin(), 0.0);
  lm.push_back(first);
  for (size_t i = 0; i < nw; ++i) lm.push_back(RandomRow(rng, nw + 1));
  return MakeHmmTask(words, nsym, emit, lm, {0.3, 0.45, 0.25}, seed);
}

Acoustics SymbolsToAcoustics(const std::vector<int> &symbols) {
  SyntheticUtterance u;
  u.id = "x";
  u.symbols = symbols;
  return ToAcoustics(u);
}

// Joint p(w, x) for every label sequence w, summed over all segmentations
// by walking every (label, duration) path frame by frame.
std::map<std::vector<TokenId>, double> PathSums(const HmmTask &task,
                                                const std::vector<int> &x) {
  std::map<std::vector<TokenId>, double> joint;
  const auto words = task.Words();
  std::vector<TokenId> labels;
  std::function<void(size_t, TokenId, double)> walk = [&](size_t t, TokenId prev,
                                                          double p) {
    if (t == x.size()) {
      if (!labels.empty()) joint[labels] += p * task.lm[prev][task.vocab.eos()];
      return;
    }
    for (TokenId w : words) {
      double pe = p * task.lm[prev][w];
      for (size_t d = 1; d <= task.duration.size() && t + d <= x.size(); ++d) {
        pe *= task.emission[w][x[t + d - 1]];
        labels.push_back(w);
        walk(t + d, w, pe * task.duration[d - 1]);
        labels.pop_back();
      }
    }
  };
  walk(0, task.vocab.bos(), 1.0);
  return joint;
}

bool IsPrefix(const std::vector<TokenId> &p, const std::vector<TokenId> &w) {
  return p.size() <= w.size() && std::equal(p.begin(), p.end(), w.begin());
}

double Norm(const std::vector<double> &v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

// ------------------------------------------------------------------ task

TEST_CASE("task validation and parsing") {
  auto t = RandomTask(1, 3, 3);
  CHECK_NOTHROW(t.Validate());
  auto bad = t;
  bad.duration = {0.5, 0.4};
  CHECK_THROWS_AS(bad.Validate(), Error);
  bad = t;
  bad.lm[t.vocab.bos()][t.vocab.eos()] = 0.1;
  bad.lm[t.vocab.bos()][2] -= 0.1;
  CHECK_THROWS_AS(bad.Validate(), Error);

  const std::string ok = R"(
[task]
words = ["a", "b"]
num_symbols = 2
duration = [1.0]
[task.emission]
a = [1.0, 0.0]
b = [0.0, 1.0]
[task.lm]
"<s>" = [0.0, 0.5, 0.5]
a = [0.5, 0.0, 0.5]
b = [0.5, 0.5, 0.0]
)";
  auto p = ParseHmmTask(ok);
  CHECK(p.vocab.size() == 4);
  CHECK(p.lm[*p.vocab.Find("a")][*p.vocab.Find("b")] == 0.5);
  CHECK(p.emission[*p.vocab.Find("b")][1] == 1.0);

  auto code = [](const std::string &text) {
    try {
      ParseHmmTask(text);
    } catch (const Error &e) {
      return e.code();
    }
    return Errc::kPipeline;  // sentinel: no error
  };
  std::string missing = ok;
  missing.replace(missing.find("b = [0.5, 0.5, 0.0]"), 19, "");
  CHECK(code(missing) == Errc::kParse);
  std::string unnorm = ok;
  unnorm.replace(unnorm.find("a = [1.0, 0.0]"), 14, "a = [0.9, 0.0]");
  CHECK(code(unnorm) == Errc::kParse);
  CHECK(code("[task\nwords = 1") == Errc::kParse);
}

TEST_CASE("generate: identity channel is readable") {
  // Identity emissions and no self-transitions: the collapsed symbol runs
  // spell the labels.
  std::vector<std::vector<double>> emit{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  std::vector<std::vector<double>> lm{{0.0, 0.4, 0.3, 0.3},
                                      {0.2, 0.0, 0.5, 0.3},
                                      {0.2, 0.4, 0.0, 0.4},
                                      {0.2, 0.3, 0.5, 0.0}};
  auto task = MakeHmmTask({"a", "b", "c"}, 3, emit, lm, {0.3, 0.4, 0.3});
  auto corpus = Generate(task, 11, 200);
  REQUIRE(corpus.size() == 200);
  for (const auto &u : corpus) {
    std::vector<TokenId> runs;
    for (size_t t = 0; t < u.symbols.size(); ++t)
      if (t == 0 || u.symbols[t] != u.symbols[t - 1])
        runs.push_back(static_cast<TokenId>(u.symbols[t]) + 2);
    CHECK(runs == u.words);
    CHECK(std::accumulate(u.durations.begin(), u.durations.end(), 0) ==
          static_cast<int>(u.symbols.size()));
    CHECK(u.durations.size() == u.words.size());
  }
}

TEST_CASE("generate: determinism and metadata") {
  auto task = RandomTask(3, 4, 5);
  auto a = Generate(task, 42, 60);
  auto b = Generate(task, 42, 60, {}, 4);
  auto c = Generate(task, 43, 60);
  REQUIRE(a.size() == b.size());
  bool differs = false;
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].conversation == b[i].conversation);
    CHECK(a[i].channel == b[i].channel);
    CHECK(a[i].order == b[i].order);
    CHECK(a[i].words == b[i].words);
    CHECK(a[i].symbols == b[i].symbols);
    differs = differs || a[i].symbols != c[i].symbols;
  }
  CHECK(differs);
  // Conversations of 10 with alternating channels and increasing order.
  CHECK(a[0].conversation == a[9].conversation);
  CHECK(a[0].conversation != a[10].conversation);
  CHECK(a[0].channel != a[1].channel);
  CHECK(a[0].order < a[2].order);
}

TEST_CASE("generate: empirical unigram matches the source LM") {
  auto task = RandomTask(5, 4, 4);
  const auto visits = ExpectedWordCounts(task.vocab, task.lm);
  const double per_sentence = std::accumulate(visits.begin(), visits.end(), 0.0);
  const size_t n = static_cast<size_t>(100000 / per_sentence) + 1;
  auto corpus = Generate(task, 9, n);
  std::vector<double> counts(task.vocab.size(), 0.0);
  double total = 0.0;
  for (const auto &u : corpus)
    for (TokenId w : u.words) counts[w] += 1.0, total += 1.0;
  CHECK(total >= 100000 * 0.95);
  for (TokenId w : task.Words())
    CHECK(std::abs(counts[w] / total - visits[w] / per_sentence) < 0.01);
}

// ------------------------------------------------------------- exact E2E

TEST_CASE("exact E2E equals exhaustive path enumeration") {
  int checked = 0;
  for (uint64_t seed = 1; seed <= 12; ++seed) {
    const size_t nw = 2 + seed % 3;  // up to 4 labels
    auto task = RandomTask(seed, nw, 3);
    ExactE2EScorer e2e(task);
    Rng rng(seed * 77);
    const size_t T = 1 + seed % 6;
    std::vector<int> x(T);
    for (int &s : x) s = static_cast<int>(rng.UniformInt(0, 2));
    const Acoustics ac = SymbolsToAcoustics(x);

    const auto joint = PathSums(task, x);
    double px = 0.0;
    for (const auto &[w, p] : joint) px += p;
    REQUIRE(px > 0.0);

    // Every prefix of a sequence with mass, including the empty one.
    std::set<std::vector<TokenId>> prefixes;
    for (const auto &[w, p] : joint)
      for (size_t k = 0; k <= w.size(); ++k)
        prefixes.insert(std::vector<TokenId>(w.begin(), w.begin() + k));

    for (const auto &prefix : prefixes) {
      double mass = 0.0;
      std::vector<double> next(task.vocab.size(), 0.0);
      for (const auto &[w, p] : joint) {
        if (!IsPrefix(prefix, w)) continue;
        mass += p;
        next[w.size() == prefix.size() ? task.vocab.eos() : w[prefix.size()]] += p;
      }
      if (mass == 0.0) continue;
      ScorerState st = e2e.Start({}, &ac);
      for (TokenId t : prefix) st = e2e.Advance(st, t);
      const auto r = e2e.Score(st);
      for (size_t v = 0; v < next.size(); ++v) {
        const double got = std::exp(r.dist[v]);
        CHECK(std::abs(got - next[v] / mass) < 1e-9);
      }
      REQUIRE(r.attention.has_value());
      const auto &a = r.attention->weights;
      CHECK(a.size() == T);
      CHECK(std::abs(std::accumulate(a.begin(), a.end(), 0.0) - 1.0) < 1e-9);
      for (double x_t : a) CHECK(x_t >= 0.0);
      ++checked;
    }

    // Complete-sequence posteriors and likelihoods.
    for (const auto &[w, p] : joint) {
      std::vector<TokenId> seq = w;
      seq.push_back(task.vocab.eos());
      CHECK(std::abs(std::exp(SequenceLogProb(e2e, seq, {}, &ac)) - p / px) < 1e-9);
      double lm = task.lm[task.vocab.bos()][w[0]];
      for (size_t i = 1; i < w.size(); ++i) lm *= task.lm[w[i - 1]][w[i]];
      lm *= task.lm[w.back()][task.vocab.eos()];
      CHECK(std::exp(e2e.LogLikelihood(x, w)) == doctest::Approx(p / lm).epsilon(1e-9));
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("exact E2E: noiseless channel is certain") {
  std::vector<std::vector<double>> emit{
      {1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}};
  std::vector<std::vector<double>> lm{{0.0, 0.25, 0.25, 0.25, 0.25},
                                      {0.2, 0.0, 0.3, 0.3, 0.2},
                                      {0.2, 0.3, 0.0, 0.3, 0.2},
                                      {0.2, 0.3, 0.3, 0.0, 0.2},
                                      {0.2, 0.2, 0.3, 0.3, 0.0}};
  auto task = MakeHmmTask({"a", "b", "c", "d"}, 4, emit, lm, {0.3, 0.4, 0.3});
  ExactE2EScorer e2e(task);
  for (const auto &u : Generate(task, 5, 50)) {
    const Acoustics ac = ToAcoustics(u);
    ScorerState st = e2e.Start({}, &ac);
    for (TokenId w : u.words) {
      CHECK(std::exp(e2e.Score(st).dist[w]) >= 0.999);
      st = e2e.Advance(st, w);
    }
    CHECK(std::exp(e2e.Score(st).dist[task.vocab.eos()]) >= 0.999);
  }
}

TEST_CASE("exact E2E: alphabet errors") {
  auto task = RandomTask(2, 3, 3);
  ExactE2EScorer e2e(task);
  auto expect_code = [&](const Acoustics &ac) {
    try {
      e2e.Start({}, &ac);
    } catch (const Error &e) {
      return e.code() == Errc::kInvalidArgument;
    }
    return false;
  };
  CHECK(expect_code(SymbolsToAcoustics({0, 3, 1})));
  CHECK(expect_code(SymbolsToAcoustics({0, -1})));
  Acoustics frac = SymbolsToAcoustics({0, 1});
  frac.features(1, 0) = 0.5f;
  CHECK(expect_code(frac));
  CHECK_THROWS_AS(e2e.Start({}, nullptr), Error);
}

// ----------------------------------------------------------- internal LM

TEST_CASE("exact internal LM is the source bigram") {
  auto task = RandomTask(4, 3, 3);
  auto lm = ExactInternalLm(task);
  for (TokenId h : std::vector<TokenId>{task.vocab.bos(), 2, 3, 4}) {
    ScorerState st = lm->Start();
    if (h != task.vocab.bos()) st = lm->Advance(st, h);
    const auto d = lm->Score(st).dist;
    for (size_t v = 0; v < task.vocab.size(); ++v)
      CHECK(std::exp(d[v]) == doctest::Approx(task.lm[h][v]).epsilon(1e-12));
  }

  // A uniform source LM gives a uniform scorer over the allowed successors.
  std::vector<std::vector<double>> uni{{0.0, 0.5, 0.5}, {1 / 3.0, 1 / 3.0, 1 / 3.0},
                                       {1 / 3.0, 1 / 3.0, 1 / 3.0}};
  auto ut = MakeHmmTask({"a", "b"}, 2, {{0.5, 0.5}, {0.5, 0.5}}, uni, {1.0});
  auto ul = ExactInternalLm(ut);
  auto st = ul->Advance(ul->Start(), 2);
  for (size_t v = 1; v < 4; ++v)
    CHECK(ul->Score(st).dist[v] == doctest::Approx(-std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("probability ratio recovers the acoustic likelihood") {
  for (uint64_t seed = 20; seed < 26; ++seed) {
    auto task = RandomTask(seed, 3, 3);
    auto e2e = std::make_shared<ExactE2EScorer>(task);
    Rng rng(seed);
    std::vector<int> x(4 + seed % 3);
    for (int &s : x) s = static_cast<int>(rng.UniformInt(0, 2));
    const Acoustics ac = SymbolsToAcoustics(x);

    ScorerSet set;
    set.e2e.push_back(e2e);
    FusionWeights w;
    w.e2e = {1.0};
    w.coverage = {0.0};
    w.tau = {0.5};
    AddProbabilityRatio(set, w, ExactInternalLm(task), 1.0);
    REQUIRE(w.lm == std::vector<double>{-1.0});

    const auto joint = PathSums(task, x);
    double px = 0.0;
    for (const auto &[words, p] : joint) px += p;
    double best_ratio = -kInf, best_lik = -kInf;
    std::vector<TokenId> arg_ratio, arg_lik;
    for (const auto &[words, p] : joint) {
      std::vector<TokenId> seq = words;
      seq.push_back(task.vocab.eos());
      const double ratio = ScoreHypothesis(seq, set, w, &ac).total;
      const double lik = e2e->LogLikelihood(x, words);
      // Constant offset: log p(w|x) - log p(w) = log p(x|w) - log p(x).
      CHECK(ratio - lik == doctest::Approx(-std::log(px)).epsilon(1e-9));
      if (ratio > best_ratio) best_ratio = ratio, arg_ratio = words;
      if (lik > best_lik) best_lik = lik, arg_lik = words;
    }
    CHECK(arg_ratio == arg_lik);
  }
}

// ---------------------------------------------------------------- AdamW

TEST_CASE("AdamW: zero gradients shrink multiplicatively") {
  for (auto [lr, wd] : {std::pair{1e-3, 1e-2}, std::pair{0.1, 0.05}, std::pair{0.5, 1.0}}) {
    AdamWOptions o;
    o.lr = lr;
    o.weight_decay = wd;
    AdamWState state(o, 3);
    std::vector<double> theta{1.5, -2.0, 0.25}, zero(3, 0.0);
    const double n0 = Norm(theta);
    const double f = 1.0 - lr * wd;
    std::vector<double> ref = theta;
    for (int s = 1; s <= 1000; ++s) {
      AdamWStep(theta, zero, state);
      for (double &r : ref) r *= f;
      CHECK(theta == ref);
      if (s % 100 == 0)
        CHECK(Norm(theta) == doctest::Approx(n0 * std::pow(f, s)).epsilon(1e-12));
    }
    CHECK(state.step == 1000);
  }
}

TEST_CASE("AdamW: update bound and reference recursion") {
  // wd = 0: the first step is lr * g / (|g| + eps) per coordinate whatever
  // the gradient scale.
  AdamWOptions o;
  o.lr = 0.01;
  o.weight_decay = 0.0;
  for (double scale : {1.0, 1000.0}) {
    AdamWState st(o, 3);
    std::vector<double> th{0.0, 0.0, 0.0};
    std::vector<double> g{0.3 * scale, -2.0 * scale, 1e-3 * scale};
    AdamWStep(th, g, st);
    for (size_t i = 0; i < 3; ++i) {
      CHECK(std::abs(th[i]) <= o.lr * (1.0 + 1e-12));
      CHECK(th[i] == doctest::Approx(-o.lr * g[i] / (std::abs(g[i]) + o.eps)).epsilon(1e-12));
    }
  }

  // Quadratic bowl 1/2 |theta|^2, against an independent scalar recursion.
  AdamWOptions q;
  q.lr = 0.01;
  q.weight_decay = 0.01;
  AdamWState st(q, 2);
  std::vector<double> th{1.0, 1.0};
  double r = 1.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 500; ++t) {
    const double g = r;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1.0 - std::pow(0.9, t));
    const double vh = v / (1.0 - std::pow(0.999, t));
    r = r - 0.01 * (mh / (std::sqrt(vh) + 1e-8) + 0.01 * r);
    std::vector<double> grad = th;
    AdamWStep(th, grad, st);
  }
  CHECK(th[0] == doctest::Approx(r).epsilon(1e-9));
  CHECK(Norm(th) < 0.01);
}

TEST_CASE("AdamW: errors") {
  AdamWState st(AdamWOptions{}, 2);
  std::vector<double> th{1.0, 2.0};
  std::vector<double> nan{0.0, std::nan("")};
  std::vector<double> inf{kInf, 0.0};
  std::vector<double> short_g{1.0};
  CHECK_THROWS_AS(AdamWStep(th, nan, st), Error);
  CHECK_THROWS_AS(AdamWStep(th, inf, st), Error);
  CHECK_THROWS_AS(AdamWStep(th, short_g, st), Error);
  CHECK(th == std::vector<double>{1.0, 2.0});
  AdamWOptions bad;
  bad.beta1 = 1.0;
  CHECK_THROWS_AS(bad.Validate(), Error);
}

// --------------------------------------------------------------- toy LM

TEST_CASE("toy LM: alternating corpus and zero epochs") {
  const Vocabulary vocab({"<s>", "</s>", "a", "b"});
  std::vector<std::vector<TokenId>> corpus(50, {2, 3, 2, 3, 2, 3, 2, 3});
  ToyLmOptions o;
  o.epochs = 500;
  auto r = TrainToyLm(vocab, corpus, o);
  auto st = r.lm->Advance(r.lm->Start(), 2);
  CHECK(std::exp(r.lm->Score(st).dist[3]) > 0.99);
  CHECK(r.epoch_loss.size() == 500);
  CHECK(r.epoch_loss.back() < r.epoch_loss.front());

  o.epochs = 0;
  auto z = TrainToyLm(vocab, corpus, o);
  const auto d = z.lm->Score(z.lm->Advance(z.lm->Start(), 3)).dist;
  for (size_t v = 1; v < 4; ++v)
    CHECK(d[v] == doctest::Approx(-std::log(3.0)).epsilon(1e-12));
  CHECK(d[0] == -kInf);

  CHECK_THROWS_AS(TrainToyLm(vocab, {}, o), Error);
  CHECK(ParseToyOptimizer("sgd") == ToyOptimizer::kSgd);
  CHECK_THROWS_AS(ParseToyOptimizer("adam"), Error);
}

TEST_CASE("toy LM: SGD and AdamW reach the entropy of the source") {
  // Short sentences so that a few hundred thousand draws give millions of
  // tokens; the empirical ML entropy then sits within ~3e-4 of the rate.
  std::vector<std::vector<double>> rows{{0.0, 0.5, 0.3, 0.2},
                                        {0.3, 0.1, 0.5, 0.1},
                                        {0.3, 0.3, 0.1, 0.3},
                                        {0.4, 0.2, 0.2, 0.2}};
  auto task = MakeHmmTask({"a", "b", "c"}, 1, {{1.0}, {1.0}, {1.0}}, rows, {1.0});
  const auto &lm = task.lm;
  auto H = [](const std::vector<double> &p) {
    double h = 0.0;
    for (double x : p)
      if (x > 0) h -= x * std::log(x);
    return h;
  };
  // Per-token entropy rate, </s> included as a token.
  const auto visits = ExpectedWordCounts(task.vocab, lm);
  double num = H(lm[task.vocab.bos()]), tokens = 1.0;
  for (TokenId w : task.Words()) num += visits[w] * H(lm[w]), tokens += visits[w];
  const double rate = num / tokens;

  auto sentences = SampleSentences(task.vocab, lm, 17, 1000000);
  const double ml = MaxLikelihoodCrossEntropy(task.vocab, sentences);
  CHECK(std::abs(ml - rate) < 1e-3);

  ToyLmOptions adam;
  adam.epochs = 400;
  auto a = TrainToyLm(task.vocab, sentences, adam);
  ToyLmOptions sgd;
  sgd.optimizer = ToyOptimizer::kSgd;
  sgd.epochs = 400;
  auto s = TrainToyLm(task.vocab, sentences, sgd);
  const double ca = CrossEntropy(*a.lm, sentences);
  const double cs = CrossEntropy(*s.lm, sentences);
  MESSAGE("rate ", rate, " ml ", ml, " adamw ", ca, " sgd ", cs);
  CHECK(ca - ml >= -1e-12);
  CHECK(cs - ml >= -1e-12);
  CHECK(std::abs(ca - rate) < 1e-3);
  CHECK(std::abs(cs - rate) < 1e-3);
  CHECK(a.epoch_loss.back() == doctest::Approx(ca).epsilon(1e-9));
}

TEST_CASE("toy LM: minibatches converge too") {
  std::vector<std::vector<double>> rows{{0.0, 0.6, 0.4}, {0.5, 0.2, 0.3}, {0.5, 0.4, 0.1}};
  auto task = MakeHmmTask({"a", "b"}, 1, {{1.0}, {1.0}}, rows, {1.0});
  auto sentences = SampleSentences(task.vocab, task.lm, 3, 2000);
  const double ml = MaxLikelihoodCrossEntropy(task.vocab, sentences);
  ToyLmOptions o;
  o.epochs = 60;
  o.batch_size = 100;
  o.seed = 5;
  o.adamw.lr = 0.02;
  auto r = TrainToyLm(task.vocab, sentences, o);
  CHECK(CrossEntropy(*r.lm, sentences) - ml < 1e-3);
  auto r2 = TrainToyLm(task.vocab, sentences, o);
  CHECK(r2.epoch_loss == r.epoch_loss);
}

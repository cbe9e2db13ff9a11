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

#include "fusekit/harness/task.h"

#include <cmath>
#include <cstdio>

#include "fusekit/common/binary_io.h"
#include "fusekit/common/error.h"
#include "fusekit/common/parallel.h"
#include "fusekit/common/rng.h"
#include "fusekit/common/toml_util.h"

namespace fusekit {

namespace {

constexpr double kNormTolerance = 1e-9;

void CheckDistribution(const std::vector<double> &p, const std::string &what) {
  double sum = 0.0;
  for (double v : p) {
    Check(std::isfinite(v) && v >= 0.0, Errc::kInvalidArgument,
          what + ": probabilities must be finite and >= 0");
    sum += v;
  }
  Check(std::abs(sum - 1.0) <= kNormTolerance, Errc::kInvalidArgument,
        what + ": sums to " + std::to_string(sum));
}

std::string Padded(const std::string &prefix, size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%0*zu", width, i);
  return prefix + buf;
}

std::vector<TokenId> SampleWords(const Vocabulary &vocab, const BigramTable &lm,
                                 Rng &rng, size_t max_words) {
  // Rejection keeps the conditional distribution given length <= max_words.
  for (;;) {
    std::vector<TokenId> words;
    TokenId prev = vocab.bos();
    for (;;) {
      const TokenId next = static_cast<TokenId>(rng.Categorical(lm[prev]));
      if (next == vocab.eos()) break;
      words.push_back(next);
      prev = next;
      if (words.size() > max_words) break;
    }
    if (words.size() <= max_words) return words;
  }
}

}  // namespace

void HmmTask::Validate() const {
  const size_t v = vocab.size();
  Check(v >= 3, Errc::kInvalidArgument, "task needs at least one word");
  Check(num_symbols >= 1, Errc::kInvalidArgument, "num_symbols must be >= 1");
  Check(emission.size() == v && lm.size() == v, Errc::kInvalidArgument,
        "task tables do not match the vocabulary");
  Check(!duration.empty(), Errc::kInvalidArgument, "duration model is empty");
  CheckDistribution(duration, "duration");
  Check(max_words >= 1, Errc::kInvalidArgument, "max_words must be >= 1");
  for (TokenId w : Words()) {
    Check(emission[w].size() == num_symbols, Errc::kInvalidArgument,
          "emission row for " + vocab.token(w) + " has wrong length");
    CheckDistribution(emission[w], "emission " + vocab.token(w));
  }
  std::vector<TokenId> hist = Words();
  hist.insert(hist.begin(), vocab.bos());
  for (TokenId h : hist) {
    Check(lm[h].size() == v, Errc::kInvalidArgument,
          "LM row for " + vocab.token(h) + " has wrong length");
    Check(lm[h][vocab.bos()] == 0.0, Errc::kInvalidArgument,
          "LM cannot emit <s>");
    CheckDistribution(lm[h], "LM row " + vocab.token(h));
  }
  Check(lm[vocab.bos()][vocab.eos()] == 0.0, Errc::kInvalidArgument,
        "LM must not allow empty utterances (<s> </s>)");
}

std::vector<TokenId> HmmTask::Words() const {
  std::vector<TokenId> w;
  for (TokenId i = 0; i < static_cast<TokenId>(vocab.size()); ++i)
    if (i != vocab.bos() && i != vocab.eos()) w.push_back(i);
  return w;
}

BigramTable ExpandLmRows(const Vocabulary &vocab,
                         const std::vector<std::vector<double>> &rows) {
  const size_t n_words = vocab.size() - 2;
  Check(rows.size() == n_words + 1, Errc::kInvalidArgument,
        "LM needs one row for <s> and one per word");
  BigramTable lm(vocab.size(), std::vector<double>(vocab.size(), 0.0));
  for (size_t r = 0; r < rows.size(); ++r) {
    Check(rows[r].size() == n_words + 1, Errc::kInvalidArgument,
          "LM rows need one entry for </s> and one per word");
    const TokenId h = static_cast<TokenId>(r == 0 ? vocab.bos() : r + 1);
    lm[h][vocab.eos()] = rows[r][0];
    for (size_t c = 1; c < rows[r].size(); ++c) lm[h][c + 1] = rows[r][c];
  }
  // The </s> row is never used; keep it a valid distribution.
  lm[vocab.eos()][vocab.eos()] = 1.0;
  return lm;
}

HmmTask MakeHmmTask(const std::vector<std::string> &words, size_t num_symbols,
                    std::vector<std::vector<double>> emission_by_word,
                    std::vector<std::vector<double>> lm_rows,
                    std::vector<double> duration, uint64_t seed) {
  std::vector<std::string> tokens{"<s>", "</s>"};
  tokens.insert(tokens.end(), words.begin(), words.end());
  HmmTask t;
  t.vocab = Vocabulary(tokens);
  t.num_symbols = num_symbols;
  Check(emission_by_word.size() == words.size(), Errc::kInvalidArgument,
        "need one emission row per word");
  t.emission.assign(t.vocab.size(), {});
  for (size_t i = 0; i < words.size(); ++i) t.emission[i + 2] = emission_by_word[i];
  t.lm = ExpandLmRows(t.vocab, lm_rows);
  t.duration = std::move(duration);
  t.seed = seed;
  t.Validate();
  return t;
}

BigramTable ParseLmTable(const Vocabulary &vocab, const toml::table &rows) {
  std::vector<std::vector<double>> compact(vocab.size() - 1);
  size_t seen = 0;
  for (const auto &[key, node] : rows) {
    const std::string name(key.str());
    auto id = vocab.Find(name);
    Check(id && *id != vocab.eos(), Errc::kParse, "LM row for unknown history " + name);
    const size_t r = *id == vocab.bos() ? 0 : static_cast<size_t>(*id) - 1;
    const auto *arr = node.as_array();
    Check(arr != nullptr, Errc::kParse, "LM row " + name + " must be an array");
    for (const auto &el : *arr) {
      auto v = el.value<double>();
      Check(v.has_value(), Errc::kParse, "LM row " + name + ": expected numbers");
      compact[r].push_back(*v);
    }
    ++seen;
  }
  Check(seen == compact.size(), Errc::kParse,
        "LM table needs rows for <s> and every word");
  return ExpandLmRows(vocab, compact);
}

HmmTask ParseHmmTask(const std::string &toml_text) {
  const toml::table root = tomlu::Parse(toml_text, "task config");
  const auto *t = root["task"].as_table();
  Check(t != nullptr, Errc::kParse, "task config: missing [task] table");
  std::vector<std::string> words;
  tomlu::ReadArray(*t, "words", words);
  Check(!words.empty(), Errc::kParse, "task config: 'words' is required");
  HmmTask task;
  std::vector<std::string> tokens{"<s>", "</s>"};
  tokens.insert(tokens.end(), words.begin(), words.end());
  try {
    task.vocab = Vocabulary(tokens);
  } catch (const Error &e) {
    throw Error(Errc::kParse, std::string("task config: ") + e.what());
  }
  tomlu::Read(*t, "num_symbols", task.num_symbols);
  tomlu::ReadArray(*t, "duration", task.duration);
  tomlu::Read(*t, "max_words", task.max_words);
  tomlu::Read(*t, "seed", task.seed);
  const auto *em = (*t)["emission"].as_table();
  Check(em != nullptr, Errc::kParse, "task config: missing [task.emission]");
  task.emission.assign(task.vocab.size(), {});
  for (const auto &w : words) {
    tomlu::ReadArray(*em, w.c_str(), task.emission[*task.vocab.Find(w)]);
    Check(!task.emission[*task.vocab.Find(w)].empty(), Errc::kParse,
          "task config: no emission row for " + w);
  }
  const auto *lm = (*t)["lm"].as_table();
  Check(lm != nullptr, Errc::kParse, "task config: missing [task.lm]");
  task.lm = ParseLmTable(task.vocab, *lm);
  try {
    task.Validate();
  } catch (const Error &e) {
    throw Error(Errc::kParse, std::string("task config: ") + e.what());
  }
  return task;
}

HmmTask LoadHmmTask(const std::string &path) {
  try {
    return ParseHmmTask(binio::ReadFileToString(path));
  } catch (const Error &e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::vector<SyntheticUtterance> Generate(const HmmTask &task, uint64_t seed,
                                         size_t n, const GenerateOptions &opts,
                                         int threads) {
  task.Validate();
  Check(opts.utterances_per_conversation >= 1, Errc::kInvalidArgument,
        "utterances_per_conversation must be >= 1");
  std::vector<SyntheticUtterance> out(n);
  ParallelFor(n, threads, [&](size_t i) {
    Rng rng(DeriveSeed(seed, static_cast<uint64_t>(i)));
    SyntheticUtterance &u = out[i];
    u.id = Padded(opts.id_prefix, i, 6);
    const size_t conv = i / opts.utterances_per_conversation;
    const size_t pos = i % opts.utterances_per_conversation;
    u.conversation = Padded("conv", conv, 4);
    u.channel = pos % 2 == 0 ? "A" : "B";
    u.speaker = u.conversation + "-" + u.channel;
    u.order = static_cast<int64_t>(pos / 2);
    u.words = SampleWords(task.vocab, task.lm, rng, task.max_words);
    for (TokenId w : u.words) {
      const int d = static_cast<int>(rng.Categorical(task.duration)) + 1;
      u.durations.push_back(d);
      for (int k = 0; k < d; ++k)
        u.symbols.push_back(static_cast<int>(rng.Categorical(task.emission[w])));
    }
  });
  return out;
}

std::vector<std::vector<TokenId>> SampleSentences(const Vocabulary &vocab,
                                                  const BigramTable &lm,
                                                  uint64_t seed, size_t n,
                                                  size_t max_words) {
  std::vector<std::vector<TokenId>> out(n);
  for (size_t i = 0; i < n; ++i) {
    Rng rng(DeriveSeed(seed, static_cast<uint64_t>(i)));
    out[i] = SampleWords(vocab, lm, rng, max_words);
  }
  return out;
}

Acoustics ToAcoustics(const SyntheticUtterance &utt) {
  Acoustics a;
  a.utterance_id = utt.id;
  a.features = FeatureMatrix(utt.symbols.size(), 1, 10.0, FeatureKind::kStacked);
  for (size_t t = 0; t < utt.symbols.size(); ++t) a.features(t, 0) = utt.symbols[t];
  return a;
}

std::vector<double> ExpectedWordCounts(const Vocabulary &vocab,
                                       const BigramTable &lm) {
  // visits = e_bos * P + visits * P restricted to words.
  const size_t v = vocab.size();
  std::vector<double> visits(v, 0.0), next(v, 0.0);
  for (int iter = 0; iter < 100000; ++iter) {
    std::fill(next.begin(), next.end(), 0.0);
    for (size_t w = 0; w < v; ++w)
      if (static_cast<TokenId>(w) != vocab.bos() && static_cast<TokenId>(w) != vocab.eos())
        next[w] = lm[vocab.bos()][w];
    for (size_t h = 0; h < v; ++h) {
      if (static_cast<TokenId>(h) == vocab.bos() || static_cast<TokenId>(h) == vocab.eos())
        continue;
      for (size_t w = 0; w < v; ++w)
        if (static_cast<TokenId>(w) != vocab.bos() && static_cast<TokenId>(w) != vocab.eos())
          next[w] += visits[h] * lm[h][w];
    }
    double diff = 0.0;
    for (size_t w = 0; w < v; ++w) diff = std::max(diff, std::abs(next[w] - visits[w]));
    std::swap(visits, next);
    if (diff < 1e-14) break;
  }
  return visits;
}

}  // namespace fusekit

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

#include "fusekit/harness/fusion_eval.h"

#include <chrono>
#include <cstdio>
#include <sstream>

#include "fusekit/common/binary_io.h"
#include "fusekit/common/error.h"
#include "fusekit/common/parallel.h"
#include "fusekit/common/rng.h"
#include "fusekit/common/toml_util.h"
#include "fusekit/harness/exact_scorers.h"

namespace fusekit {

namespace {

FusionWeights Weights(double lm, double internal, double length, bool use_internal,
                      bool use_lm) {
  FusionWeights w;
  w.e2e = {1.0};
  w.coverage = {0.0};
  w.tau = {0.5};
  w.length = length;
  if (use_lm) w.lm.push_back(lm);
  if (use_internal) w.lm.push_back(-internal);
  return w;
}

std::vector<std::string> Words(const Vocabulary &v, const std::vector<TokenId> &ids) {
  std::vector<std::string> out;
  for (TokenId t : ids)
    if (t != v.bos() && t != v.eos()) out.push_back(v.token(t));
  return out;
}

}  // namespace

FusionExperiment ParseFusionExperiment(const std::string &toml_text) {
  FusionExperiment e;
  e.task = ParseHmmTask(toml_text);
  const toml::table root = tomlu::Parse(toml_text, "experiment config");
  const auto *target = root["target"]["lm"].as_table();
  Check(target != nullptr, Errc::kParse, "experiment config: missing [target.lm]");
  e.target_lm = ParseLmTable(e.task.vocab, *target);
  {
    HmmTask check = e.task;
    check.lm = e.target_lm;
    try {
      check.Validate();
    } catch (const Error &err) {
      throw Error(Errc::kParse, std::string("target LM: ") + err.what());
    }
  }
  if (const auto *x = root["experiment"].as_table()) {
    tomlu::Read(*x, "test_utterances", e.test_utterances);
    tomlu::Read(*x, "dev_utterances", e.dev_utterances);
    tomlu::Read(*x, "lm_text_sentences", e.lm_text_sentences);
    tomlu::Read(*x, "seed", e.seed);
    std::string ext = "trained", in = "trained";
    tomlu::Read(*x, "external_lm", ext);
    tomlu::Read(*x, "internal_lm", in);
    Check(ext == "trained" || ext == "true", Errc::kParse,
          "external_lm must be 'trained' or 'true'");
    Check(in == "trained" || in == "exact", Errc::kParse,
          "internal_lm must be 'trained' or 'exact'");
    e.true_external_lm = ext == "true";
    e.exact_internal_lm = in == "exact";
    tomlu::Read(*x, "beam", e.beam);
    tomlu::Read(*x, "length", e.length);
    tomlu::Read(*x, "tune", e.tune);
    tomlu::ReadArray(*x, "grid", e.grid);
    tomlu::Read(*x, "shallow_lm", e.shallow_lm);
    tomlu::Read(*x, "ratio_lm", e.ratio_lm);
    tomlu::Read(*x, "ratio_internal", e.ratio_internal);
    if (const auto *t = (*x)["lm_training"].as_table()) {
      std::string opt = "adamw";
      tomlu::Read(*t, "optimizer", opt);
      e.lm_training.optimizer = ParseToyOptimizer(opt);
      tomlu::Read(*t, "epochs", e.lm_training.epochs);
      tomlu::Read(*t, "batch_size", e.lm_training.batch_size);
      tomlu::Read(*t, "seed", e.lm_training.seed);
      tomlu::Read(*t, "sgd_lr", e.lm_training.sgd_lr);
      tomlu::Read(*t, "lr", e.lm_training.adamw.lr);
      tomlu::Read(*t, "weight_decay", e.lm_training.adamw.weight_decay);
    }
  }
  Check(e.test_utterances >= 1 && e.beam >= 1 && e.lm_text_sentences >= 1,
        Errc::kParse, "experiment sizes must be positive");
  Check(!e.tune || e.dev_utterances >= 1, Errc::kParse, "tuning needs dev utterances");
  Check(!e.grid.empty(), Errc::kParse, "grid must not be empty");
  return e;
}

FusionExperiment LoadFusionExperiment(const std::string &path) {
  try {
    return ParseFusionExperiment(binio::ReadFileToString(path));
  } catch (const Error &e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

WerReport DecodeCorpus(const std::vector<SyntheticUtterance> &utts,
                       const ScorerSet &scorers, const FusionWeights &weights,
                       size_t beam, int threads,
                       std::vector<std::vector<TokenId>> *hyps) {
  const Vocabulary &vocab = scorers.vocab();
  std::vector<WerReport> per(utts.size());
  std::vector<std::vector<TokenId>> out(utts.size());
  ParallelFor(utts.size(), threads, [&](size_t i) {
    const Acoustics ac = ToAcoustics(utts[i]);
    DecodeOptions o;
    o.beam = beam;
    o.max_len = utts[i].symbols.size() + 1;  // every word takes >= 1 frame
    NBest nb = Decode(scorers, weights, &ac, {}, o);
    if (!nb.entries.empty()) out[i] = nb.entries[0].tokens;
    per[i] = AlignCounts(Words(vocab, utts[i].words), Words(vocab, out[i]));
  });
  WerReport total;
  for (const auto &w : per) total += w;
  if (hyps) *hyps = std::move(out);
  return total;
}

FusionEvalResult EvalFusion(const FusionExperiment &exp, int threads) {
  const auto t0 = std::chrono::steady_clock::now();
  exp.task.Validate();
  const Vocabulary &vocab = exp.task.vocab;
  HmmTask target = exp.task;
  target.lm = exp.target_lm;
  target.Validate();

  const auto test = Generate(target, DeriveSeed(exp.seed, "test"), exp.test_utterances,
                             {10, "test"}, threads);
  const auto dev = exp.tune ? Generate(target, DeriveSeed(exp.seed, "dev"),
                                       exp.dev_utterances, {10, "dev"}, threads)
                            : std::vector<SyntheticUtterance>{};

  // Held-out text for reporting LM quality.
  const auto target_heldout = SampleSentences(vocab, exp.target_lm,
                                              DeriveSeed(exp.seed, "target-heldout"), 2000);
  const auto source_heldout = SampleSentences(vocab, exp.task.lm,
                                              DeriveSeed(exp.seed, "source-heldout"), 2000);

  ScorerPtr external, internal;
  if (exp.true_external_lm) {
    external = BigramScorer::FromProbs(vocab, exp.target_lm, "target-lm");
  } else {
    const auto text = SampleSentences(vocab, exp.target_lm,
                                      DeriveSeed(exp.seed, "target-text"),
                                      exp.lm_text_sentences);
    external = TrainToyLm(vocab, text, exp.lm_training).lm;
  }
  if (exp.exact_internal_lm) {
    internal = ExactInternalLm(exp.task);
  } else {
    // Stands in for an LM trained on the acoustic training transcripts.
    const auto text = SampleSentences(vocab, exp.task.lm,
                                      DeriveSeed(exp.seed, "source-text"),
                                      exp.lm_text_sentences);
    internal = TrainToyLm(vocab, text, exp.lm_training).lm;
  }
  auto e2e = std::make_shared<ExactE2EScorer>(exp.task);

  FusionEvalResult result;
  result.test_utterances = test.size();
  result.dev_utterances = dev.size();
  result.external_lm_cross_entropy = CrossEntropy(*external, target_heldout);
  result.internal_lm_cross_entropy = CrossEntropy(*internal, source_heldout);

  ScorerSet none{{e2e}, {}};
  ScorerSet shallow{{e2e}, {external}};
  ScorerSet ratio{{e2e}, {external, internal}};

  auto dev_wer = [&](const ScorerSet &set, const FusionWeights &w) {
    const WerReport r = DecodeCorpus(dev, set, w, exp.beam, threads);
    return static_cast<double>(r.errors());
  };

  double shallow_lm = exp.shallow_lm;
  double ratio_lm = exp.ratio_lm, ratio_int = exp.ratio_internal;
  if (exp.tune) {
    // Grid searches on the dev set; ties keep the earlier setting.
    double best = std::numeric_limits<double>::infinity();
    for (double g : exp.grid) {
      const double e = dev_wer(shallow, Weights(g, 0, exp.length, false, true));
      if (e < best) {
        best = e;
        shallow_lm = g;
      }
    }
    // Full grid for the ratio pair; (shallow_lm, 0) is shallow fusion, so
    // the dev error can only match or improve on it.
    ratio_lm = shallow_lm;
    ratio_int = 0.0;
    best = dev_wer(ratio, Weights(ratio_lm, ratio_int, exp.length, true, true));
    for (double lm : exp.grid)
      for (double in : exp.grid) {
        const double e = dev_wer(ratio, Weights(lm, in, exp.length, true, true));
        if (e < best) {
          best = e;
          ratio_lm = lm;
          ratio_int = in;
        }
      }
  }

  struct System {
    const char *name;
    const ScorerSet *set;
    FusionWeights w;
    double lm, in;
  };
  const std::vector<System> systems{
      {"no-lm", &none, Weights(0, 0, exp.length, false, false), 0.0, 0.0},
      {"shallow", &shallow, Weights(shallow_lm, 0, exp.length, false, true), shallow_lm, 0.0},
      {"probability-ratio", &ratio, Weights(ratio_lm, ratio_int, exp.length, true, true),
       ratio_lm, ratio_int}};
  for (const auto &s : systems) {
    FusionSystemResult r;
    r.name = s.name;
    r.lm_weight = s.lm;
    r.internal_weight = s.in;
    r.test = DecodeCorpus(test, *s.set, s.w, exp.beam, threads);
    if (!dev.empty()) r.dev = DecodeCorpus(dev, *s.set, s.w, exp.beam, threads);
    result.systems.push_back(r);
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

std::string FormatFusionTable(const FusionEvalResult &r) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-18s %8s %8s %8s %6s %6s %6s %7s\n", "system",
                "lambda_lm", "lambda_int", "WER%", "S", "D", "I", "N");
  out << buf;
  for (const auto &s : r.systems) {
    std::snprintf(buf, sizeof(buf), "%-18s %9.2f %10.2f %8.2f %6zu %6zu %6zu %7zu\n",
                  s.name.c_str(), s.lm_weight, s.internal_weight, 100.0 * s.test.wer(),
                  s.test.substitutions, s.test.deletions, s.test.insertions,
                  s.test.ref_words);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf),
                "test utterances %zu, dev utterances %zu; LM cross-entropy "
                "external %.4f, internal %.4f nats/token\n",
                r.test_utterances, r.dev_utterances, r.external_lm_cross_entropy,
                r.internal_lm_cross_entropy);
  out << buf;
  return out.str();
}

nlohmann::json FusionResultToJson(const FusionEvalResult &r) {
  auto wer = [](const WerReport &w) {
    nlohmann::json j{{"substitutions", w.substitutions},
                     {"deletions", w.deletions},
                     {"insertions", w.insertions},
                     {"ref_words", w.ref_words}};
    j["wer"] = w.ref_words ? nlohmann::json(w.wer()) : nlohmann::json(nullptr);
    return j;
  };
  nlohmann::json j;
  j["test_utterances"] = r.test_utterances;
  j["dev_utterances"] = r.dev_utterances;
  j["external_lm_cross_entropy"] = r.external_lm_cross_entropy;
  j["internal_lm_cross_entropy"] = r.internal_lm_cross_entropy;
  for (const auto &s : r.systems)
    j["systems"].push_back({{"name", s.name},
                            {"lambda_lm", s.lm_weight},
                            {"lambda_internal", s.internal_weight},
                            {"test", wer(s.test)},
                            {"dev", wer(s.dev)}});
  return j;
}

}  // namespace fusekit

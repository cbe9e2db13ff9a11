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

#include "fusekit/pipeline/decode_job.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "fusekit/common/binary_io.h"
#include "fusekit/common/error.h"
#include "fusekit/common/parallel.h"
#include "fusekit/eval/wer.h"
#include "fusekit/features/io.h"
#include "fusekit/scorers/context.h"
#include "fusekit/scorers/ngram.h"
#include "fusekit/scorers/table_scorer.h"

namespace fusekit {

ContextMode ParseContextMode(const std::string &name) {
  if (name == "none") return ContextMode::kNone;
  if (name == "hypothesis") return ContextMode::kHypothesis;
  if (name == "reference") return ContextMode::kReference;
  Fail(Errc::kInvalidArgument,
       "unknown context mode '" + name + "' (none|hypothesis|reference)");
}

std::string ContextModeName(ContextMode mode) {
  switch (mode) {
    case ContextMode::kNone: return "none";
    case ContextMode::kHypothesis: return "hypothesis";
    case ContextMode::kReference: return "reference";
  }
  return "?";
}

namespace {

bool EndsWith(const std::string &s, const std::string &suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// .json files are table scorers, anything else is ARPA.
ScorerPtr LoadLm(const std::string &path, const Vocabulary &vocab) {
  if (EndsWith(path, ".json")) {
    auto t = TableScorer::Load(path);
    Check(!t->needs_acoustics(), Errc::kInvalidArgument,
          path + ": end-to-end table given as an LM");
    Check(t->vocab() == vocab, Errc::kInvalidArgument,
          path + ": vocabulary differs from the E2E model");
    return t;
  }
  return NgramScorer::Load(path, vocab);
}

nlohmann::json Finite(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

nlohmann::json Finite(const std::vector<double> &v) {
  nlohmann::json out = nlohmann::json::array();
  for (double x : v) out.push_back(Finite(x));
  return out;
}

}  // namespace

DecodeModels LoadDecodeModels(const DecodeSpec &spec) {
  Check(!spec.e2e.empty(), Errc::kInvalidArgument,
        "decode: at least one E2E model is required");
  FusionConfig cfg = spec.weights.empty() ? FusionConfig{} : LoadFusionConfig(spec.weights);

  DecodeModels m;
  for (const auto &p : spec.e2e) {
    auto t = TableScorer::Load(p);
    Check(t->needs_acoustics(), Errc::kInvalidArgument,
          p + ": not an end-to-end table (kind must be \"e2e\")");
    if (!m.set.e2e.empty())
      Check(t->vocab() == m.set.e2e[0]->vocab(), Errc::kInvalidArgument,
            p + ": vocabulary differs from the first E2E model");
    m.set.e2e.push_back(std::move(t));
  }
  const Vocabulary &vocab = m.set.e2e[0]->vocab();
  for (const auto &p : spec.lm) m.set.lm.push_back(LoadLm(p, vocab));

  m.weights = cfg.Resolve(m.set.lm.size(), m.set.e2e.size());
  Check(spec.internal_lm.empty() == !cfg.internal_lm.has_value(),
        Errc::kInvalidArgument,
        spec.internal_lm.empty()
            ? "weights set internal_lm but no internal LM file was given"
            : "an internal LM was given but the weights set no internal_lm");
  if (!spec.internal_lm.empty())
    AddProbabilityRatio(m.set, m.weights, LoadLm(spec.internal_lm, vocab),
                        *cfg.internal_lm, cfg.internal_lm_beta);
  m.set.Validate(m.weights);

  m.options = cfg.decode;
  if (spec.beam) m.options.beam = *spec.beam;
  if (spec.nbest) m.options.nbest = *spec.nbest;
  m.options.Validate();

  const FusionWeights &w = m.weights;
  m.weights_json = {
      {"e2e", w.e2e},
      {"lm", w.lm},
      {"coverage", w.coverage},
      {"tau", w.tau},
      {"length", w.length},
      {"e2e_beta", w.e2e_beta},
      {"lm_beta", w.lm_beta},
      {"beam", m.options.beam},
      {"max_len", m.options.max_len},
      {"nbest", m.options.nbest},
      {"incremental_coverage", m.options.incremental_coverage},
      {"early_stop", m.options.early_stop},
  };
  return m;
}

std::vector<DecodeInput> DecodeInputsFromManifest(const Manifest &manifest,
                                                  const std::string &manifest_path) {
  std::vector<DecodeInput> out;
  out.reserve(manifest.size());
  for (const auto &r : manifest.records())
    out.push_back({r.utt_id, r.conversation, r.channel, r.order,
                   ResolvePath(manifest_path, r.path), r.transcript});
  return out;
}

std::vector<DecodeOutput> DecodeAll(const DecodeModels &models,
                                    const std::vector<DecodeInput> &inputs,
                                    ContextMode context, size_t context_words,
                                    int threads) {
  // Group into channels; inputs without a conversation stand alone.
  std::map<std::pair<std::string, std::string>, std::vector<size_t>> groups;
  std::vector<std::vector<size_t>> channels;
  for (size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].conversation.empty() || context == ContextMode::kNone)
      channels.push_back({i});
    else
      groups[{inputs[i].conversation, inputs[i].channel}].push_back(i);
  }
  for (auto &[key, idx] : groups) {
    std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
      return inputs[a].order < inputs[b].order;
    });
    channels.push_back(std::move(idx));
  }

  const Vocabulary &vocab = models.set.vocab();
  std::vector<DecodeOutput> outputs(inputs.size());
  ParallelFor(channels.size(), threads, [&](size_t c) {
    std::vector<std::vector<TokenId>> history;
    for (size_t k = 0; k < channels[c].size(); ++k) {
      const size_t i = channels[c][k];
      const DecodeInput &in = inputs[i];
      FeatureFile ff = ReadFeatureFile(in.feature_path);
      Acoustics ac;
      ac.utterance_id = in.utt_id;
      ac.features = std::move(ff.features);
      if (ff.ivector) ac.ivector = *ff.ivector;

      std::vector<TokenId> ctx;
      if (context != ContextMode::kNone)
        ctx = BuildCrossUtteranceContext(history, k, context_words);

      DecodeOutput &out = outputs[i];
      out.utt_id = in.utt_id;
      out.context_words = ctx.size();
      try {
        out.nbest = Decode(models.set, models.weights, &ac, ctx, models.options);
      } catch (const Error &e) {
        throw Error(e.code(), in.utt_id + ": " + e.what());
      }
      std::vector<TokenId> best;
      if (!out.nbest.entries.empty()) best = out.nbest.entries[0].tokens;
      out.words = vocab.Decode(best);

      if (context == ContextMode::kReference) {
        // Reference words outside the vocabulary cannot be LM history.
        std::vector<TokenId> ref;
        for (const auto &w : Tokenize(in.reference))
          if (auto id = vocab.Find(w)) ref.push_back(*id);
        history.push_back(std::move(ref));
      } else {
        best.erase(std::remove(best.begin(), best.end(), vocab.eos()), best.end());
        history.push_back(std::move(best));
      }
    }
  });
  return outputs;
}

TrnEntries ToTrn(const std::vector<DecodeOutput> &outputs) {
  TrnEntries trn;
  trn.reserve(outputs.size());
  for (const auto &o : outputs) trn.emplace_back(o.utt_id, o.words);
  return trn;
}

nlohmann::json DecodeSidecar(const DecodeModels &models,
                             const std::vector<DecodeOutput> &outputs) {
  const Vocabulary &vocab = models.set.vocab();
  nlohmann::json scorers = {{"e2e", nlohmann::json::array()},
                            {"lm", nlohmann::json::array()}};
  for (const auto &s : models.set.e2e) scorers["e2e"].push_back(s->name());
  for (const auto &s : models.set.lm) scorers["lm"].push_back(s->name());

  nlohmann::json utts = nlohmann::json::array();
  for (const auto &o : outputs) {
    nlohmann::json nb = nlohmann::json::array();
    for (const auto &e : o.nbest.entries) {
      std::vector<std::string> toks;
      for (TokenId t : e.tokens) toks.push_back(vocab.token(t));
      nb.push_back({{"words", vocab.Decode(e.tokens)},
                    {"tokens", toks},
                    {"total", Finite(e.total)},
                    {"terminated", e.terminated},
                    {"terms",
                     {{"e2e", Finite(e.terms.e2e)},
                      {"lm", Finite(e.terms.lm)},
                      {"coverage", Finite(e.terms.coverage)},
                      {"covered_frames", e.terms.covered_frames},
                      {"length", Finite(e.terms.length)}}}});
    }
    utts.push_back({{"utt_id", o.utt_id},
                    {"context_words", o.context_words},
                    {"unterminated", o.nbest.unterminated},
                    {"nbest", nb}});
  }
  return {{"scorers", scorers}, {"weights", models.weights_json}, {"utterances", utts}};
}

void WriteDecodeOutputs(const std::string &trn_path, const DecodeModels &models,
                        const std::vector<DecodeOutput> &outputs) {
  WriteTrn(trn_path, ToTrn(outputs));
  binio::WriteStringToFile(trn_path + ".json",
                           DecodeSidecar(models, outputs).dump(2) + "\n");
}

}  // namespace fusekit

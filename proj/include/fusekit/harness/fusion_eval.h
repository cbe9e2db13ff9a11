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

// harness/fusion_eval.h
// Domain-shift experiment on the synthetic task: the E2E model is exact for
// the source domain, test data come from a target-domain LM, and the
// external LM is trained on target-domain text. Compares no-LM decoding,
// shallow fusion and probability-ratio fusion by corpus WER.

#ifndef FUSEKIT_HARNESS_FUSION_EVAL_H_
#define FUSEKIT_HARNESS_FUSION_EVAL_H_

#include <string>
#include <vector>

#include <json.hpp>

#include "fusekit/eval/wer.h"
#include "fusekit/fusion/fusion.h"
#include "fusekit/harness/task.h"
#include "fusekit/harness/toy_lm.h"

namespace fusekit {

struct FusionExperiment {
  HmmTask task;           // source domain; defines the exact E2E model
  BigramTable target_lm;  // test-domain word statistics
  size_t test_utterances = 1000;
  size_t dev_utterances = 300;
  size_t lm_text_sentences = 20000;
  uint64_t seed = 1;
  bool true_external_lm = false;  // else trained on target text
  bool exact_internal_lm = false; // else trained on source transcripts
  ToyLmOptions lm_training;
  size_t beam = 8;
  double length = 0.0;
  // Fixed weights, or starting point and grid when tuning on the dev set.
  double shallow_lm = 0.5;
  double ratio_lm = 1.0;
  double ratio_internal = 1.0;
  bool tune = true;
  std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 2.0};
};

/// Same file as the task, plus:
///   [target.lm]   rows like [task.lm]
///   [experiment]  test_utterances, dev_utterances, lm_text_sentences, seed,
///                 external_lm = "trained"|"true", internal_lm =
///                 "trained"|"exact", beam, length, tune, grid,
///                 shallow_lm, ratio_lm, ratio_internal
///   [experiment.lm_training] optimizer, epochs, batch_size, lr,
///                 weight_decay, sgd_lr, seed
FusionExperiment ParseFusionExperiment(const std::string &toml_text);
FusionExperiment LoadFusionExperiment(const std::string &path);

struct FusionSystemResult {
  std::string name;  // "no-lm", "shallow", "probability-ratio"
  double lm_weight = 0.0;
  double internal_weight = 0.0;  // magnitude, applied negatively
  WerReport test;
  WerReport dev;
};

struct FusionEvalResult {
  std::vector<FusionSystemResult> systems;
  size_t test_utterances = 0;
  size_t dev_utterances = 0;
  double external_lm_cross_entropy = 0.0;  // on held-out target text
  double internal_lm_cross_entropy = 0.0;  // on held-out source text
  double seconds = 0.0;
};

FusionEvalResult EvalFusion(const FusionExperiment &exp, int threads = 1);

/// Corpus WER of one weight setting on a set of utterances.
WerReport DecodeCorpus(const std::vector<SyntheticUtterance> &utts,
                       const ScorerSet &scorers, const FusionWeights &weights,
                       size_t beam, int threads,
                       std::vector<std::vector<TokenId>> *hyps = nullptr);

std::string FormatFusionTable(const FusionEvalResult &r);
nlohmann::json FusionResultToJson(const FusionEvalResult &r);

}  // namespace fusekit

#endif  // FUSEKIT_HARNESS_FUSION_EVAL_H_

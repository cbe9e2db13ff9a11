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

// pipeline/decode_job.h

#ifndef FUSEKIT_PIPELINE_DECODE_JOB_H_
#define FUSEKIT_PIPELINE_DECODE_JOB_H_

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fusekit/eval/manifest.h"
#include "fusekit/fusion/fusion.h"

namespace fusekit {

// Where the LM history of an utterance comes from.
enum class ContextMode {
  kNone,        // every utterance starts from <s>
  kHypothesis,  // previous decoded utterances of the same channel
  kReference,   // previous reference transcripts (oracle history)
};

ContextMode ParseContextMode(const std::string &name);
std::string ContextModeName(ContextMode mode);

struct DecodeSpec {
  std::vector<std::string> e2e;  // table scorer JSON files
  std::vector<std::string> lm;   // ARPA files
  std::string internal_lm;       // ARPA; empty for none
  std::string weights;           // weights TOML; empty for defaults
  std::optional<size_t> beam;    // override the weights file
  std::optional<size_t> nbest;
  ContextMode context = ContextMode::kHypothesis;
  size_t context_words = 150;
};

struct DecodeModels {
  ScorerSet set;
  FusionWeights weights;
  DecodeOptions options;
  nlohmann::json weights_json;  // resolved weights, for reports
};

/// Loads the scorers; LMs are mapped onto the vocabulary of the first E2E
/// model. Internal LMs enter as an extra negatively weighted LM.
DecodeModels LoadDecodeModels(const DecodeSpec &spec);

struct DecodeInput {
  std::string utt_id;
  std::string conversation;  // empty: no cross-utterance context
  std::string channel;
  int64_t order = 0;
  std::string feature_path;
  std::string reference;  // used by ContextMode::kReference only
};

struct DecodeOutput {
  std::string utt_id;
  std::string words;  // best hypothesis, space separated
  NBest nbest;
  size_t context_words = 0;
};

std::vector<DecodeInput> DecodeInputsFromManifest(const Manifest &manifest,
                                                  const std::string &manifest_path);

/// Decodes every input. Channels run in parallel; utterances within a
/// channel run in order so earlier hypotheses can serve as context.
/// Output order follows the input order.
std::vector<DecodeOutput> DecodeAll(const DecodeModels &models,
                                    const std::vector<DecodeInput> &inputs,
                                    ContextMode context, size_t context_words,
                                    int threads);

TrnEntries ToTrn(const std::vector<DecodeOutput> &outputs);

/// N-best lists with per-term score breakdowns.
nlohmann::json DecodeSidecar(const DecodeModels &models,
                             const std::vector<DecodeOutput> &outputs);

/// Writes `trn_path` and `trn_path + ".json"`.
void WriteDecodeOutputs(const std::string &trn_path, const DecodeModels &models,
                        const std::vector<DecodeOutput> &outputs);

}  // namespace fusekit

#endif  // FUSEKIT_PIPELINE_DECODE_JOB_H_

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

// pipeline/demo.h

#ifndef FUSEKIT_PIPELINE_DEMO_H_
#define FUSEKIT_PIPELINE_DEMO_H_

#include <cstdint>
#include <string>

#include "fusekit/scorers/table_scorer.h"

namespace fusekit {

struct DemoOptions {
  size_t utterances = 40;
  uint64_t seed = 1;
  int sample_rate_hz = 8000;
  /// Utterance-specific E2E rows exported per utterance.
  size_t table_prefixes = 1000;
  size_t lm_sentences = 5000;
};

/// Table rows of `e2e` for one utterance: the `max_prefixes` prefixes with
/// the highest posterior mass, found best first from <s>. The greedy path's
/// attention columns are attached.
TableScorer::Tables ExportUtteranceTables(const Scorer &e2e, const Acoustics &ac,
                                          size_t max_prefixes, size_t max_len);

/// Writes a self-contained demo run into `out_dir` from a fusion experiment
/// file (task + target LM): target-domain WAVs (one tone per acoustic
/// symbol, per-speaker gain and pitch), manifest.tsv, a table E2E model
/// exported from the exact source-domain scorer, trained external and
/// internal bigram LMs (ARPA), weights.toml, features.toml, a copy of the
/// task file and run.toml.
void MakeDemo(const std::string &task_path, const std::string &out_dir,
              const DemoOptions &options);

}  // namespace fusekit

#endif  // FUSEKIT_PIPELINE_DEMO_H_

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

// pipeline/run.h

#ifndef FUSEKIT_PIPELINE_RUN_H_
#define FUSEKIT_PIPELINE_RUN_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fusekit/features/feature_matrix.h"
#include "fusekit/pipeline/decode_job.h"
#include "fusekit/speaker/ivector.h"
#include "fusekit/speaker/ubm.h"

namespace fusekit {

/// Run config (TOML). Relative paths are taken from the config's directory.
///
///   [run]
///   name = "demo"
///   output_dir = "out"
///   manifest = "manifest.tsv"
///   seed = 1
///   threads = 1
///   stages = ["features", "speaker", "decode", "score", "harness"]
///
///   [features]          # manifest paths are WAV files
///   config = "features.toml"
///
///   [speaker]           # given model files are used, else trained here
///   ubm = ""            tmat = ""
///   components = 16     ubm_iterations = 10     max_ubm_frames = 20000
///   rank = 8            tmat_iterations = 5
///
///   [decode]
///   e2e = ["e2e.json"]  lm = ["lm.arpa"]   internal_lm = "int.arpa"
///   weights = "weights.toml"  context = "hypothesis"  context_words = 150
///
///   [harness]
///   task = "fusion_task.toml"   # optional: test_utterances, dev_utterances,
///                               # lm_text_sentences overrides
///
/// Without a features stage the manifest paths must be feature files.
struct RunConfig {
  std::string config_path;
  std::string config_text;
  std::string name = "run";
  std::string output_dir;
  std::string manifest;
  uint64_t seed = 0;
  int threads = 1;
  std::vector<std::string> stages;

  std::string feature_config;

  std::string ubm_model;
  std::string tmat_model;
  UbmTrainOptions ubm{16, 10, 0, 1e-4, 1e-6};
  TMatrixTrainOptions tmat{8, 5, 0, 0.1};
  size_t max_ubm_frames = 20000;

  DecodeSpec decode;

  std::string harness_task;
  std::optional<size_t> harness_test;
  std::optional<size_t> harness_dev;
  std::optional<size_t> harness_lm_text;

  bool HasStage(const std::string &stage) const;
};

RunConfig ParseRunConfig(const std::string &toml_text,
                         const std::string &config_path);
RunConfig LoadRunConfig(const std::string &path);

/// Checks every input the requested stages will read, and parses the
/// referenced configs, before anything runs. Throws listing all missing
/// files at once.
void ValidateRunInputs(const RunConfig &cfg);

/// Runs the stages in pipeline order and writes <output_dir>/report.json.
/// A failing stage aborts the run with an error naming the stage. Returns
/// the report.
nlohmann::json RunPipeline(const RunConfig &cfg);

/// Frames as rows.
Eigen::MatrixXd FeaturesToEigen(const FeatureMatrix &f);
/// Rows from all utterances, evenly subsampled to at most `max_frames`.
Eigen::MatrixXd PoolFrames(const std::vector<FeatureMatrix> &feats, size_t max_frames);

/// Output layout, relative to output_dir.
std::string RunFeaturePath(const RunConfig &cfg, const std::string &utt_id);
std::string RunHypothesisPath(const RunConfig &cfg);

}  // namespace fusekit

#endif  // FUSEKIT_PIPELINE_RUN_H_

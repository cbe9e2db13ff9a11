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

// features/config.h

#ifndef FUSEKIT_FEATURES_CONFIG_H_
#define FUSEKIT_FEATURES_CONFIG_H_

#include <cstdint>
#include <string>

namespace fusekit {

enum class Compression { kLog, kRoot7 };
enum class WindowType { kHann, kRectangular };

struct FeatureConfig {
  int sample_rate_hz = 8000;
  double step_ms = 10.0;
  double window_ms = 25.0;
  int n_mels = 80;
  double fmin_hz = 20.0;
  double fmax_hz = 4000.0;
  Compression compression = Compression::kLog;
  WindowType window = WindowType::kHann;
  int stack = 1;
  int skip = 1;
  bool normalize = true;

  /// 80-dim log-Mel, 25 ms window shifted by 10 ms.
  static FeatureConfig Baseline();
  /// 20-dim 7th-root Mel at 2.5 ms / 10 ms, two frames stacked, every
  /// second frame skipped.
  static FeatureConfig HighResolution();

  int WindowSamples() const;
  double StepSamples() const;
  void Validate() const;
};

struct SpecAugmentConfig {
  int n_time_masks = 0;
  int max_time_width_frames = 0;
  int n_freq_masks = 0;
  int max_freq_width_channels = 0;
};

struct PerturbConfig {
  double sem_prob = 0.1;
  double sem_peak_percentile = 95.0;
  double sem_threshold_db_lo = -30.0;
  double sem_threshold_db_hi = -20.0;
  double hec_prob = 0.4;
  double hec_percentile_lo = 80.0;
  double hec_percentile_hi = 100.0;
  SpecAugmentConfig specaugment;
  uint64_t seed = 0;

  /// All perturbations off; the pipeline is then seed-independent.
  static PerturbConfig Disabled();
  void Validate() const;
};

struct FeaturePipelineConfig {
  FeatureConfig features;
  PerturbConfig perturb;
};

/// Reads [features] and [perturb] tables; missing keys keep defaults.
FeaturePipelineConfig LoadFeaturePipelineConfig(const std::string &path);
FeaturePipelineConfig ParseFeaturePipelineConfig(const std::string &toml_text);

}  // namespace fusekit

#endif  // FUSEKIT_FEATURES_CONFIG_H_

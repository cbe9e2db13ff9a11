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

#include "fusekit/features/config.h"

#include <cmath>

#include "fusekit/common/binary_io.h"
#include "fusekit/common/error.h"
#include "fusekit/common/toml_util.h"

namespace fusekit {

FeatureConfig FeatureConfig::Baseline() { return FeatureConfig{}; }

FeatureConfig FeatureConfig::HighResolution() {
  FeatureConfig cfg;
  cfg.step_ms = 2.5;
  cfg.window_ms = 10.0;
  cfg.n_mels = 20;
  cfg.compression = Compression::kRoot7;
  cfg.stack = 2;
  cfg.skip = 2;
  return cfg;
}

int FeatureConfig::WindowSamples() const {
  return static_cast<int>(std::lround(window_ms * sample_rate_hz / 1000.0));
}

double FeatureConfig::StepSamples() const {
  return step_ms * sample_rate_hz / 1000.0;
}

void FeatureConfig::Validate() const {
  Check(sample_rate_hz > 0, Errc::kInvalidArgument,
        "sample_rate_hz must be positive");
  Check(step_ms > 0.0, Errc::kInvalidArgument, "step_ms must be positive");
  Check(window_ms >= step_ms, Errc::kInvalidArgument,
        "window_ms must be >= step_ms");
  Check(n_mels >= 1, Errc::kInvalidArgument, "n_mels must be >= 1");
  Check(fmin_hz >= 0.0 && fmin_hz < fmax_hz, Errc::kInvalidArgument,
        "need 0 <= fmin_hz < fmax_hz");
  Check(fmax_hz <= sample_rate_hz / 2.0, Errc::kInvalidArgument,
        "fmax_hz above Nyquist");
  Check(stack >= 1 && skip >= 1, Errc::kInvalidArgument,
        "stack and skip must be >= 1");
  Check(WindowSamples() >= 1, Errc::kInvalidArgument,
        "window shorter than one sample");
}

PerturbConfig PerturbConfig::Disabled() {
  PerturbConfig cfg;
  cfg.sem_prob = 0.0;
  cfg.hec_prob = 0.0;
  return cfg;
}

void PerturbConfig::Validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  auto pct = [](double p) { return p >= 0.0 && p <= 100.0; };
  Check(prob(sem_prob) && prob(hec_prob), Errc::kInvalidArgument,
        "perturbation probabilities must lie in [0, 1]");
  Check(pct(sem_peak_percentile), Errc::kInvalidArgument,
        "sem_peak_percentile must lie in [0, 100]");
  Check(sem_threshold_db_lo <= sem_threshold_db_hi, Errc::kInvalidArgument,
        "SEM dB range is empty");
  Check(pct(hec_percentile_lo) && pct(hec_percentile_hi) &&
            hec_percentile_lo <= hec_percentile_hi,
        Errc::kInvalidArgument, "HEC percentile range invalid");
  const auto &sa = specaugment;
  Check(sa.n_time_masks >= 0 && sa.max_time_width_frames >= 0 &&
            sa.n_freq_masks >= 0 && sa.max_freq_width_channels >= 0,
        Errc::kInvalidArgument, "SpecAugment parameters must be >= 0");
}

using tomlu::Read;
using tomlu::ReadRange;

FeaturePipelineConfig ParseFeaturePipelineConfig(const std::string &toml_text) {
  const toml::table root = tomlu::Parse(toml_text, "feature config");
  FeaturePipelineConfig out;
  if (const auto *f = root["features"].as_table()) {
    FeatureConfig &c = out.features;
    if (auto preset = (*f)["preset"].value<std::string>()) {
      if (*preset == "baseline") {
        c = FeatureConfig::Baseline();
      } else if (*preset == "highres") {
        c = FeatureConfig::HighResolution();
      } else {
        Fail(Errc::kParse, "unknown feature preset: " + *preset);
      }
    }
    Read(*f, "sample_rate_hz", c.sample_rate_hz);
    Read(*f, "step_ms", c.step_ms);
    Read(*f, "window_ms", c.window_ms);
    Read(*f, "n_mels", c.n_mels);
    Read(*f, "fmin_hz", c.fmin_hz);
    Read(*f, "fmax_hz", c.fmax_hz);
    Read(*f, "stack", c.stack);
    Read(*f, "skip", c.skip);
    Read(*f, "normalize", c.normalize);
    if (auto comp = (*f)["compression"].value<std::string>()) {
      if (*comp == "log") {
        c.compression = Compression::kLog;
      } else if (*comp == "root7") {
        c.compression = Compression::kRoot7;
      } else {
        Fail(Errc::kParse, "unknown compression: " + *comp);
      }
    }
    if (auto win = (*f)["window"].value<std::string>()) {
      if (*win == "hann") {
        c.window = WindowType::kHann;
      } else if (*win == "rectangular") {
        c.window = WindowType::kRectangular;
      } else {
        Fail(Errc::kParse, "unknown window: " + *win);
      }
    }
  }
  if (const auto *p = root["perturb"].as_table()) {
    PerturbConfig &c = out.perturb;
    Read(*p, "sem_prob", c.sem_prob);
    Read(*p, "sem_peak_percentile", c.sem_peak_percentile);
    ReadRange(*p, "sem_threshold_db_range", c.sem_threshold_db_lo,
              c.sem_threshold_db_hi);
    Read(*p, "hec_prob", c.hec_prob);
    ReadRange(*p, "hec_percentile_range", c.hec_percentile_lo,
              c.hec_percentile_hi);
    Read(*p, "seed", c.seed);
    if (const auto *sa = (*p)["specaugment"].as_table()) {
      Read(*sa, "n_time_masks", c.specaugment.n_time_masks);
      Read(*sa, "max_time_width_frames", c.specaugment.max_time_width_frames);
      Read(*sa, "n_freq_masks", c.specaugment.n_freq_masks);
      Read(*sa, "max_freq_width_channels",
           c.specaugment.max_freq_width_channels);
    }
  } else {
    out.perturb = PerturbConfig::Disabled();
  }
  out.features.Validate();
  out.perturb.Validate();
  return out;
}

FeaturePipelineConfig LoadFeaturePipelineConfig(const std::string &path) {
  return ParseFeaturePipelineConfig(binio::ReadFileToString(path));
}

}  // namespace fusekit

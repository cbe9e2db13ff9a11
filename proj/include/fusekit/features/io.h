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

// features/io.h
// WAV input and the FEAT1 feature file format.
//
// FEAT1 layout (little-endian):
//   "FEAT1" | u32 frames | u32 channels | f32 frame_step_ms |
//   frames*channels f32, row-major
// optionally followed by an i-vector block:
//   "IVEC1" | u32 dim | dim f32

#ifndef FUSEKIT_FEATURES_IO_H_
#define FUSEKIT_FEATURES_IO_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fusekit/features/feature_matrix.h"

namespace fusekit {

struct Waveform {
  int sample_rate_hz = 0;
  std::vector<double> samples;  // PCM16 scaled to the int16 range
};

/// PCM 16-bit little-endian mono WAV at 8 or 16 kHz.
Waveform ReadWav(const std::string &path);
Waveform ParseWav(const std::string &bytes);
void WriteWav(const std::string &path, const Waveform &wav);

struct FeatureFile {
  FeatureMatrix features;
  std::optional<std::vector<double>> ivector;
};

std::string SerializeFeatureFile(const FeatureMatrix &features,
                                 const std::vector<double> *ivector = nullptr);
FeatureFile ParseFeatureFile(const std::string &bytes);

void WriteFeatureFile(const std::string &path, const FeatureMatrix &features,
                      const std::vector<double> *ivector = nullptr);
FeatureFile ReadFeatureFile(const std::string &path);

/// Rewrites a feature file with the given i-vector block (replacing any
/// existing one).
void AppendIvector(const std::string &path, std::span<const double> ivector);

}  // namespace fusekit

#endif  // FUSEKIT_FEATURES_IO_H_

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

// features/pipeline.h

#ifndef FUSEKIT_FEATURES_PIPELINE_H_
#define FUSEKIT_FEATURES_PIPELINE_H_

#include <span>

#include "fusekit/common/rng.h"
#include "fusekit/features/config.h"
#include "fusekit/features/feature_matrix.h"
#include "fusekit/features/io.h"

namespace fusekit {

/// Waveform -> amplitude Mel energies (frame, window, |FFT|, filterbank).
FeatureMatrix ComputeMelAmplitudes(std::span<const double> samples,
                                   const FeatureConfig &cfg);

/// Full front-end in fixed order:
///   frame -> spectrum -> Mel -> SEM -> HEC -> compress -> normalize
///   -> SpecAugment -> stack/skip
/// With all perturbations disabled the result does not depend on rng.
FeatureMatrix ExtractFeatures(const Waveform &wav, const FeatureConfig &cfg,
                              const PerturbConfig &perturb, Rng &rng);

}  // namespace fusekit

#endif  // FUSEKIT_FEATURES_PIPELINE_H_

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

// features/perturb.h
// Randomized Mel-domain perturbations: small-energy masking (SEM),
// high-energy clipping (HEC) and SpecAugment-style masking.

#ifndef FUSEKIT_FEATURES_PERTURB_H_
#define FUSEKIT_FEATURES_PERTURB_H_

#include <span>
#include <vector>

#include "fusekit/common/rng.h"
#include "fusekit/features/config.h"
#include "fusekit/features/feature_matrix.h"

namespace fusekit {

/// Percentile with linear interpolation between order statistics
/// (inclusive definition, pct in [0, 100]).
double Percentile(std::vector<double> values, double pct);

/// What a perturbation did; returned alongside the output for tests and
/// run reports.
struct PerturbTrace {
  bool fired = false;
  double threshold = 0.0;             // SEM: drawn dB threshold
  std::vector<double> channel_limits;  // HEC: eta_c per channel
  double scale = 1.0;                  // HEC: energy-preserving rescale
};

/// Small-energy masking. With probability sem_prob, bins more than the drawn
/// threshold below the percentile peak (20*log10 ratio) are reset to the
/// channel's utterance-level mean of the unmasked input.
FeatureMatrix SemMask(const FeatureMatrix &mel, const PerturbConfig &cfg,
                      Rng &rng, PerturbTrace *trace = nullptr);

/// SEM with a fixed threshold in dB, no coin flip.
FeatureMatrix SemMaskAt(const FeatureMatrix &mel, double peak_percentile,
                        double threshold_db);

/// High-energy clipping: e' = min(eta_c, e) with eta_c the p_c-th percentile
/// of channel c, p_c drawn per channel; then one global rescale so the
/// utterance energy is unchanged.
FeatureMatrix HecClip(const FeatureMatrix &mel, const PerturbConfig &cfg,
                      Rng &rng, PerturbTrace *trace = nullptr);

/// Clips with explicit per-channel limits and rescales. Returns the input
/// unchanged if the clipped total is zero.
FeatureMatrix HecClipAt(const FeatureMatrix &mel,
                        std::span<const double> channel_limits,
                        double *scale = nullptr);

struct MaskRegion {
  enum class Axis { kTime, kFrequency } axis;
  size_t start;
  size_t width;
};

std::vector<MaskRegion> DrawSpecAugmentMasks(size_t frames, size_t channels,
                                             const SpecAugmentConfig &cfg,
                                             Rng &rng);

/// Sets every masked cell to the mean of the input matrix.
FeatureMatrix ApplyMasks(const FeatureMatrix &features,
                         std::span<const MaskRegion> masks);

FeatureMatrix SpecAugment(const FeatureMatrix &features,
                          const SpecAugmentConfig &cfg, Rng &rng);

}  // namespace fusekit

#endif  // FUSEKIT_FEATURES_PERTURB_H_

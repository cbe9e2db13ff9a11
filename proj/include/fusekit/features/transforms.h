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

// features/transforms.h

#ifndef FUSEKIT_FEATURES_TRANSFORMS_H_
#define FUSEKIT_FEATURES_TRANSFORMS_H_

#include "fusekit/features/config.h"
#include "fusekit/features/feature_matrix.h"

namespace fusekit {

inline constexpr double kLogFloor = 1e-10;
inline constexpr double kStddevFloor = 1e-8;

/// ln(max(x, kLogFloor)) or x^(1/7).
FeatureMatrix Compress(const FeatureMatrix &mel, Compression mode);

/// Output frame j concatenates input frames j*skip .. j*skip+stack-1, the
/// tail padded by repeating the last input frame.
FeatureMatrix StackAndSkip(const FeatureMatrix &features, int stack, int skip);

/// Per-channel mean and variance normalization over the utterance.
FeatureMatrix UtteranceNormalize(const FeatureMatrix &features);

}  // namespace fusekit

#endif  // FUSEKIT_FEATURES_TRANSFORMS_H_

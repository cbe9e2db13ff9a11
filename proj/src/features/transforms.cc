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

#include "fusekit/features/transforms.h"

#include <algorithm>
#include <cmath>

#include "fusekit/common/error.h"

namespace fusekit {

FeatureMatrix Compress(const FeatureMatrix &mel, Compression mode) {
  Check(mel.kind() == FeatureKind::kAmplitudeMel, Errc::kInvalidArgument,
        "compress expects amplitude Mel input");
  FeatureMatrix out = mel;
  out.set_kind(FeatureKind::kCompressed);
  for (double &v : out.data()) {
    Check(v >= 0.0, Errc::kNumeric, "negative Mel amplitude");
    v = mode == Compression::kLog ? std::log(std::max(v, kLogFloor))
                                  : std::pow(v, 1.0 / 7.0);
  }
  return out;
}

FeatureMatrix StackAndSkip(const FeatureMatrix &features, int stack, int skip) {
  Check(stack >= 1 && skip >= 1, Errc::kInvalidArgument,
        "stack and skip must be >= 1");
  Check(features.kind() != FeatureKind::kAmplitudeMel, Errc::kInvalidArgument,
        "stack_and_skip expects compressed features");
  if (stack == 1 && skip == 1) return features;
  const size_t frames_in = features.frames();
  const size_t dim = features.channels();
  const size_t frames_out = (frames_in + skip - 1) / skip;
  FeatureMatrix out(frames_out, dim * stack, features.frame_step_ms() * skip,
                    FeatureKind::kStacked);
  for (size_t j = 0; j < frames_out; ++j) {
    for (int s = 0; s < stack; ++s) {
      const size_t src = std::min(j * skip + s, frames_in - 1);
      const auto in_row = features.row(src);
      std::copy(in_row.begin(), in_row.end(), out.row(j).begin() + s * dim);
    }
  }
  return out;
}

FeatureMatrix UtteranceNormalize(const FeatureMatrix &features) {
  Check(features.kind() != FeatureKind::kAmplitudeMel, Errc::kInvalidArgument,
        "normalization expects compressed features");
  FeatureMatrix out = features;
  const size_t frames = features.frames();
  if (frames == 0) return out;
  const auto means = features.ChannelMeans();
  for (size_t c = 0; c < features.channels(); ++c) {
    double var = 0.0;
    for (size_t t = 0; t < frames; ++t) {
      const double d = features(t, c) - means[c];
      var += d * d;
    }
    const double sd = std::sqrt(var / frames);
    for (size_t t = 0; t < frames; ++t) {
      // Below the floor the channel is treated as constant.
      out(t, c) = sd < kStddevFloor ? 0.0 : (features(t, c) - means[c]) / sd;
    }
  }
  return out;
}

}  // namespace fusekit

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

#include "fusekit/features/feature_matrix.h"

#include <cmath>
#include <string>

#include "fusekit/common/error.h"

namespace fusekit {

std::string_view FeatureKindName(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kAmplitudeMel: return "amplitude_mel";
    case FeatureKind::kCompressed: return "compressed";
    case FeatureKind::kStacked: return "stacked";
  }
  return "unknown";
}

FeatureMatrix::FeatureMatrix(size_t frames, size_t channels,
                             double frame_step_ms, FeatureKind kind,
                             double fill)
    : frames_(frames),
      channels_(channels),
      frame_step_ms_(frame_step_ms),
      kind_(kind),
      data_(frames * channels, fill) {}

double FeatureMatrix::Total() const {
  double total = 0.0;
  for (double v : data_) total += v;
  return total;
}

std::vector<double> FeatureMatrix::ChannelMeans() const {
  std::vector<double> means(channels_, 0.0);
  if (frames_ == 0) return means;
  for (size_t t = 0; t < frames_; ++t)
    for (size_t c = 0; c < channels_; ++c) means[c] += (*this)(t, c);
  for (double &m : means) m /= static_cast<double>(frames_);
  return means;
}

void FeatureMatrix::Validate() const {
  for (size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i]))
      Fail(Errc::kNumeric, "non-finite feature value at cell " +
                               std::to_string(i));
    if (kind_ == FeatureKind::kAmplitudeMel && data_[i] < 0.0)
      Fail(Errc::kNumeric, "negative amplitude at cell " + std::to_string(i));
  }
}

}  // namespace fusekit

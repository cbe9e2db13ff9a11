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

// features/feature_matrix.h

#ifndef FUSEKIT_FEATURES_FEATURE_MATRIX_H_
#define FUSEKIT_FEATURES_FEATURE_MATRIX_H_

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace fusekit {

enum class FeatureKind { kAmplitudeMel, kCompressed, kStacked };

std::string_view FeatureKindName(FeatureKind kind);

/// Frames x channels grid of features, row-major, with frame-rate metadata.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(size_t frames, size_t channels, double frame_step_ms,
                FeatureKind kind, double fill = 0.0);

  size_t frames() const { return frames_; }
  size_t channels() const { return channels_; }
  double frame_step_ms() const { return frame_step_ms_; }
  FeatureKind kind() const { return kind_; }
  void set_kind(FeatureKind kind) { kind_ = kind; }
  void set_frame_step_ms(double ms) { frame_step_ms_ = ms; }
  bool empty() const { return frames_ == 0; }

  double &operator()(size_t t, size_t c) { return data_[t * channels_ + c]; }
  double operator()(size_t t, size_t c) const {
    return data_[t * channels_ + c];
  }
  std::span<double> row(size_t t) {
    return {data_.data() + t * channels_, channels_};
  }
  std::span<const double> row(size_t t) const {
    return {data_.data() + t * channels_, channels_};
  }
  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  /// Sum over all cells.
  double Total() const;
  /// Per-channel mean over frames.
  std::vector<double> ChannelMeans() const;

  /// Throws kNumeric on non-finite entries or negative amplitudes.
  void Validate() const;

  bool operator==(const FeatureMatrix &other) const = default;

 private:
  size_t frames_ = 0;
  size_t channels_ = 0;
  double frame_step_ms_ = 0.0;
  FeatureKind kind_ = FeatureKind::kAmplitudeMel;
  std::vector<double> data_;
};

}  // namespace fusekit

#endif  // FUSEKIT_FEATURES_FEATURE_MATRIX_H_

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

#include "fusekit/features/perturb.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fusekit/common/error.h"

namespace fusekit {

double Percentile(std::vector<double> values, double pct) {
  Check(!values.empty(), Errc::kInvalidArgument, "percentile of empty set");
  Check(pct >= 0.0 && pct <= 100.0, Errc::kInvalidArgument,
        "percentile outside [0, 100]");
  std::sort(values.begin(), values.end());
  const double rank = pct / 100.0 * static_cast<double>(values.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(rank));
  const size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

void RequireAmplitude(const FeatureMatrix &mel, const char *op) {
  Check(mel.kind() == FeatureKind::kAmplitudeMel, Errc::kInvalidArgument,
        std::string(op) + " expects amplitude Mel input");
}

}  // namespace

FeatureMatrix SemMaskAt(const FeatureMatrix &mel, double peak_percentile,
                        double threshold_db) {
  RequireAmplitude(mel, "SEM");
  if (mel.empty()) return mel;
  const auto cells = mel.data();
  const double peak =
      Percentile(std::vector<double>(cells.begin(), cells.end()),
                 peak_percentile);
  if (!(peak > 0.0)) return mel;  // no reference level

  const auto means = mel.ChannelMeans();
  FeatureMatrix out = mel;
  for (size_t t = 0; t < mel.frames(); ++t) {
    for (size_t c = 0; c < mel.channels(); ++c) {
      const double e = mel(t, c);
      const double db = e > 0.0 ? 20.0 * std::log10(e / peak)
                                : -std::numeric_limits<double>::infinity();
      if (db < threshold_db) out(t, c) = means[c];
    }
  }
  return out;
}

FeatureMatrix SemMask(const FeatureMatrix &mel, const PerturbConfig &cfg,
                      Rng &rng, PerturbTrace *trace) {
  RequireAmplitude(mel, "SEM");
  // The coin is always flipped so the stream position is independent of
  // the outcome.
  const bool fire = rng.Bernoulli(cfg.sem_prob);
  if (trace) *trace = PerturbTrace{};
  if (!fire) return mel;
  const double threshold =
      rng.Uniform(cfg.sem_threshold_db_lo, cfg.sem_threshold_db_hi);
  if (trace) {
    trace->fired = true;
    trace->threshold = threshold;
  }
  return SemMaskAt(mel, cfg.sem_peak_percentile, threshold);
}

FeatureMatrix HecClipAt(const FeatureMatrix &mel,
                        std::span<const double> channel_limits,
                        double *scale) {
  RequireAmplitude(mel, "HEC");
  Check(channel_limits.size() == mel.channels(), Errc::kInvalidArgument,
        "HEC needs one limit per channel");
  if (scale) *scale = 1.0;
  FeatureMatrix out = mel;
  for (size_t t = 0; t < mel.frames(); ++t)
    for (size_t c = 0; c < mel.channels(); ++c)
      out(t, c) = std::min(channel_limits[c], mel(t, c));
  const double before = mel.Total();
  const double after = out.Total();
  if (!(after > 0.0)) return mel;
  const double s = before / after;
  for (double &v : out.data()) v *= s;
  if (scale) *scale = s;
  return out;
}

FeatureMatrix HecClip(const FeatureMatrix &mel, const PerturbConfig &cfg,
                      Rng &rng, PerturbTrace *trace) {
  RequireAmplitude(mel, "HEC");
  const bool fire = rng.Bernoulli(cfg.hec_prob);
  if (trace) *trace = PerturbTrace{};
  if (!fire || mel.empty()) return mel;
  std::vector<double> limits(mel.channels());
  std::vector<double> column(mel.frames());
  for (size_t c = 0; c < mel.channels(); ++c) {
    const double pct = rng.Uniform(cfg.hec_percentile_lo, cfg.hec_percentile_hi);
    for (size_t t = 0; t < mel.frames(); ++t) column[t] = mel(t, c);
    limits[c] = Percentile(column, pct);
  }
  double scale = 1.0;
  FeatureMatrix out = HecClipAt(mel, limits, &scale);
  if (trace) {
    trace->fired = true;
    trace->channel_limits = std::move(limits);
    trace->scale = scale;
  }
  return out;
}

std::vector<MaskRegion> DrawSpecAugmentMasks(size_t frames, size_t channels,
                                             const SpecAugmentConfig &cfg,
                                             Rng &rng) {
  std::vector<MaskRegion> masks;
  auto draw = [&](MaskRegion::Axis axis, int count, int max_width,
                  size_t extent) {
    for (int i = 0; i < count; ++i) {
      const size_t width = std::min<size_t>(
          extent, static_cast<size_t>(rng.UniformInt(0, max_width)));
      const size_t start = static_cast<size_t>(
          rng.UniformInt(0, static_cast<int64_t>(extent - width)));
      masks.push_back({axis, start, width});
    }
  };
  if (frames == 0 || channels == 0) return masks;
  draw(MaskRegion::Axis::kTime, cfg.n_time_masks, cfg.max_time_width_frames,
       frames);
  draw(MaskRegion::Axis::kFrequency, cfg.n_freq_masks,
       cfg.max_freq_width_channels, channels);
  return masks;
}

FeatureMatrix ApplyMasks(const FeatureMatrix &features,
                         std::span<const MaskRegion> masks) {
  FeatureMatrix out = features;
  if (masks.empty() || features.empty()) return out;
  const double mean =
      features.Total() / static_cast<double>(features.data().size());
  for (const auto &m : masks) {
    if (m.axis == MaskRegion::Axis::kTime) {
      const size_t end = std::min(features.frames(), m.start + m.width);
      for (size_t t = m.start; t < end; ++t)
        for (double &v : out.row(t)) v = mean;
    } else {
      const size_t end = std::min(features.channels(), m.start + m.width);
      for (size_t t = 0; t < features.frames(); ++t)
        for (size_t c = m.start; c < end; ++c) out(t, c) = mean;
    }
  }
  return out;
}

FeatureMatrix SpecAugment(const FeatureMatrix &features,
                          const SpecAugmentConfig &cfg, Rng &rng) {
  Check(features.kind() == FeatureKind::kCompressed, Errc::kInvalidArgument,
        "SpecAugment expects compressed features");
  const auto masks =
      DrawSpecAugmentMasks(features.frames(), features.channels(), cfg, rng);
  return ApplyMasks(features, masks);
}

}  // namespace fusekit

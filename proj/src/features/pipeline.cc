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

#include "fusekit/features/pipeline.h"

#include "fusekit/common/error.h"
#include "fusekit/features/dsp.h"
#include "fusekit/features/perturb.h"
#include "fusekit/features/transforms.h"

namespace fusekit {

FeatureMatrix ComputeMelAmplitudes(std::span<const double> samples,
                                   const FeatureConfig &cfg) {
  cfg.Validate();
  const auto frames = FrameSignal(samples, cfg);
  const size_t nfft = NextPowerOfTwo(frames.front().size());
  const MelFilterbank bank(cfg.n_mels, nfft, cfg.sample_rate_hz, cfg.fmin_hz,
                           cfg.fmax_hz);
  FeatureMatrix mel(frames.size(), cfg.n_mels, cfg.step_ms,
                    FeatureKind::kAmplitudeMel);
  for (size_t t = 0; t < frames.size(); ++t) {
    const auto energies = bank.Apply(AmplitudeSpectrum(frames[t], cfg.window));
    std::copy(energies.begin(), energies.end(), mel.row(t).begin());
  }
  return mel;
}

FeatureMatrix ExtractFeatures(const Waveform &wav, const FeatureConfig &cfg,
                              const PerturbConfig &perturb, Rng &rng) {
  perturb.Validate();
  Check(wav.sample_rate_hz == cfg.sample_rate_hz, Errc::kInvalidArgument,
        "WAV sample rate " + std::to_string(wav.sample_rate_hz) +
            " does not match config " + std::to_string(cfg.sample_rate_hz));
  FeatureMatrix mel = ComputeMelAmplitudes(wav.samples, cfg);
  mel = SemMask(mel, perturb, rng);
  mel = HecClip(mel, perturb, rng);
  FeatureMatrix feats = Compress(mel, cfg.compression);
  if (cfg.normalize) feats = UtteranceNormalize(feats);
  feats = SpecAugment(feats, perturb.specaugment, rng);
  feats = StackAndSkip(feats, cfg.stack, cfg.skip);
  feats.Validate();
  return feats;
}

}  // namespace fusekit

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

// features/dsp.h
// Framing, amplitude spectra and the Mel filterbank.

#ifndef FUSEKIT_FEATURES_DSP_H_
#define FUSEKIT_FEATURES_DSP_H_

#include <complex>
#include <span>
#include <vector>

#include "fusekit/features/config.h"

namespace fusekit {

/// Splits a signal into overlapping frames. Frame i starts at sample
/// round(i * step). A signal shorter than one window gives a single
/// zero-padded frame.
std::vector<std::vector<double>> FrameSignal(std::span<const double> samples,
                                             const FeatureConfig &cfg);

size_t NextPowerOfTwo(size_t n);

/// In-place iterative radix-2 FFT. data.size() must be a power of two.
void Fft(std::span<std::complex<double>> data);

std::vector<double> MakeWindow(WindowType type, size_t length);

/// |DFT| of the windowed frame zero-padded to the next power of two;
/// returns nfft/2 + 1 magnitudes.
std::vector<double> AmplitudeSpectrum(std::span<const double> frame,
                                      WindowType window);

double HzToMel(double hz);
double MelToHz(double mel);

/// Triangular filters with unit peak whose centres are equally spaced on
/// the Mel scale between fmin and fmax.
class MelFilterbank {
 public:
  MelFilterbank(int n_mels, size_t nfft, int sample_rate_hz, double fmin_hz,
                double fmax_hz);

  int num_filters() const { return n_mels_; }
  size_t num_bins() const { return num_bins_; }
  /// Weight of filter j at FFT bin k.
  double weight(int j, size_t k) const { return weights_[j * num_bins_ + k]; }
  /// FFT bin closest to the centre frequency of filter j.
  size_t center_bin(int j) const { return center_bins_[j]; }

  std::vector<double> Apply(std::span<const double> spectrum) const;

 private:
  int n_mels_;
  size_t num_bins_;
  std::vector<double> weights_;
  std::vector<size_t> center_bins_;
};

}  // namespace fusekit

#endif  // FUSEKIT_FEATURES_DSP_H_

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

#include "fusekit/features/dsp.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fusekit/common/error.h"

namespace fusekit {

std::vector<std::vector<double>> FrameSignal(std::span<const double> samples,
                                             const FeatureConfig &cfg) {
  if (samples.empty()) Fail(Errc::kInvalidArgument, "empty signal");
  const size_t win = static_cast<size_t>(cfg.WindowSamples());
  const double step = cfg.StepSamples();
  Check(win >= 1 && step > 0.0, Errc::kInvalidArgument,
        "window and step must cover at least one sample");

  std::vector<std::vector<double>> frames;
  if (samples.size() < win) {
    std::vector<double> frame(win, 0.0);
    std::copy(samples.begin(), samples.end(), frame.begin());
    frames.push_back(std::move(frame));
    return frames;
  }
  const size_t count =
      static_cast<size_t>(std::floor((samples.size() - win) / step)) + 1;
  frames.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    const size_t start = static_cast<size_t>(std::llround(i * step));
    frames.emplace_back(samples.begin() + start,
                        samples.begin() + start + win);
  }
  return frames;
}

size_t NextPowerOfTwo(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void Fft(std::span<std::complex<double>> data) {
  const size_t n = data.size();
  Check(n != 0 && (n & (n - 1)) == 0, Errc::kInvalidArgument,
        "FFT size must be a power of two");
  // Bit-reversal permutation.
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    for (size_t i = 0; i < n; i += len) {
      for (size_t k = 0; k < len / 2; ++k) {
        // Twiddles computed directly rather than by recurrence to keep the
        // error at a few ulps for large frames.
        const std::complex<double> w(std::cos(angle * k), std::sin(angle * k));
        const auto u = data[i + k];
        const auto v = data[i + k + len / 2] * w;
        data[i + k] = u + v;
        data[i + k + len / 2] = u - v;
      }
    }
  }
}

std::vector<double> MakeWindow(WindowType type, size_t length) {
  std::vector<double> w(length, 1.0);
  if (type == WindowType::kHann && length > 1) {
    const double denom = static_cast<double>(length - 1);
    for (size_t i = 0; i < length; ++i)
      w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / denom);
  }
  return w;
}

std::vector<double> AmplitudeSpectrum(std::span<const double> frame,
                                      WindowType window) {
  Check(!frame.empty(), Errc::kInvalidArgument, "empty frame");
  for (double x : frame)
    Check(std::isfinite(x), Errc::kNumeric, "non-finite sample in frame");
  const size_t nfft = NextPowerOfTwo(frame.size());
  const auto win = MakeWindow(window, frame.size());
  std::vector<std::complex<double>> buf(nfft);
  for (size_t i = 0; i < frame.size(); ++i) buf[i] = frame[i] * win[i];
  Fft(buf);
  std::vector<double> mag(nfft / 2 + 1);
  for (size_t k = 0; k < mag.size(); ++k) mag[k] = std::abs(buf[k]);
  return mag;
}

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

MelFilterbank::MelFilterbank(int n_mels, size_t nfft, int sample_rate_hz,
                             double fmin_hz, double fmax_hz)
    : n_mels_(n_mels), num_bins_(nfft / 2 + 1) {
  Check(n_mels >= 1, Errc::kInvalidArgument, "n_mels must be >= 1");
  Check(nfft >= 2, Errc::kInvalidArgument, "nfft must be >= 2");
  Check(fmax_hz <= sample_rate_hz / 2.0, Errc::kInvalidArgument,
        "fmax above Nyquist");
  Check(fmin_hz >= 0.0 && fmin_hz < fmax_hz, Errc::kInvalidArgument,
        "need 0 <= fmin < fmax");

  const double mel_lo = HzToMel(fmin_hz);
  const double mel_hi = HzToMel(fmax_hz);
  const double spacing = (mel_hi - mel_lo) / (n_mels + 1);
  const double bin_hz = static_cast<double>(sample_rate_hz) / nfft;

  weights_.assign(static_cast<size_t>(n_mels) * num_bins_, 0.0);
  center_bins_.resize(n_mels);
  for (int j = 0; j < n_mels; ++j) {
    const double left = mel_lo + j * spacing;
    const double center = left + spacing;
    const double right = center + spacing;
    center_bins_[j] = std::min(
        num_bins_ - 1,
        static_cast<size_t>(std::llround(MelToHz(center) / bin_hz)));
    for (size_t k = 0; k < num_bins_; ++k) {
      const double mel = HzToMel(k * bin_hz);
      double w = 0.0;
      if (mel > left && mel <= center) {
        w = (mel - left) / (center - left);
      } else if (mel > center && mel < right) {
        w = (right - mel) / (right - center);
      }
      weights_[j * num_bins_ + k] = w;
    }
  }
}

std::vector<double> MelFilterbank::Apply(std::span<const double> spectrum) const {
  Check(spectrum.size() == num_bins_, Errc::kInvalidArgument,
        "spectrum length does not match filterbank");
  std::vector<double> out(n_mels_, 0.0);
  for (int j = 0; j < n_mels_; ++j) {
    const double *w = &weights_[j * num_bins_];
    double acc = 0.0;
    for (size_t k = 0; k < num_bins_; ++k) acc += w[k] * spectrum[k];
    out[j] = acc;
  }
  return out;
}

}  // namespace fusekit

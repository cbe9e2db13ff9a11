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

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "fusekit/common/error.h"
#include "fusekit/features/dsp.h"
#include "fusekit/features/io.h"
#include "fusekit/features/perturb.h"
#include "fusekit/features/pipeline.h"
#include "fusekit/features/transforms.h"
#include "test_util.h"

using namespace fusekit;

namespace {

// O(N^2) DFT magnitude of a zero-padded frame, no window.
std::vector<double> NaiveDftMagnitude(const std::vector<double> &frame,
                                      size_t nfft) {
  std::vector<double> mag(nfft / 2 + 1);
  for (size_t k = 0; k < mag.size(); ++k) {
    std::complex<double> acc = 0.0;
    for (size_t n = 0; n < frame.size(); ++n) {
      const double a = -2.0 * std::numbers::pi * double(k) * double(n) / nfft;
      acc += frame[n] * std::complex<double>(std::cos(a), std::sin(a));
    }
    mag[k] = std::abs(acc);
  }
  return mag;
}

FeatureConfig HighRes8k() {
  FeatureConfig cfg = FeatureConfig::HighResolution();
  cfg.sample_rate_hz = 8000;
  cfg.fmax_hz = 4000.0;
  return cfg;
}

Waveform Tone(int sr, size_t n, double hz, uint64_t seed) {
  Rng rng(seed);
  Waveform w{sr, std::vector<double>(n)};
  for (size_t i = 0; i < n; ++i)
    w.samples[i] = std::round(3000.0 * std::sin(2 * std::numbers::pi * hz * i / sr) +
                              200.0 * rng.Normal());
  return w;
}

}  // namespace

TEST_CASE("frame_signal boundary arithmetic") {
  FeatureConfig cfg = HighRes8k();  // 20-sample step, 80-sample window
  std::vector<double> s80(80, 1.0), s160(160, 1.0), s50(50, 1.0);
  CHECK(FrameSignal(s80, cfg).size() == 1);
  const auto f160 = FrameSignal(s160, cfg);
  CHECK(f160.size() == 5);
  CHECK(f160[4].size() == 80);
  const auto f50 = FrameSignal(s50, cfg);
  REQUIRE(f50.size() == 1);
  CHECK(f50[0][49] == 1.0);
  for (size_t i = 50; i < 80; ++i) CHECK(f50[0][i] == 0.0);
  CHECK_THROWS_AS(FrameSignal(std::vector<double>{}, cfg), Error);
}

TEST_CASE("frame start positions are rounded multiples of the step") {
  FeatureConfig cfg = HighRes8k();
  std::vector<double> ramp(400);
  for (size_t i = 0; i < ramp.size(); ++i) ramp[i] = double(i);
  const auto frames = FrameSignal(ramp, cfg);
  for (size_t i = 0; i < frames.size(); ++i)
    CHECK(frames[i][0] == std::round(i * 20.0));
}

TEST_CASE("amplitude spectrum") {
  SUBCASE("constant frame is DC only") {
    std::vector<double> frame(8, 2.5);
    const auto mag = AmplitudeSpectrum(frame, WindowType::kRectangular);
    REQUIRE(mag.size() == 5);
    CHECK(mag[0] == doctest::Approx(20.0));
    for (size_t k = 1; k < 5; ++k) CHECK(mag[k] < 1e-12);
  }
  SUBCASE("cosine at a bin frequency") {
    const size_t n = 64, bin = 5;
    std::vector<double> frame(n);
    for (size_t i = 0; i < n; ++i)
      frame[i] = std::cos(2 * std::numbers::pi * bin * i / n);
    const auto mag = AmplitudeSpectrum(frame, WindowType::kRectangular);
    CHECK(mag[bin] == doctest::Approx(n / 2.0));
    for (size_t k = 0; k < mag.size(); ++k)
      if (k != bin) CHECK(mag[k] < 1e-9);
  }
  SUBCASE("matches naive DFT, including zero padding") {
    Rng rng(7);
    for (size_t len : {64u, 100u, 512u, 1u, 3u}) {
      std::vector<double> frame(len);
      for (double &x : frame) x = rng.Normal();
      const auto fast = AmplitudeSpectrum(frame, WindowType::kRectangular);
      const auto slow = NaiveDftMagnitude(frame, NextPowerOfTwo(len));
      REQUIRE(fast.size() == slow.size());
      for (size_t k = 0; k < fast.size(); ++k)
        CHECK(std::abs(fast[k] - slow[k]) < 1e-6);
    }
  }
  SUBCASE("non-finite samples rejected") {
    std::vector<double> frame{1.0, std::nan("")};
    CHECK_THROWS_AS(AmplitudeSpectrum(frame, WindowType::kHann), Error);
  }
}

TEST_CASE("mel filterbank geometry") {
  const size_t nfft = 256;
  const MelFilterbank bank(20, nfft, 8000, 20.0, 4000.0);
  std::vector<double> zero(bank.num_bins(), 0.0);
  for (double v : bank.Apply(zero)) CHECK(v == 0.0);

  // Flat spectrum: each output equals its filter's weight sum.
  std::vector<double> ones(bank.num_bins(), 1.0);
  const auto flat = bank.Apply(ones);
  for (int j = 0; j < bank.num_filters(); ++j) {
    double sum = 0.0;
    for (size_t k = 0; k < bank.num_bins(); ++k) sum += bank.weight(j, k);
    CHECK(flat[j] == doctest::Approx(sum).epsilon(1e-12));
    CHECK(sum > 0.0);
  }

  // Impulse at a centre bin.
  const int j = 10;
  std::vector<double> impulse(bank.num_bins(), 0.0);
  impulse[bank.center_bin(j)] = 1.0;
  const auto out = bank.Apply(impulse);
  CHECK(out[j] == doctest::Approx(bank.weight(j, bank.center_bin(j))));
  CHECK(out[j] > 0.5);
  CHECK(out[j - 1] + out[j + 1] <= 1.0 - out[j] + 1e-12);
  for (int i = 0; i < bank.num_filters(); ++i)
    if (std::abs(i - j) > 1) CHECK(out[i] == 0.0);

  CHECK_THROWS_AS(MelFilterbank(20, nfft, 8000, 20.0, 4500.0), Error);
}

TEST_CASE("compress fixed points") {
  FeatureMatrix m(1, 4, 10.0, FeatureKind::kAmplitudeMel);
  m(0, 0) = 0.0;
  m(0, 1) = 1.0;
  m(0, 2) = 128.0;
  m(0, 3) = 1.0;
  const auto r = Compress(m, Compression::kRoot7);
  CHECK(r(0, 0) == 0.0);
  CHECK(r(0, 1) == 1.0);
  CHECK(r(0, 2) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(r.kind() == FeatureKind::kCompressed);
  const auto l = Compress(m, Compression::kLog);
  CHECK(l(0, 1) == 0.0);
  CHECK(l(0, 0) == doctest::Approx(std::log(1e-10)));
}

TEST_CASE("SEM") {
  FeatureMatrix m(2, 2, 10.0, FeatureKind::kAmplitudeMel);
  m(0, 0) = 100;
  m(0, 1) = 1;
  m(1, 0) = 100;
  m(1, 1) = 100;
  SUBCASE("hand-evaluated dB rule") {
    const auto out = SemMaskAt(m, 100.0, -20.0);
    CHECK(out(0, 0) == 100);
    CHECK(out(0, 1) == doctest::Approx(50.5));
    CHECK(out(1, 0) == 100);
    CHECK(out(1, 1) == 100);
  }
  SUBCASE("threshold far below everything") {
    PerturbConfig cfg;
    cfg.sem_prob = 1.0;
    cfg.sem_threshold_db_lo = cfg.sem_threshold_db_hi = -300.0;
    FeatureMatrix near(3, 2, 10.0, FeatureKind::kAmplitudeMel, 10.0);
    near(1, 1) = 9.5;
    Rng rng(1);
    CHECK(SemMask(near, cfg, rng) == near);
  }
  SUBCASE("probability zero") {
    PerturbConfig cfg;
    cfg.sem_prob = 0.0;
    Rng rng(3);
    CHECK(SemMask(m, cfg, rng) == m);
  }
  SUBCASE("all-zero utterance") {
    FeatureMatrix z(3, 3, 10.0, FeatureKind::kAmplitudeMel);
    CHECK(SemMaskAt(z, 95.0, -25.0) == z);
  }
  SUBCASE("only bins below the drawn threshold change") {
    Rng rng(11);
    PerturbConfig cfg;
    cfg.sem_prob = 1.0;
    for (int trial = 0; trial < 50; ++trial) {
      const auto mel = testing::RandomAmplitudes(rng, 30, 8);
      PerturbTrace trace;
      const auto out = SemMask(mel, cfg, rng, &trace);
      REQUIRE(trace.fired);
      const auto cells = mel.data();
      const double peak = Percentile({cells.begin(), cells.end()}, 95.0);
      for (size_t t = 0; t < mel.frames(); ++t)
        for (size_t c = 0; c < mel.channels(); ++c) {
          const double db = 20 * std::log10(mel(t, c) / peak);
          if (db >= trace.threshold) CHECK(out(t, c) == mel(t, c));
        }
    }
  }
}

TEST_CASE("HEC") {
  SUBCASE("hand-evaluated clip and rescale") {
    FeatureMatrix m(2, 1, 10.0, FeatureKind::kAmplitudeMel);
    m(0, 0) = 1;
    m(1, 0) = 5;
    const std::vector<double> eta{3.0};
    double scale = 0;
    const auto out = HecClipAt(m, eta, &scale);
    CHECK(scale == doctest::Approx(1.5));
    CHECK(out(0, 0) == doctest::Approx(1.5));
    CHECK(out(1, 0) == doctest::Approx(4.5));
    CHECK(out.Total() == doctest::Approx(m.Total()));
  }
  SUBCASE("100th percentile limit is inactive") {
    PerturbConfig cfg;
    cfg.hec_prob = 1.0;
    cfg.hec_percentile_lo = cfg.hec_percentile_hi = 100.0;
    Rng rng(5);
    const auto mel = testing::RandomAmplitudes(rng, 20, 4);
    CHECK(HecClip(mel, cfg, rng) == mel);
  }
  SUBCASE("probability zero") {
    PerturbConfig cfg;
    cfg.hec_prob = 0.0;
    Rng rng(5);
    const auto mel = testing::RandomAmplitudes(rng, 20, 4);
    CHECK(HecClip(mel, cfg, rng) == mel);
  }
  SUBCASE("energy preserved and pre-rescale output bounded by input") {
    PerturbConfig cfg;
    cfg.hec_prob = 1.0;
    Rng rng(9);
    for (int trial = 0; trial < 200; ++trial) {
      const auto mel = testing::RandomAmplitudes(rng, 1 + trial % 40, 5);
      PerturbTrace trace;
      const auto out = HecClip(mel, cfg, rng, &trace);
      REQUIRE(trace.fired);
      CHECK(std::abs(out.Total() - mel.Total()) / mel.Total() < 1e-9);
      for (size_t t = 0; t < mel.frames(); ++t)
        for (size_t c = 0; c < mel.channels(); ++c)
          CHECK(out(t, c) / trace.scale <= mel(t, c) * (1 + 1e-12));
    }
  }
  SUBCASE("zero clipped total leaves input") {
    FeatureMatrix m(2, 1, 10.0, FeatureKind::kAmplitudeMel);
    m(1, 0) = 4.0;
    const std::vector<double> eta{0.0};
    CHECK(HecClipAt(m, eta) == m);
  }
}

TEST_CASE("perturbation firing rates follow their probabilities") {
  PerturbConfig cfg;  // 10% SEM, 40% HEC
  FeatureMatrix mel(4, 3, 10.0, FeatureKind::kAmplitudeMel, 1.0);
  Rng rng(2024);
  size_t sem = 0, hec = 0;
  const size_t n = 2000;
  for (size_t i = 0; i < n; ++i) {
    PerturbTrace a, b;
    SemMask(mel, cfg, rng, &a);
    HecClip(mel, cfg, rng, &b);
    sem += a.fired;
    hec += b.fired;
  }
  CHECK(testing::WithinBinomialInterval(sem, n, 0.1));
  CHECK(testing::WithinBinomialInterval(hec, n, 0.4));
}

TEST_CASE("SpecAugment") {
  Rng rng(17);
  FeatureMatrix f(12, 6, 10.0, FeatureKind::kCompressed);
  for (double &v : f.data()) v = rng.Normal();
  const double mean = f.Total() / 72.0;

  SUBCASE("no masks") {
    CHECK(SpecAugment(f, SpecAugmentConfig{}, rng) == f);
  }
  SUBCASE("full-width time mask") {
    const MaskRegion all{MaskRegion::Axis::kTime, 0, 12};
    const auto out = ApplyMasks(f, std::span(&all, 1));
    for (double v : out.data()) CHECK(v == doctest::Approx(mean));
  }
  SUBCASE("modified cells equal union of mask areas") {
    SpecAugmentConfig cfg{2, 5, 2, 3};
    for (int trial = 0; trial < 100; ++trial) {
      const auto masks = DrawSpecAugmentMasks(12, 6, cfg, rng);
      const auto out = ApplyMasks(f, masks);
      std::vector<char> covered(72, 0);
      for (const auto &m : masks) {
        CHECK(m.width <= (m.axis == MaskRegion::Axis::kTime ? 5u : 3u));
        for (size_t t = 0; t < 12; ++t)
          for (size_t c = 0; c < 6; ++c) {
            const size_t pos = m.axis == MaskRegion::Axis::kTime ? t : c;
            if (pos >= m.start && pos < m.start + m.width) covered[t * 6 + c] = 1;
          }
      }
      size_t expected = 0, changed = 0;
      for (size_t i = 0; i < 72; ++i) {
        expected += covered[i];
        changed += out.data()[i] != f.data()[i];
      }
      CHECK(changed == expected);
    }
  }
}

TEST_CASE("stack and skip") {
  FeatureMatrix f(6, 2, 2.5, FeatureKind::kCompressed);
  for (size_t i = 0; i < 12; ++i) f.data()[i] = double(i);
  const auto s = StackAndSkip(f, 2, 2);
  CHECK(s.frames() == 3);
  CHECK(s.channels() == 4);
  CHECK(s.frame_step_ms() == 5.0);
  CHECK(s(1, 0) == f(2, 0));
  CHECK(s(1, 3) == f(3, 1));
  CHECK(StackAndSkip(f, 1, 1) == f);
  CHECK_THROWS_AS(StackAndSkip(f, 0, 1), Error);
  CHECK_THROWS_AS(StackAndSkip(f, 1, 0), Error);

  FeatureMatrix five(5, 2, 2.5, FeatureKind::kCompressed);
  for (size_t i = 0; i < 10; ++i) five.data()[i] = double(i);
  const auto p = StackAndSkip(five, 2, 2);
  REQUIRE(p.frames() == 3);
  for (size_t c = 0; c < 2; ++c) {
    CHECK(p(2, c) == five(4, c));
    CHECK(p(2, 2 + c) == five(4, c));
  }
  for (size_t frames = 1; frames < 12; ++frames)
    for (int skip = 1; skip < 5; ++skip) {
      FeatureMatrix g(frames, 1, 1.0, FeatureKind::kCompressed);
      CHECK(StackAndSkip(g, 3, skip).frames() == (frames + skip - 1) / skip);
    }
}

TEST_CASE("utterance normalization") {
  FeatureMatrix f(2, 2, 10.0, FeatureKind::kCompressed);
  f(0, 0) = 3.7;
  f(1, 0) = 3.7;
  f(0, 1) = -1;
  f(1, 1) = 1;
  const auto n = UtteranceNormalize(f);
  CHECK(n(0, 0) == 0.0);
  CHECK(n(1, 0) == 0.0);
  CHECK(n(0, 1) == doctest::Approx(-1.0));
  CHECK(n(1, 1) == doctest::Approx(1.0));

  Rng rng(3);
  FeatureMatrix r(50, 7, 10.0, FeatureKind::kCompressed);
  for (double &v : r.data()) v = 5 + 3 * rng.Normal();
  const auto z = UtteranceNormalize(r);
  const auto means = z.ChannelMeans();
  for (size_t c = 0; c < 7; ++c) {
    double var = 0;
    for (size_t t = 0; t < 50; ++t) var += z(t, c) * z(t, c);
    CHECK(std::abs(means[c]) < 1e-9);
    CHECK(std::abs(std::sqrt(var / 50) - 1.0) < 1e-6);
  }
}

TEST_CASE("extraction pipeline") {
  const Waveform wav = Tone(8000, 8000, 440.0, 1);

  SUBCASE("baseline: 80 dims at 10 ms") {
    FeatureConfig cfg = FeatureConfig::Baseline();
    Rng rng(1);
    const auto f = ExtractFeatures(wav, cfg, PerturbConfig::Disabled(), rng);
    CHECK(f.channels() == 80);
    CHECK(f.frame_step_ms() == 10.0);
    CHECK(f.frames() == 98);  // floor((8000 - 200) / 80) + 1
  }
  SUBCASE("high resolution: 2x20 dims at 5 ms") {
    Rng rng(1);
    const auto f =
        ExtractFeatures(wav, HighRes8k(), PerturbConfig::Disabled(), rng);
    CHECK(f.channels() == 40);
    CHECK(f.frame_step_ms() == 5.0);
    CHECK(f.kind() == FeatureKind::kStacked);
    CHECK(f.frames() == (397 + 1) / 2);
  }
  SUBCASE("seed-independent with perturbations off") {
    Rng a(1), b(999);
    CHECK(ExtractFeatures(wav, HighRes8k(), PerturbConfig::Disabled(), a) ==
          ExtractFeatures(wav, HighRes8k(), PerturbConfig::Disabled(), b));
  }
  SUBCASE("same seed gives identical bytes with perturbations on") {
    PerturbConfig p;
    p.sem_prob = 0.5;
    p.hec_prob = 0.5;
    p.specaugment = {2, 8, 2, 3};
    for (uint64_t seed = 0; seed < 5; ++seed) {
      Rng a(seed), b(seed);
      CHECK(SerializeFeatureFile(ExtractFeatures(wav, HighRes8k(), p, a)) ==
            SerializeFeatureFile(ExtractFeatures(wav, HighRes8k(), p, b)));
    }
  }
  SUBCASE("silence sits at the log floor before normalization") {
    Waveform silence{8000, std::vector<double>(8000, 0.0)};
    FeatureConfig cfg = FeatureConfig::Baseline();
    const auto mel = ComputeMelAmplitudes(silence.samples, cfg);
    const auto logs = Compress(mel, Compression::kLog);
    for (double v : logs.data()) CHECK(v == std::log(kLogFloor));
  }
  SUBCASE("sample-rate mismatch") {
    FeatureConfig cfg = FeatureConfig::Baseline();
    cfg.sample_rate_hz = 16000;
    cfg.fmax_hz = 8000;
    Rng rng(1);
    CHECK_THROWS_AS(ExtractFeatures(wav, cfg, PerturbConfig::Disabled(), rng),
                    Error);
  }
}

TEST_CASE("file formats") {
  const auto dir = testing::TempDir("features_io");
  const Waveform wav = Tone(16000, 1234, 300.0, 4);
  WriteWav((dir / "a.wav").string(), wav);
  const Waveform back = ReadWav((dir / "a.wav").string());
  CHECK(back.sample_rate_hz == 16000);
  CHECK(back.samples == wav.samples);

  FeatureMatrix f(3, 2, 2.5, FeatureKind::kCompressed);
  for (size_t i = 0; i < 6; ++i) f.data()[i] = 0.25 * double(i) - 1.0;
  const std::string bytes = SerializeFeatureFile(f);
  CHECK(bytes.substr(0, 5) == "FEAT1");
  CHECK(bytes.size() == 5 + 4 + 4 + 4 + 6 * 4);
  const auto parsed = ParseFeatureFile(bytes);
  CHECK(parsed.features == f);
  CHECK(!parsed.ivector.has_value());

  const auto path = (dir / "a.feat").string();
  WriteFeatureFile(path, f);
  const std::vector<double> iv{0.5, -2.0, 3.0};
  AppendIvector(path, iv);
  const auto with_iv = ReadFeatureFile(path);
  REQUIRE(with_iv.ivector.has_value());
  CHECK(*with_iv.ivector == iv);
  CHECK(with_iv.features == f);

  CHECK_THROWS_AS(ParseFeatureFile("FEAT2xxxxxxxxxxxx"), Error);
  CHECK_THROWS_AS(ParseWav("RIFF0000WAVX"), Error);
}

TEST_CASE("feature config parsing") {
  const auto cfg = ParseFeaturePipelineConfig(R"(
[features]
preset = "highres"
sample_rate_hz = 8000
fmax_hz = 4000.0

[perturb]
sem_prob = 0.1
hec_prob = 0.4
hec_percentile_range = [80.0, 100.0]
sem_threshold_db_range = [-30.0, -20.0]
seed = 42
[perturb.specaugment]
n_time_masks = 2
max_time_width_frames = 80
)");
  CHECK(cfg.features.n_mels == 20);
  CHECK(cfg.features.compression == Compression::kRoot7);
  CHECK(cfg.perturb.seed == 42);
  CHECK(cfg.perturb.specaugment.max_time_width_frames == 80);
  CHECK_THROWS_AS(ParseFeaturePipelineConfig("[features]\nfmax_hz = 9000.0\n"),
                  Error);
  CHECK_THROWS_AS(ParseFeaturePipelineConfig("[features\n"), Error);
  CHECK(ParseFeaturePipelineConfig("").perturb.sem_prob == 0.0);
}

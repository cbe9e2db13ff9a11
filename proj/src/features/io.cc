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

#include "fusekit/features/io.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "fusekit/common/binary_io.h"
#include "fusekit/common/error.h"

namespace fusekit {

namespace {

uint32_t U32At(const std::string &b, size_t off) {
  uint32_t v;
  std::memcpy(&v, b.data() + off, 4);
  return v;
}

uint16_t U16At(const std::string &b, size_t off) {
  uint16_t v;
  std::memcpy(&v, b.data() + off, 2);
  return v;
}

}  // namespace

Waveform ParseWav(const std::string &b) {
  Check(b.size() >= 12 && b.compare(0, 4, "RIFF") == 0 &&
            b.compare(8, 4, "WAVE") == 0,
        Errc::kParse, "not a RIFF/WAVE file");
  size_t off = 12;
  bool have_fmt = false;
  Waveform wav;
  while (off + 8 <= b.size()) {
    const std::string id = b.substr(off, 4);
    const uint32_t size = U32At(b, off + 4);
    const size_t body = off + 8;
    Check(body + size <= b.size(), Errc::kParse, "truncated WAV chunk " + id);
    if (id == "fmt ") {
      Check(size >= 16, Errc::kParse, "short fmt chunk");
      const uint16_t format = U16At(b, body);
      const uint16_t channels = U16At(b, body + 2);
      const uint32_t rate = U32At(b, body + 4);
      const uint16_t bits = U16At(b, body + 14);
      Check(format == 1, Errc::kParse, "WAV must be PCM");
      Check(channels == 1, Errc::kParse, "WAV must be mono");
      Check(bits == 16, Errc::kParse, "WAV must be 16-bit");
      Check(rate == 8000 || rate == 16000, Errc::kParse,
            "WAV sample rate must be 8 or 16 kHz");
      wav.sample_rate_hz = static_cast<int>(rate);
      have_fmt = true;
    } else if (id == "data") {
      Check(have_fmt, Errc::kParse, "data chunk before fmt chunk");
      const size_t n = size / 2;
      wav.samples.resize(n);
      for (size_t i = 0; i < n; ++i) {
        int16_t s;
        std::memcpy(&s, b.data() + body + 2 * i, 2);
        wav.samples[i] = s;
      }
      return wav;
    }
    off = body + size + (size & 1);
  }
  Fail(Errc::kParse, "WAV has no data chunk");
}

Waveform ReadWav(const std::string &path) {
  try {
    return ParseWav(binio::ReadFileToString(path));
  } catch (const Error &e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

void WriteWav(const std::string &path, const Waveform &wav) {
  std::ostringstream os;
  const uint32_t data_bytes = static_cast<uint32_t>(wav.samples.size() * 2);
  auto u16 = [&](uint16_t v) { os.write(reinterpret_cast<char *>(&v), 2); };
  binio::WriteTag(os, "RIFF");
  binio::WriteU32(os, 36 + data_bytes);
  binio::WriteTag(os, "WAVEfmt ");
  binio::WriteU32(os, 16);
  u16(1);
  u16(1);
  binio::WriteU32(os, static_cast<uint32_t>(wav.sample_rate_hz));
  binio::WriteU32(os, static_cast<uint32_t>(wav.sample_rate_hz * 2));
  u16(2);
  u16(16);
  binio::WriteTag(os, "data");
  binio::WriteU32(os, data_bytes);
  for (double x : wav.samples) {
    const double r = std::round(std::clamp(x, -32768.0, 32767.0));
    u16(static_cast<uint16_t>(static_cast<int16_t>(r)));
  }
  binio::WriteStringToFile(path, os.str());
}

std::string SerializeFeatureFile(const FeatureMatrix &features,
                                 const std::vector<double> *ivector) {
  std::ostringstream os;
  binio::WriteTag(os, "FEAT1");
  binio::WriteU32(os, static_cast<uint32_t>(features.frames()));
  binio::WriteU32(os, static_cast<uint32_t>(features.channels()));
  binio::WriteF32(os, static_cast<float>(features.frame_step_ms()));
  for (double v : features.data()) binio::WriteF32(os, static_cast<float>(v));
  if (ivector) {
    binio::WriteTag(os, "IVEC1");
    binio::WriteU32(os, static_cast<uint32_t>(ivector->size()));
    for (double v : *ivector) binio::WriteF32(os, static_cast<float>(v));
  }
  return os.str();
}

FeatureFile ParseFeatureFile(const std::string &bytes) {
  std::istringstream is(bytes);
  binio::ExpectTag(is, "FEAT1");
  const uint32_t frames = binio::ReadU32(is);
  const uint32_t channels = binio::ReadU32(is);
  const float step = binio::ReadF32(is);
  Check(bytes.size() >= 17 + 4ull * frames * channels, Errc::kParse,
        "feature file truncated");
  FeatureFile out;
  out.features = FeatureMatrix(frames, channels, step, FeatureKind::kCompressed);
  for (double &v : out.features.data()) v = binio::ReadF32(is);
  if (binio::PeekTag(is, "IVEC1")) {
    const uint32_t dim = binio::ReadU32(is);
    std::vector<double> iv(dim);
    for (double &v : iv) v = binio::ReadF32(is);
    out.ivector = std::move(iv);
  }
  Check(is.peek() == std::char_traits<char>::eof(), Errc::kParse,
        "trailing bytes after feature data");
  return out;
}

void WriteFeatureFile(const std::string &path, const FeatureMatrix &features,
                      const std::vector<double> *ivector) {
  binio::WriteStringToFile(path, SerializeFeatureFile(features, ivector));
}

FeatureFile ReadFeatureFile(const std::string &path) {
  try {
    return ParseFeatureFile(binio::ReadFileToString(path));
  } catch (const Error &e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

void AppendIvector(const std::string &path, std::span<const double> ivector) {
  FeatureFile file = ReadFeatureFile(path);
  const std::vector<double> iv(ivector.begin(), ivector.end());
  WriteFeatureFile(path, file.features, &iv);
}

}  // namespace fusekit

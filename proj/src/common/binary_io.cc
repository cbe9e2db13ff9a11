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

#include "fusekit/common/binary_io.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "fusekit/common/error.h"

namespace fusekit::binio {

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

template <typename T>
void WritePod(std::ostream &os, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  os.write(buf, sizeof(T));
  if (!os) Fail(Errc::kIo, "write failed");
}

template <typename T>
T ReadPod(std::istream &is) {
  char buf[sizeof(T)];
  is.read(buf, sizeof(T));
  if (is.gcount() != static_cast<std::streamsize>(sizeof(T)))
    Fail(Errc::kParse, "unexpected end of binary data");
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

}  // namespace

void WriteTag(std::ostream &os, std::string_view tag) {
  os.write(tag.data(), static_cast<std::streamsize>(tag.size()));
  if (!os) Fail(Errc::kIo, "write failed");
}

void WriteU32(std::ostream &os, uint32_t v) { WritePod(os, v); }
void WriteF32(std::ostream &os, float v) { WritePod(os, v); }
void WriteF64(std::ostream &os, double v) { WritePod(os, v); }

void ExpectTag(std::istream &is, std::string_view tag) {
  std::string buf(tag.size(), '\0');
  is.read(buf.data(), static_cast<std::streamsize>(tag.size()));
  if (is.gcount() != static_cast<std::streamsize>(tag.size()) || buf != tag)
    Fail(Errc::kParse, "expected tag \"" + std::string(tag) + "\"");
}

bool PeekTag(std::istream &is, std::string_view tag) {
  const auto pos = is.tellg();
  std::string buf(tag.size(), '\0');
  is.read(buf.data(), static_cast<std::streamsize>(tag.size()));
  if (is.gcount() == static_cast<std::streamsize>(tag.size()) && buf == tag)
    return true;
  is.clear();
  is.seekg(pos);
  return false;
}

uint32_t ReadU32(std::istream &is) { return ReadPod<uint32_t>(is); }
float ReadF32(std::istream &is) { return ReadPod<float>(is); }
double ReadF64(std::istream &is) { return ReadPod<double>(is); }

std::string ReadFileToString(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(Errc::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteStringToFile(const std::string &path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(Errc::kIo, "cannot write " + path);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) Fail(Errc::kIo, "write failed: " + path);
}

}  // namespace fusekit::binio

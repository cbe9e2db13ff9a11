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

// common/binary_io.h
// Little-endian readers and writers for the toolkit's binary file formats.

#ifndef FUSEKIT_COMMON_BINARY_IO_H_
#define FUSEKIT_COMMON_BINARY_IO_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace fusekit::binio {

void WriteTag(std::ostream &os, std::string_view tag);
void WriteU32(std::ostream &os, uint32_t v);
void WriteF32(std::ostream &os, float v);
void WriteF64(std::ostream &os, double v);

/// Reads exactly tag.size() bytes and throws kParse if they differ.
void ExpectTag(std::istream &is, std::string_view tag);
/// Returns true and consumes the tag if the next bytes equal it; otherwise
/// leaves the stream position unchanged.
bool PeekTag(std::istream &is, std::string_view tag);
uint32_t ReadU32(std::istream &is);
float ReadF32(std::istream &is);
double ReadF64(std::istream &is);

std::string ReadFileToString(const std::string &path);
void WriteStringToFile(const std::string &path, std::string_view data);

}  // namespace fusekit::binio

#endif  // FUSEKIT_COMMON_BINARY_IO_H_

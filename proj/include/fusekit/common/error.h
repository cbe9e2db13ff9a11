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

// common/error.h

#ifndef FUSEKIT_COMMON_ERROR_H_
#define FUSEKIT_COMMON_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace fusekit {

// Error categories. The CLI maps these to exit codes and prints the name.
enum class Errc {
  kInvalidArgument = 2,
  kIo = 3,
  kParse = 4,
  kNumeric = 5,
  kPipeline = 6,
};

std::string_view ErrcName(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string &what)
      : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void Fail(Errc code, const std::string &what) {
  throw Error(code, what);
}

inline void Check(bool cond, Errc code, const std::string &what) {
  if (!cond) throw Error(code, what);
}

}  // namespace fusekit

#endif  // FUSEKIT_COMMON_ERROR_H_

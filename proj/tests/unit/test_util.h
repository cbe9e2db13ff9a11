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

// Shared helpers for the unit and acceptance suites.

#ifndef FUSEKIT_TESTS_TEST_UTIL_H_
#define FUSEKIT_TESTS_TEST_UTIL_H_

#include <cmath>
#include <filesystem>
#include <string>

#include "fusekit/common/rng.h"
#include "fusekit/features/feature_matrix.h"

namespace fusekit::testing {

inline FeatureMatrix RandomAmplitudes(Rng &rng, size_t frames, size_t channels,
                                      double scale = 100.0) {
  FeatureMatrix m(frames, channels, 10.0, FeatureKind::kAmplitudeMel);
  // Log-uniform spread so that a useful share of bins sits far below peak.
  for (double &v : m.data()) v = scale * std::pow(10.0, -4.0 * rng.Uniform());
  return m;
}

// Two-sided acceptance region of a binomial proportion at 99.9% (normal
// approximation, z = 3.2905).
inline bool WithinBinomialInterval(size_t hits, size_t trials, double p) {
  const double sd = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  const double rate = static_cast<double>(hits) / static_cast<double>(trials);
  return std::abs(rate - p) <= 3.2905 * sd;
}

inline std::filesystem::path TempDir(const std::string &name) {
  auto dir = std::filesystem::temp_directory_path() / ("fusekit_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fusekit::testing

#endif  // FUSEKIT_TESTS_TEST_UTIL_H_

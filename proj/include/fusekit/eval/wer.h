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

// eval/wer.h
// Word error rate by minimum edit distance.

#ifndef FUSEKIT_EVAL_WER_H_
#define FUSEKIT_EVAL_WER_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace fusekit {

struct WerReport {
  size_t substitutions = 0;
  size_t deletions = 0;
  size_t insertions = 0;
  size_t ref_words = 0;

  size_t errors() const { return substitutions + deletions + insertions; }
  /// (S + D + I) / N; NaN when the reference is empty.
  double wer() const;
  WerReport &operator+=(const WerReport &other);
  bool operator==(const WerReport &other) const = default;
};

/// Lowercases (ASCII) and splits on whitespace. No other normalization.
std::vector<std::string> Tokenize(std::string_view text);

/// Unit-cost alignment. Among minimal alignments the one with the fewest
/// insertions, then fewest deletions, is reported. Empty references are
/// allowed here (all hypothesis words are insertions).
WerReport AlignCounts(const std::vector<std::string> &ref,
                      const std::vector<std::string> &hyp);

/// As AlignCounts, but the reference must be non-empty.
WerReport Wer(const std::vector<std::string> &ref,
              const std::vector<std::string> &hyp);

}  // namespace fusekit

#endif  // FUSEKIT_EVAL_WER_H_

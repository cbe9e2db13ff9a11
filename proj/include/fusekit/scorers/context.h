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

// scorers/context.h

#ifndef FUSEKIT_SCORERS_CONTEXT_H_
#define FUSEKIT_SCORERS_CONTEXT_H_

#include <cstddef>
#include <vector>

namespace fusekit {

inline constexpr size_t kCrossUtteranceWordLimit = 150;

/// LM history for utterance `current` of one conversation channel: the
/// preceding utterances concatenated in order, truncated from the oldest
/// side to at most `limit` words.
template <typename Word>
std::vector<Word> BuildCrossUtteranceContext(
    const std::vector<std::vector<Word>> &channel, size_t current,
    size_t limit = kCrossUtteranceWordLimit) {
  std::vector<Word> out;
  if (limit == 0) return out;
  size_t first = current;
  size_t words = 0;
  while (first > 0 && words < limit) words += channel[--first].size();
  for (size_t u = first; u < current && u < channel.size(); ++u)
    out.insert(out.end(), channel[u].begin(), channel[u].end());
  if (out.size() > limit) out.erase(out.begin(), out.end() - limit);
  return out;
}

}  // namespace fusekit

#endif  // FUSEKIT_SCORERS_CONTEXT_H_

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

#include "fusekit/eval/wer.h"

#include <cctype>
#include <limits>
#include <tuple>

#include "fusekit/common/error.h"

namespace fusekit {

double WerReport::wer() const {
  if (ref_words == 0) return std::numeric_limits<double>::quiet_NaN();
  return static_cast<double>(errors()) / static_cast<double>(ref_words);
}

WerReport &WerReport::operator+=(const WerReport &o) {
  substitutions += o.substitutions;
  deletions += o.deletions;
  insertions += o.insertions;
  ref_words += o.ref_words;
  return *this;
}

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

WerReport AlignCounts(const std::vector<std::string> &ref,
                      const std::vector<std::string> &hyp) {
  // Cell = (total, insertions, deletions, substitutions); compared
  // lexicographically on the first three. Adding the same step to two cells
  // preserves their order, so the DP yields the lexicographic minimum.
  struct Cell {
    size_t total, ins, del, sub;
    auto key() const { return std::tie(total, ins, del); }
  };
  const size_t n = ref.size(), m = hyp.size();
  std::vector<Cell> prev(m + 1), cur(m + 1);
  for (size_t j = 0; j <= m; ++j) prev[j] = {j, j, 0, 0};
  for (size_t i = 1; i <= n; ++i) {
    cur[0] = {i, 0, i, 0};
    for (size_t j = 1; j <= m; ++j) {
      const bool same = ref[i - 1] == hyp[j - 1];
      Cell diag = prev[j - 1];
      if (!same) {
        ++diag.total;
        ++diag.sub;
      }
      Cell del = prev[j];
      ++del.total;
      ++del.del;
      Cell ins = cur[j - 1];
      ++ins.total;
      ++ins.ins;
      Cell best = diag;
      if (del.key() < best.key()) best = del;
      if (ins.key() < best.key()) best = ins;
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  const Cell &c = prev[m];
  return WerReport{c.sub, c.del, c.ins, n};
}

WerReport Wer(const std::vector<std::string> &ref,
              const std::vector<std::string> &hyp) {
  Check(!ref.empty(), Errc::kInvalidArgument, "WER needs a non-empty reference");
  return AlignCounts(ref, hyp);
}

}  // namespace fusekit

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

// scorers/table_scorer.h
// Table-driven scorer loaded from JSON. Serves as a stand-in for neural
// end-to-end models and LMs.
//
// Schema (see docs/table_scorer.md):
//   {
//     "kind": "e2e" | "lm",
//     "vocab": ["<s>", "</s>", "<unk>", "a", ...],
//     "bos": "<s>", "eos": "</s>", "unk": "<unk>",      (optional)
//     "single_head": true,                               (e2e only)
//     "tables": { "": {"a": 0.7, "</s>": 0.3}, "a": {...}, "a b": {...} },
//     "attention": [[...], [...]],                       (rows per position)
//     "utterances": { "<utt-id>": {"tables": {...}, "attention": [...]}}
//   }
// The distribution for a history is taken from the table whose key is the
// longest suffix of "<s> w1 ... wn" (space-joined, "" is the root); keys
// starting with <s> therefore only match from the utterance start.

#ifndef FUSEKIT_SCORERS_TABLE_SCORER_H_
#define FUSEKIT_SCORERS_TABLE_SCORER_H_

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "fusekit/scorers/scorer.h"

namespace fusekit {

class TableScorer : public Scorer {
 public:
  struct Tables {
    std::map<std::vector<TokenId>, LogDistribution> rows;
    std::vector<std::vector<double>> attention;
  };

  TableScorer(Vocabulary vocab, bool e2e, bool single_head, Tables defaults,
              std::map<std::string, Tables> utterances = {});

  static std::shared_ptr<TableScorer> FromJson(const nlohmann::json &j);
  static std::shared_ptr<TableScorer> Load(const std::string &path);
  nlohmann::json ToJson() const;

  const Vocabulary &vocab() const override { return vocab_; }
  std::string name() const override { return e2e_ ? "table-e2e" : "table-lm"; }
  bool needs_acoustics() const override { return e2e_; }
  bool single_head() const override { return single_head_; }

 protected:
  ScorerState DoStart(const Acoustics *acoustics) const override;
  ScoreResult DoScore(const ScorerState &state) const override;
  ScorerState DoAdvance(const ScorerState &state, TokenId token) const override;

 private:
  const Tables &TablesFor(const ScorerState &state) const;

  Vocabulary vocab_;
  bool e2e_;
  bool single_head_;
  Tables defaults_;
  std::map<std::string, Tables> utterances_;
};

}  // namespace fusekit

#endif  // FUSEKIT_SCORERS_TABLE_SCORER_H_

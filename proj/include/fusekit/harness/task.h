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

// harness/task.h
// Synthetic "speech" task with an exactly computable posterior: a bigram
// source LM emits words, each word occupies d >= 1 frames (d ~ P(d)) and each
// frame carries one discrete acoustic symbol drawn from the word's emission
// distribution.

#ifndef FUSEKIT_HARNESS_TASK_H_
#define FUSEKIT_HARNESS_TASK_H_

#include <cstdint>
#include <string>
#include <vector>

#include <toml.hpp>

#include "fusekit/scorers/scorer.h"
#include "fusekit/scorers/vocabulary.h"

namespace fusekit {

/// Bigram probabilities indexed [history id][next id] over the full
/// vocabulary. Rows exist for <s> and words; columns for </s> and words.
using BigramTable = std::vector<std::vector<double>>;

struct HmmTask {
  Vocabulary vocab;  // "<s>", "</s>", then the words
  size_t num_symbols = 0;
  std::vector<std::vector<double>> emission;  // [vocab id][symbol]; words only
  BigramTable lm;                             // source LM
  std::vector<double> duration;               // P(d = i + 1)
  size_t max_words = 100;  // generation rejects longer utterances
  uint64_t seed = 0;

  /// Throws unless every distribution is normalized within 1e-9, <s> cannot
  /// be followed directly by </s>, and shapes agree.
  void Validate() const;
  /// Word ids (excludes <s> and </s>).
  std::vector<TokenId> Words() const;
};

/// Builds a task from explicit tables; `words` excludes <s> and </s>. LM rows
/// and columns follow the order [<s>|</s>, words...].
HmmTask MakeHmmTask(const std::vector<std::string> &words, size_t num_symbols,
                    std::vector<std::vector<double>> emission_by_word,
                    std::vector<std::vector<double>> lm_rows,
                    std::vector<double> duration, uint64_t seed = 0);

/// Converts compact LM rows ([<s>, words...] x [</s>, words...]) to a
/// full-vocabulary BigramTable.
BigramTable ExpandLmRows(const Vocabulary &vocab,
                         const std::vector<std::vector<double>> &rows);

/// TOML task file:
///   [task]
///   words = ["a", "b"]      num_symbols = 2      seed = 1
///   duration = [0.5, 0.5]   max_words = 100
///   [task.emission]  a = [0.9, 0.1]   b = [0.1, 0.9]
///   [task.lm]        "<s>" = [0.0, 0.5, 0.5]   a = [...]   b = [...]
/// LM rows list probabilities for [</s>, words...].
HmmTask ParseHmmTask(const std::string &toml_text);
HmmTask LoadHmmTask(const std::string &path);
/// Reads an LM table in the [task.lm] layout (one row per history).
BigramTable ParseLmTable(const Vocabulary &vocab, const toml::table &rows);

struct SyntheticUtterance {
  std::string id;
  std::string conversation;
  std::string channel;
  std::string speaker;
  int64_t order = 0;
  std::vector<TokenId> words;  // without <s>/</s>
  std::vector<int> symbols;    // one per frame
  std::vector<int> durations;  // frames per word
};

struct GenerateOptions {
  size_t utterances_per_conversation = 10;  // alternating channels A/B
  std::string id_prefix = "utt";
};

/// Ancestral sampling. Utterance i depends only on (seed, i).
std::vector<SyntheticUtterance> Generate(const HmmTask &task, uint64_t seed,
                                         size_t n,
                                         const GenerateOptions &opts = {},
                                         int threads = 1);

/// Word sequences sampled from a bigram table (e.g. LM training text).
std::vector<std::vector<TokenId>> SampleSentences(const Vocabulary &vocab,
                                                  const BigramTable &lm,
                                                  uint64_t seed, size_t n,
                                                  size_t max_words = 100);

/// One-channel feature matrix holding the symbol ids.
Acoustics ToAcoustics(const SyntheticUtterance &utt);

/// Expected number of occurrences of each word per utterance under `lm`
/// (fundamental matrix of the absorbing chain, by fixed-point iteration).
std::vector<double> ExpectedWordCounts(const Vocabulary &vocab,
                                       const BigramTable &lm);

}  // namespace fusekit

#endif  // FUSEKIT_HARNESS_TASK_H_

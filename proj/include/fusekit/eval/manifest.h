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

// eval/manifest.h
// Tab-separated utterance manifests, trn hypothesis files and corpus scoring.
//
// Manifest header (exact, tab separated):
//   utt_id  path  speaker  conversation  channel  order  transcript
// `path` is a WAV or feature file, relative paths resolve against the
// manifest's directory. `order` is the position within (conversation,
// channel).

#ifndef FUSEKIT_EVAL_MANIFEST_H_
#define FUSEKIT_EVAL_MANIFEST_H_

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fusekit/eval/wer.h"

namespace fusekit {

struct ManifestRecord {
  std::string utt_id;
  std::string path;
  std::string speaker;
  std::string conversation;
  std::string channel;
  int64_t order = 0;
  std::string transcript;

  bool operator==(const ManifestRecord &other) const = default;
};

class Manifest {
 public:
  Manifest() = default;
  /// Throws on duplicate ids or duplicate order within a channel.
  explicit Manifest(std::vector<ManifestRecord> records);

  const std::vector<ManifestRecord> &records() const { return records_; }
  size_t size() const { return records_.size(); }
  const ManifestRecord *Find(const std::string &utt_id) const;

  /// Indices of records grouped by (conversation, channel), each group sorted
  /// by order.
  std::vector<std::vector<size_t>> Channels() const;

 private:
  std::vector<ManifestRecord> records_;
  std::map<std::string, size_t> index_;
};

Manifest ParseManifest(const std::string &text);
Manifest ReadManifest(const std::string &path);
std::string SerializeManifest(const Manifest &m);
void WriteManifest(const std::string &path, const Manifest &m);
/// Resolves a record path against the directory of the manifest file.
std::string ResolvePath(const std::string &manifest_path,
                        const std::string &record_path);

/// Adds relabelled copies standing in for speed-perturbed audio: for each
/// factor f, utterance u of speaker s is copied as "sp<f>-u" with speaker
/// "sp<f>-s" and conversation "sp<f>-c". Audio itself is not resampled.
Manifest AddSpeedPerturbedCopies(const Manifest &m,
                                 const std::vector<double> &factors);

/// Ordered (utt_id, text) pairs of a trn file: "word word ... (utt-id)".
using TrnEntries = std::vector<std::pair<std::string, std::string>>;
TrnEntries ParseTrn(const std::string &text);
TrnEntries ReadTrn(const std::string &path);
std::string SerializeTrn(const TrnEntries &entries);
void WriteTrn(const std::string &path, const TrnEntries &entries);

struct ScoreReport {
  WerReport corpus;  // pooled counts
  std::vector<std::pair<std::string, WerReport>> utterances;
};

/// Scores hypotheses against manifest transcripts. Every manifest utterance
/// needs exactly one hypothesis and vice versa; violations are reported with
/// the offending ids.
ScoreReport ScoreManifest(const Manifest &manifest, const TrnEntries &hyps);

}  // namespace fusekit

#endif  // FUSEKIT_EVAL_MANIFEST_H_

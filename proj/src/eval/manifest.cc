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

#include "fusekit/eval/manifest.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>
#include <tuple>

#include "fusekit/common/binary_io.h"
#include "fusekit/common/error.h"

namespace fusekit {

namespace {

constexpr const char *kHeader =
    "utt_id\tpath\tspeaker\tconversation\tchannel\torder\ttranscript";

std::vector<std::string> SplitTabs(const std::string &line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

std::string JoinIds(const std::vector<std::string> &ids) {
  std::string out;
  const size_t shown = std::min<size_t>(ids.size(), 20);
  for (size_t i = 0; i < shown; ++i) out += (i ? " " : "") + ids[i];
  if (ids.size() > shown) out += " ... (" + std::to_string(ids.size()) + " total)";
  return out;
}

std::string FactorTag(double f) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "sp%g-", f);
  return buf;
}

}  // namespace

Manifest::Manifest(std::vector<ManifestRecord> records)
    : records_(std::move(records)) {
  std::set<std::tuple<std::string, std::string, int64_t>> orders;
  for (size_t i = 0; i < records_.size(); ++i) {
    const auto &r = records_[i];
    Check(!r.utt_id.empty(), Errc::kInvalidArgument, "empty utterance id");
    Check(index_.emplace(r.utt_id, i).second, Errc::kInvalidArgument,
          "duplicate utterance id: " + r.utt_id);
    Check(orders.emplace(r.conversation, r.channel, r.order).second,
          Errc::kInvalidArgument,
          "duplicate order " + std::to_string(r.order) + " in conversation " +
              r.conversation + " channel " + r.channel);
  }
}

const ManifestRecord *Manifest::Find(const std::string &utt_id) const {
  auto it = index_.find(utt_id);
  return it == index_.end() ? nullptr : &records_[it->second];
}

std::vector<std::vector<size_t>> Manifest::Channels() const {
  std::map<std::pair<std::string, std::string>, std::vector<size_t>> groups;
  for (size_t i = 0; i < records_.size(); ++i)
    groups[{records_[i].conversation, records_[i].channel}].push_back(i);
  std::vector<std::vector<size_t>> out;
  for (auto &[key, idx] : groups) {
    std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
      return records_[a].order < records_[b].order;
    });
    out.push_back(std::move(idx));
  }
  return out;
}

Manifest ParseManifest(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  std::vector<ManifestRecord> records;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      Check(line == kHeader, Errc::kParse,
            "manifest line " + std::to_string(lineno) +
                ": expected header '" + std::string(kHeader) + "'");
      header = true;
      continue;
    }
    auto f = SplitTabs(line);
    Check(f.size() == 7, Errc::kParse,
          "manifest line " + std::to_string(lineno) + ": expected 7 fields, got " +
              std::to_string(f.size()));
    ManifestRecord r;
    r.utt_id = f[0];
    r.path = f[1];
    r.speaker = f[2];
    r.conversation = f[3];
    r.channel = f[4];
    try {
      size_t used = 0;
      r.order = std::stoll(f[5], &used);
      Check(used == f[5].size(), Errc::kParse, "");
    } catch (const std::exception &) {
      Fail(Errc::kParse, "manifest line " + std::to_string(lineno) +
                             ": bad order '" + f[5] + "'");
    }
    r.transcript = f[6];
    records.push_back(std::move(r));
  }
  Check(header, Errc::kParse, "manifest is empty (no header)");
  try {
    return Manifest(std::move(records));
  } catch (const Error &e) {
    throw Error(Errc::kParse, std::string("manifest: ") + e.what());
  }
}

Manifest ReadManifest(const std::string &path) {
  try {
    return ParseManifest(binio::ReadFileToString(path));
  } catch (const Error &e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::string SerializeManifest(const Manifest &m) {
  std::ostringstream out;
  out << kHeader << '\n';
  for (const auto &r : m.records())
    out << r.utt_id << '\t' << r.path << '\t' << r.speaker << '\t'
        << r.conversation << '\t' << r.channel << '\t' << r.order << '\t'
        << r.transcript << '\n';
  return out.str();
}

void WriteManifest(const std::string &path, const Manifest &m) {
  binio::WriteStringToFile(path, SerializeManifest(m));
}

std::string ResolvePath(const std::string &manifest_path,
                        const std::string &record_path) {
  std::filesystem::path p(record_path);
  if (p.is_absolute()) return record_path;
  return (std::filesystem::path(manifest_path).parent_path() / p).string();
}

Manifest AddSpeedPerturbedCopies(const Manifest &m,
                                 const std::vector<double> &factors) {
  std::vector<ManifestRecord> out = m.records();
  for (double f : factors) {
    Check(f > 0.0, Errc::kInvalidArgument, "speed factors must be positive");
    if (f == 1.0) continue;
    const std::string tag = FactorTag(f);
    for (const auto &r : m.records()) {
      ManifestRecord c = r;
      c.utt_id = tag + r.utt_id;
      c.speaker = tag + r.speaker;
      c.conversation = tag + r.conversation;
      out.push_back(std::move(c));
    }
  }
  return Manifest(std::move(out));
}

TrnEntries ParseTrn(const std::string &text) {
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  TrnEntries out;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const size_t close = line.find_last_not_of(" \t");
    const size_t open = line.rfind('(');
    Check(line[close] == ')' && open != std::string::npos && open < close,
          Errc::kParse,
          "trn line " + std::to_string(lineno) + ": expected 'words (utt-id)'");
    std::string id = line.substr(open + 1, close - open - 1);
    Check(!id.empty(), Errc::kParse,
          "trn line " + std::to_string(lineno) + ": empty utterance id");
    std::string words = line.substr(0, open);
    while (!words.empty() && std::isspace(static_cast<unsigned char>(words.back())))
      words.pop_back();
    out.emplace_back(std::move(id), std::move(words));
  }
  return out;
}

TrnEntries ReadTrn(const std::string &path) {
  try {
    return ParseTrn(binio::ReadFileToString(path));
  } catch (const Error &e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::string SerializeTrn(const TrnEntries &entries) {
  std::string out;
  for (const auto &[id, words] : entries) {
    if (!words.empty()) out += words + ' ';
    out += '(' + id + ")\n";
  }
  return out;
}

void WriteTrn(const std::string &path, const TrnEntries &entries) {
  binio::WriteStringToFile(path, SerializeTrn(entries));
}

ScoreReport ScoreManifest(const Manifest &manifest, const TrnEntries &hyps) {
  std::map<std::string, const std::string *> by_id;
  std::vector<std::string> duplicate, unknown, missing;
  for (const auto &[id, words] : hyps) {
    if (!by_id.emplace(id, &words).second) duplicate.push_back(id);
    if (!manifest.Find(id)) unknown.push_back(id);
  }
  for (const auto &r : manifest.records())
    if (!by_id.count(r.utt_id)) missing.push_back(r.utt_id);
  std::string problems;
  if (!duplicate.empty()) problems += " duplicate hypothesis ids: " + JoinIds(duplicate) + ";";
  if (!unknown.empty()) problems += " ids not in manifest: " + JoinIds(unknown) + ";";
  if (!missing.empty()) problems += " ids without hypothesis: " + JoinIds(missing) + ";";
  Check(problems.empty(), Errc::kInvalidArgument, "scoring:" + problems);

  ScoreReport report;
  for (const auto &r : manifest.records()) {
    WerReport w = AlignCounts(Tokenize(r.transcript), Tokenize(*by_id[r.utt_id]));
    report.corpus += w;
    report.utterances.emplace_back(r.utt_id, w);
  }
  return report;
}

}  // namespace fusekit

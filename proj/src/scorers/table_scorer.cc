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

#include "fusekit/scorers/table_scorer.h"

#include <cmath>
#include <limits>
#include <sstream>

#include "fusekit/common/binary_io.h"
#include "fusekit/common/error.h"

namespace fusekit {

namespace {

constexpr double kSumTolerance = 1e-6;

class UtteranceBinding : public AcousticBinding {
 public:
  explicit UtteranceBinding(std::string id) : id_(std::move(id)) {}
  const std::string &id() const { return id_; }
  bool Equals(const AcousticBinding &other) const override {
    auto *o = dynamic_cast<const UtteranceBinding *>(&other);
    return o != nullptr && o->id_ == id_;
  }

 private:
  std::string id_;
};

std::vector<TokenId> ParseKey(const Vocabulary &vocab, const std::string &key) {
  std::istringstream in(key);
  std::vector<std::string> words;
  for (std::string w; in >> w;) words.push_back(w);
  return vocab.Encode(words);
}

std::string KeyString(const Vocabulary &vocab, const std::vector<TokenId> &key) {
  std::string out;
  for (TokenId t : key) {
    if (!out.empty()) out += ' ';
    out += vocab.token(t);
  }
  return out;
}

LogDistribution ParseRow(const Vocabulary &vocab, const nlohmann::json &row,
                         const std::string &key) {
  Check(row.is_object(), Errc::kParse, "table row '" + key + "' must be an object");
  std::vector<double> logp(vocab.size(), -std::numeric_limits<double>::infinity());
  double sum = 0.0;
  for (const auto &[word, p] : row.items()) {
    auto id = vocab.Find(word);
    Check(id.has_value(), Errc::kParse,
          "table row '" + key + "': unknown token " + word);
    Check(p.is_number(), Errc::kParse, "table row '" + key + "': non-numeric probability");
    const double v = p.get<double>();
    Check(v >= 0.0 && std::isfinite(v), Errc::kParse,
          "table row '" + key + "': probabilities must be finite and >= 0");
    Check(*id != vocab.bos() || v == 0.0, Errc::kParse,
          "table row '" + key + "': <s> cannot be emitted");
    sum += v;
    logp[*id] = v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
  }
  Check(std::abs(sum - 1.0) <= kSumTolerance, Errc::kParse,
        "table row '" + key + "' sums to " + std::to_string(sum));
  return LogDistribution::Normalize(std::move(logp));
}

std::vector<std::vector<double>> ParseAttention(const nlohmann::json &j) {
  Check(j.is_array(), Errc::kParse, "attention must be an array of rows");
  std::vector<std::vector<double>> rows;
  for (const auto &r : j) {
    auto row = r.get<std::vector<double>>();
    Check(!row.empty(), Errc::kParse, "attention row is empty");
    double sum = 0.0;
    for (double v : row) {
      Check(v >= 0.0 && std::isfinite(v), Errc::kParse,
            "attention weights must be finite and >= 0");
      sum += v;
    }
    Check(std::abs(sum - 1.0) <= kSumTolerance, Errc::kParse,
          "attention row does not sum to 1");
    Check(rows.empty() || rows.front().size() == row.size(), Errc::kParse,
          "attention rows differ in length");
    rows.push_back(std::move(row));
  }
  return rows;
}

TableScorer::Tables ParseTables(const Vocabulary &vocab, const nlohmann::json &j) {
  TableScorer::Tables t;
  if (j.contains("tables")) {
    Check(j["tables"].is_object(), Errc::kParse, "'tables' must be an object");
    for (const auto &[key, row] : j["tables"].items())
      t.rows.emplace(ParseKey(vocab, key), ParseRow(vocab, row, key));
  }
  if (j.contains("attention")) t.attention = ParseAttention(j["attention"]);
  return t;
}

nlohmann::json TablesToJson(const Vocabulary &vocab, const TableScorer::Tables &t) {
  nlohmann::json out;
  nlohmann::json tables = nlohmann::json::object();
  for (const auto &[key, dist] : t.rows) {
    nlohmann::json row = nlohmann::json::object();
    for (size_t w = 0; w < dist.size(); ++w)
      if (std::isfinite(dist[w])) row[vocab.token(w)] = std::exp(dist[w]);
    tables[KeyString(vocab, key)] = row;
  }
  out["tables"] = tables;
  if (!t.attention.empty()) out["attention"] = t.attention;
  return out;
}

}  // namespace

TableScorer::TableScorer(Vocabulary vocab, bool e2e, bool single_head,
                         Tables defaults, std::map<std::string, Tables> utterances)
    : vocab_(std::move(vocab)),
      e2e_(e2e),
      single_head_(single_head),
      defaults_(std::move(defaults)),
      utterances_(std::move(utterances)) {
  Check(e2e_ || utterances_.empty(), Errc::kInvalidArgument,
        "only end-to-end tables may be utterance specific");
  Check(e2e_ || !single_head_, Errc::kInvalidArgument,
        "single_head only applies to end-to-end tables");
  for (const auto &[key, dist] : defaults_.rows)
    Check(dist.size() == vocab_.size(), Errc::kInvalidArgument,
          "table row size does not match vocabulary");
}

std::shared_ptr<TableScorer> TableScorer::FromJson(const nlohmann::json &j) {
  try {
    Check(j.is_object(), Errc::kParse, "table scorer must be a JSON object");
    const std::string kind = j.value("kind", "lm");
    Check(kind == "e2e" || kind == "lm", Errc::kParse, "kind must be 'e2e' or 'lm'");
    Check(j.contains("vocab"), Errc::kParse, "missing 'vocab'");
    Vocabulary vocab(j["vocab"].get<std::vector<std::string>>(),
                     j.value("bos", "<s>"), j.value("eos", "</s>"),
                     j.value("unk", "<unk>"));
    const bool e2e = kind == "e2e";
    Tables defaults = ParseTables(vocab, j);
    std::map<std::string, Tables> utts;
    if (j.contains("utterances")) {
      Check(j["utterances"].is_object(), Errc::kParse, "'utterances' must be an object");
      for (const auto &[id, u] : j["utterances"].items())
        utts.emplace(id, ParseTables(vocab, u));
    }
    return std::make_shared<TableScorer>(std::move(vocab), e2e,
                                         j.value("single_head", false),
                                         std::move(defaults), std::move(utts));
  } catch (const nlohmann::json::exception &e) {
    Fail(Errc::kParse, std::string("table scorer: ") + e.what());
  }
}

std::shared_ptr<TableScorer> TableScorer::Load(const std::string &path) {
  const std::string text = binio::ReadFileToString(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    Fail(Errc::kParse, path + ": " + e.what());
  }
  try {
    return FromJson(j);
  } catch (const Error &e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

nlohmann::json TableScorer::ToJson() const {
  nlohmann::json j = TablesToJson(vocab_, defaults_);
  j["kind"] = e2e_ ? "e2e" : "lm";
  j["vocab"] = vocab_.tokens();
  j["bos"] = vocab_.token(vocab_.bos());
  j["eos"] = vocab_.token(vocab_.eos());
  if (vocab_.has_unk()) j["unk"] = vocab_.token(vocab_.unk());
  if (e2e_) j["single_head"] = single_head_;
  if (!utterances_.empty()) {
    nlohmann::json u = nlohmann::json::object();
    for (const auto &[id, t] : utterances_) u[id] = TablesToJson(vocab_, t);
    j["utterances"] = u;
  }
  return j;
}

const TableScorer::Tables &TableScorer::TablesFor(const ScorerState &state) const {
  if (auto *b = dynamic_cast<const UtteranceBinding *>(state.binding.get())) {
    auto it = utterances_.find(b->id());
    if (it != utterances_.end()) return it->second;
  }
  return defaults_;
}

ScorerState TableScorer::DoStart(const Acoustics *acoustics) const {
  ScorerState s;
  s.history = {vocab_.bos()};
  if (e2e_ && acoustics)
    s.binding = std::make_shared<UtteranceBinding>(acoustics->utterance_id);
  return s;
}

ScoreResult TableScorer::DoScore(const ScorerState &state) const {
  const Tables &own = TablesFor(state);
  const size_t emitted = state.history.size() - 1;  // minus <s>
  // Longest suffix first; utterance tables fall back to the defaults.
  for (size_t k = state.history.size() + 1; k-- > 0;) {
    std::vector<TokenId> key(state.history.end() - k, state.history.end());
    const LogDistribution *dist = nullptr;
    if (auto it = own.rows.find(key); it != own.rows.end())
      dist = &it->second;
    else if (auto it2 = defaults_.rows.find(key); it2 != defaults_.rows.end())
      dist = &it2->second;
    if (!dist) continue;
    ScoreResult r{*dist, std::nullopt};
    const auto &att = own.attention.empty() ? defaults_.attention : own.attention;
    if (e2e_ && !att.empty())
      r.attention = AttentionColumn{att[std::min(emitted, att.size() - 1)]};
    return r;
  }
  Fail(Errc::kInvalidArgument, name() + ": no table row for history");
}

ScorerState TableScorer::DoAdvance(const ScorerState &state, TokenId token) const {
  ScorerState next = state;
  next.history.push_back(token);
  return next;
}

}  // namespace fusekit

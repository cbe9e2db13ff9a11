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

#include "fusekit/scorers/ngram.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "fusekit/common/binary_io.h"
#include "fusekit/common/error.h"

namespace fusekit {

namespace {

constexpr double kLn10 = std::numbers::ln10;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

[[noreturn]] void ParseError(size_t line, const std::string &what) {
  Fail(Errc::kParse, "ARPA line " + std::to_string(line) + ": " + what);
}

double ParseNumber(const std::string &s, size_t line) {
  try {
    size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) ParseError(line, "bad number '" + s + "'");
    return v;
  } catch (const std::logic_error &) {
    ParseError(line, "bad number '" + s + "'");
  }
}

struct RawNgram {
  std::vector<std::string> words;
  double logp;
  double backoff;
};

}  // namespace

size_t TokenSeqHash::operator()(const std::vector<TokenId> &seq) const {
  size_t h = 0x9e3779b97f4a7c15ULL;
  for (TokenId t : seq)
    h ^= static_cast<size_t>(t) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

std::shared_ptr<NgramScorer> NgramScorer::Parse(const std::string &text,
                                                const Vocabulary *vocab) {
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  std::vector<size_t> counts;
  std::vector<RawNgram> grams;
  enum { kPreamble, kData, kSection, kEnd } stage = kPreamble;
  int section = 0;
  std::vector<size_t> seen;

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string f; fields >> f;) tok.push_back(f);
    if (tok.empty()) continue;

    if (stage == kPreamble) {
      if (tok[0] == "\\data\\") stage = kData;
      continue;  // free text before \data\ is allowed
    }
    if (stage == kEnd) ParseError(lineno, "content after \\end\\");
    if (tok[0] == "\\end\\") {
      stage = kEnd;
      continue;
    }
    if (tok[0].front() == '\\') {
      // \N-grams:
      const std::string &h = tok[0];
      const auto dash = h.find("-grams:");
      if (dash == std::string::npos || h.size() != dash + 7)
        ParseError(lineno, "unknown section header " + h);
      const int n = static_cast<int>(ParseNumber(h.substr(1, dash - 1), lineno));
      if (n != section + 1 || n > static_cast<int>(counts.size()))
        ParseError(lineno, "unexpected section " + h);
      if (section > 0 && seen[section - 1] != counts[section - 1])
        ParseError(lineno, "section " + std::to_string(section) +
                               " has wrong number of entries");
      section = n;
      stage = kSection;
      continue;
    }
    if (stage == kData) {
      if (tok[0] != "ngram" || tok.size() != 2)
        ParseError(lineno, "expected 'ngram N=count'");
      const auto eq = tok[1].find('=');
      if (eq == std::string::npos) ParseError(lineno, "expected 'ngram N=count'");
      const int n = static_cast<int>(ParseNumber(tok[1].substr(0, eq), lineno));
      if (n != static_cast<int>(counts.size()) + 1)
        ParseError(lineno, "ngram orders must be listed in sequence");
      counts.push_back(static_cast<size_t>(ParseNumber(tok[1].substr(eq + 1), lineno)));
      seen.push_back(0);
      continue;
    }
    // stage == kSection: logprob w1 .. wn [backoff]
    const size_t n = static_cast<size_t>(section);
    if (tok.size() != n + 1 && tok.size() != n + 2)
      ParseError(lineno, "expected " + std::to_string(n) + "-gram entry");
    RawNgram g;
    g.logp = ParseNumber(tok[0], lineno) * kLn10;
    g.words.assign(tok.begin() + 1, tok.begin() + 1 + n);
    g.backoff = tok.size() == n + 2 ? ParseNumber(tok[n + 1], lineno) * kLn10 : 0.0;
    grams.push_back(std::move(g));
    ++seen[n - 1];
  }
  if (stage == kPreamble) Fail(Errc::kParse, "ARPA: missing \\data\\ header");
  if (stage != kEnd) ParseError(lineno, "missing \\end\\ marker");
  if (counts.empty()) Fail(Errc::kParse, "ARPA: no ngram counts");
  if (section != static_cast<int>(counts.size()))
    ParseError(lineno, "missing n-gram sections");
  for (size_t i = 0; i < counts.size(); ++i)
    if (seen[i] != counts[i])
      ParseError(lineno, std::to_string(i + 1) + "-gram count mismatch");

  auto model = std::shared_ptr<NgramScorer>(new NgramScorer());
  model->order_ = static_cast<int>(counts.size());
  if (vocab) {
    model->vocab_ = *vocab;
  } else {
    std::vector<std::string> words;
    for (const auto &g : grams)
      if (g.words.size() == 1) words.push_back(g.words[0]);
    for (const char *special : {"<s>", "</s>"})
      if (std::find(words.begin(), words.end(), special) == words.end())
        words.push_back(special);
    model->vocab_ = Vocabulary(std::move(words));
  }
  for (const auto &g : grams) {
    std::vector<TokenId> key;
    bool known = true;
    for (const auto &w : g.words) {
      auto id = model->vocab_.Find(w);
      if (!id) {
        known = false;
        break;
      }
      key.push_back(*id);
    }
    if (known) model->ngrams_[key] = Entry{g.logp, g.backoff};
  }
  // Fallback for unlisted unigrams is the <unk> probability.
  double unk_logp = kNegInf;
  if (model->vocab_.has_unk())
    if (auto it = model->ngrams_.find({model->vocab_.unk()});
        it != model->ngrams_.end())
      unk_logp = it->second.logp;
  model->unigram_fallback_.assign(model->vocab_.size(), unk_logp);
  return model;
}

std::shared_ptr<NgramScorer> NgramScorer::FromArpa(const std::string &text) {
  return Parse(text, nullptr);
}

std::shared_ptr<NgramScorer> NgramScorer::FromArpa(const std::string &text,
                                                   const Vocabulary &vocab) {
  return Parse(text, &vocab);
}

std::shared_ptr<NgramScorer> NgramScorer::Load(const std::string &path) {
  try {
    return FromArpa(binio::ReadFileToString(path));
  } catch (const Error &e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::shared_ptr<NgramScorer> NgramScorer::Load(const std::string &path,
                                               const Vocabulary &vocab) {
  try {
    return FromArpa(binio::ReadFileToString(path), vocab);
  } catch (const Error &e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

double NgramScorer::RawLogProb(std::span<const TokenId> history,
                               TokenId word) const {
  const size_t max_ctx =
      std::min(history.size(), static_cast<size_t>(order_ - 1));
  double backoff = 0.0;
  std::vector<TokenId> key;
  for (size_t k = max_ctx + 1; k-- > 0;) {
    key.assign(history.end() - k, history.end());
    key.push_back(word);
    if (auto it = ngrams_.find(key); it != ngrams_.end())
      return backoff + it->second.logp;
    if (k > 0) {
      key.pop_back();
      if (auto it = ngrams_.find(key); it != ngrams_.end())
        backoff += it->second.backoff;
    }
  }
  return backoff + unigram_fallback_[word];
}

ScorerState NgramScorer::DoStart(const Acoustics *) const {
  ScorerState s;
  s.history = {vocab_.bos()};
  return s;
}

ScoreResult NgramScorer::DoScore(const ScorerState &state) const {
  std::vector<double> scores(vocab_.size());
  for (size_t w = 0; w < scores.size(); ++w)
    scores[w] = static_cast<TokenId>(w) == vocab_.bos()
                    ? kNegInf
                    : RawLogProb(state.history, static_cast<TokenId>(w));
  return {LogDistribution::Normalize(std::move(scores)), std::nullopt};
}

ScorerState NgramScorer::DoAdvance(const ScorerState &state,
                                   TokenId token) const {
  ScorerState next;
  next.history = state.history;
  next.history.push_back(token);
  const size_t keep = static_cast<size_t>(std::max(order_ - 1, 0));
  if (next.history.size() > keep)
    next.history.erase(next.history.begin(),
                       next.history.end() - static_cast<std::ptrdiff_t>(keep));
  return next;
}

std::string BigramToArpa(const Vocabulary &vocab,
                         const std::vector<std::vector<double>> &bigram,
                         const std::vector<double> &unigram) {
  Check(bigram.size() == vocab.size() && unigram.size() == vocab.size(),
        Errc::kInvalidArgument, "bigram table does not match vocabulary");
  auto log10p = [](double p) { return p > 0.0 ? std::log10(p) : -99.0; };
  char buf[64];
  std::ostringstream body;
  size_t n2 = 0;
  for (size_t h = 0; h < vocab.size(); ++h) {
    if (static_cast<TokenId>(h) == vocab.eos()) continue;
    for (size_t w = 0; w < vocab.size(); ++w) {
      if (bigram[h][w] <= 0.0) continue;
      std::snprintf(buf, sizeof(buf), "%.12f", std::log10(bigram[h][w]));
      body << buf << ' ' << vocab.token(h) << ' ' << vocab.token(w) << '\n';
      ++n2;
    }
  }
  std::ostringstream out;
  out << "\\data\\\nngram 1=" << vocab.size() << "\nngram 2=" << n2 << "\n\n";
  out << "\\1-grams:\n";
  for (size_t w = 0; w < vocab.size(); ++w) {
    std::snprintf(buf, sizeof(buf), "%.12f", log10p(unigram[w]));
    // Rows list all their mass, so unlisted pairs get (effectively) zero.
    out << buf << ' ' << vocab.token(w)
        << (static_cast<TokenId>(w) == vocab.eos() ? " 0\n" : " -99\n");
  }
  out << "\n\\2-grams:\n" << body.str() << "\n\\end\\\n";
  return out.str();
}

}  // namespace fusekit

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

#include "fusekit/pipeline/demo.h"

#include <cmath>
#include <filesystem>
#include <numbers>
#include <map>
#include <queue>

#include <fmt/format.h>

#include "fusekit/common/binary_io.h"
#include "fusekit/common/error.h"
#include "fusekit/common/rng.h"
#include "fusekit/eval/manifest.h"
#include "fusekit/features/io.h"
#include "fusekit/harness/exact_scorers.h"
#include "fusekit/harness/fusion_eval.h"
#include "fusekit/harness/toy_lm.h"
#include "fusekit/scorers/ngram.h"

namespace fusekit {

namespace fs = std::filesystem;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Prefix {
  double logmass;
  std::vector<TokenId> tokens;
  ScorerState state;
};

// Best first; ties go to the lexicographically smaller prefix.
struct Worse {
  bool operator()(const Prefix &a, const Prefix &b) const {
    if (a.logmass != b.logmass) return a.logmass < b.logmass;
    return a.tokens > b.tokens;
  }
};

Waveform Synthesize(const SyntheticUtterance &u, size_t num_symbols,
                    int sample_rate, uint64_t seed) {
  Rng spk(DeriveSeed(seed, u.speaker));
  const double gain = 6000.0 * spk.Uniform(0.5, 1.5);
  const double pitch = spk.Uniform(0.97, 1.03);
  Rng noise(DeriveSeed(seed, u.id));
  const size_t per_frame = static_cast<size_t>(sample_rate / 100);  // 10 ms
  const size_t pad = static_cast<size_t>(sample_rate / 10);
  Waveform w;
  w.sample_rate_hz = sample_rate;
  double phase = 0.0;
  for (size_t i = 0; i < pad; ++i) w.samples.push_back(60.0 * noise.Normal());
  for (int s : u.symbols) {
    // Symbols spread evenly over 400 Hz .. 0.75 * Nyquist.
    const double span = 0.375 * sample_rate - 400.0;
    const double hz =
        pitch * (400.0 + span * s / std::max<double>(1.0, num_symbols - 1.0));
    for (size_t i = 0; i < per_frame; ++i) {
      phase += 2.0 * std::numbers::pi * hz / sample_rate;
      w.samples.push_back(gain * std::sin(phase) + 60.0 * noise.Normal());
    }
  }
  for (size_t i = 0; i < pad; ++i) w.samples.push_back(60.0 * noise.Normal());
  return w;
}

std::vector<double> Unigram(const Vocabulary &vocab,
                            const std::vector<std::vector<TokenId>> &sentences) {
  std::vector<double> u(vocab.size(), 0.0);
  double n = 0.0;
  for (const auto &s : sentences) {
    for (TokenId t : s) u[t] += 1.0;
    u[vocab.eos()] += 1.0;
    n += s.size() + 1.0;
  }
  for (double &x : u) x /= n;
  return u;
}

std::string TrainArpa(const Vocabulary &vocab, const BigramTable &source, uint64_t seed,
                      size_t n, const ToyLmOptions &opts) {
  const auto sentences = SampleSentences(vocab, source, seed, n);
  const auto lm = TrainToyLm(vocab, sentences, opts).lm;
  return BigramToArpa(vocab, lm->Probs(), Unigram(vocab, sentences));
}

}  // namespace

TableScorer::Tables ExportUtteranceTables(const Scorer &e2e, const Acoustics &ac,
                                          size_t max_prefixes, size_t max_len) {
  const Vocabulary &vocab = e2e.vocab();
  TableScorer::Tables t;
  std::priority_queue<Prefix, std::vector<Prefix>, Worse> queue;
  queue.push({0.0, {}, e2e.Start({}, &ac)});
  while (!queue.empty() && t.rows.size() < max_prefixes) {
    Prefix p = queue.top();
    queue.pop();
    const LogDistribution dist = e2e.Score(p.state).dist;
    std::vector<TokenId> key{vocab.bos()};
    key.insert(key.end(), p.tokens.begin(), p.tokens.end());
    t.rows.emplace(std::move(key), dist);
    if (p.tokens.size() + 1 >= max_len) continue;
    for (size_t v = 0; v < vocab.size(); ++v) {
      const auto tok = static_cast<TokenId>(v);
      if (tok == vocab.bos() || tok == vocab.eos() || dist[v] == kNegInf) continue;
      Prefix next{p.logmass + dist[v], p.tokens, e2e.Advance(p.state, tok)};
      next.tokens.push_back(tok);
      queue.push(std::move(next));
    }
  }

  // Attention columns along the greedy path.
  ScorerState st = e2e.Start({}, &ac);
  for (size_t n = 0; n < max_len; ++n) {
    const ScoreResult r = e2e.Score(st);
    if (!r.attention) break;
    t.attention.push_back(r.attention->weights);
    size_t best = 0;
    for (size_t v = 1; v < r.dist.size(); ++v)
      if (r.dist[v] > r.dist[best]) best = v;
    if (static_cast<TokenId>(best) == vocab.eos() || r.dist[best] == kNegInf) break;
    st = e2e.Advance(st, static_cast<TokenId>(best));
  }
  return t;
}

void MakeDemo(const std::string &task_path, const std::string &out_dir,
              const DemoOptions &options) {
  Check(options.utterances > 0, Errc::kInvalidArgument, "demo needs utterances");
  Check(options.sample_rate_hz == 8000 || options.sample_rate_hz == 16000,
        Errc::kInvalidArgument, "sample rate must be 8000 or 16000");
  const FusionExperiment exp = LoadFusionExperiment(task_path);
  const HmmTask &source = exp.task;
  const Vocabulary &vocab = source.vocab;
  HmmTask target = source;
  target.lm = exp.target_lm;

  const fs::path out(out_dir);
  fs::create_directories(out / "wav");
  GenerateOptions gopts;
  gopts.id_prefix = "demo";
  const auto corpus = Generate(target, options.seed, options.utterances, gopts);

  // Audio and manifest.
  std::vector<ManifestRecord> records;
  for (const auto &u : corpus) {
    const std::string rel = "wav/" + u.id + ".wav";
    WriteWav((out / rel).string(),
             Synthesize(u, source.num_symbols, options.sample_rate_hz, options.seed));
    records.push_back({u.id, rel, u.speaker, u.conversation, u.channel, u.order,
                       vocab.Decode(u.words)});
  }
  WriteManifest((out / "manifest.tsv").string(), Manifest(records));

  // E2E table: source bigram rows as the acoustically blind fallback, plus
  // exact posteriors over each utterance's high-mass prefixes.
  TableScorer::Tables defaults;
  auto log_row = [&](TokenId h) {
    std::vector<double> lp(vocab.size());
    for (size_t v = 0; v < vocab.size(); ++v)
      lp[v] = source.lm[h][v] > 0.0 ? std::log(source.lm[h][v]) : kNegInf;
    return LogDistribution(lp);
  };
  defaults.rows.emplace(std::vector<TokenId>{vocab.bos()}, log_row(vocab.bos()));
  for (TokenId w : source.Words()) defaults.rows.emplace(std::vector<TokenId>{w}, log_row(w));
  const ExactE2EScorer exact(source);
  std::map<std::string, TableScorer::Tables> utts;
  for (const auto &u : corpus)
    utts[u.id] = ExportUtteranceTables(exact, ToAcoustics(u), options.table_prefixes,
                                       u.symbols.size() + 1);
  const TableScorer table(vocab, true, true, defaults, std::move(utts));
  binio::WriteStringToFile((out / "e2e.json").string(), table.ToJson().dump() + "\n");

  // External LM from target-domain text, internal LM from source transcripts.
  binio::WriteStringToFile(
      (out / "lm.arpa").string(),
      TrainArpa(vocab, exp.target_lm, DeriveSeed(options.seed, std::string_view("external")),
                options.lm_sentences, exp.lm_training));
  binio::WriteStringToFile(
      (out / "int.arpa").string(),
      TrainArpa(vocab, source.lm, DeriveSeed(options.seed, std::string_view("internal")),
                options.lm_sentences, exp.lm_training));

  binio::WriteStringToFile((out / "weights.toml").string(),
                           "# Probability-ratio fusion: e2e + lm - internal_lm.\n"
                           "[weights]\n"
                           "e2e = [1.0]\n"
                           "lm = [1.0]\n"
                           "internal_lm = 0.75\n"
                           "length = 0.0\n"
                           "\n"
                           "[decode]\n"
                           "beam = 8\n"
                           "nbest = 4\n");
  binio::WriteStringToFile((out / "features.toml").string(),
                           fmt::format("[features]\n"
                                       "preset = \"baseline\"\n"
                                       "sample_rate_hz = {}\n"
                                       "fmax_hz = {}\n"
                                       "n_mels = 40\n",
                                       options.sample_rate_hz,
                                       options.sample_rate_hz / 2));
  fs::copy_file(task_path, out / "fusion_task.toml", fs::copy_options::overwrite_existing);
  binio::WriteStringToFile((out / "run.toml").string(),
                           fmt::format("[run]\n"
                                       "name = \"demo\"\n"
                                       "output_dir = \"out\"\n"
                                       "manifest = \"manifest.tsv\"\n"
                                       "seed = {}\n"
                                       "threads = 1\n"
                                       "stages = [\"features\", \"speaker\", \"decode\", "
                                       "\"score\", \"harness\"]\n"
                                       "\n"
                                       "[features]\n"
                                       "config = \"features.toml\"\n"
                                       "\n"
                                       "[speaker]\n"
                                       "components = 8\n"
                                       "ubm_iterations = 5\n"
                                       "rank = 4\n"
                                       "tmat_iterations = 3\n"
                                       "\n"
                                       "[decode]\n"
                                       "e2e = [\"e2e.json\"]\n"
                                       "lm = [\"lm.arpa\"]\n"
                                       "internal_lm = \"int.arpa\"\n"
                                       "weights = \"weights.toml\"\n"
                                       "context = \"hypothesis\"\n"
                                       "context_words = 150\n"
                                       "\n"
                                       "[harness]\n"
                                       "task = \"fusion_task.toml\"\n",
                                       options.seed));
}

}  // namespace fusekit

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

// fusekit: command-line front end.
//
//   fusekit features extract --config f.toml --wav in.wav --out out.feat
//   fusekit speaker train-ubm|train-tmat|extract --manifest m.tsv ...
//   fusekit decode --e2e a.json[,b.json] --lm lm.arpa --weights w.toml ...
//   fusekit score --manifest m.tsv --hyp hyp.trn
//   fusekit harness generate|train-lm|eval-fusion|make-demo ...
//   fusekit run config.toml
//
// Errors go to stderr as "error: code=NAME message=..." and the exit status
// is the numeric error code.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "fusekit/common/binary_io.h"
#include "fusekit/common/error.h"
#include "fusekit/common/parallel.h"
#include "fusekit/common/rng.h"
#include "fusekit/eval/manifest.h"
#include "fusekit/features/config.h"
#include "fusekit/features/io.h"
#include "fusekit/features/pipeline.h"
#include "fusekit/harness/fusion_eval.h"
#include "fusekit/harness/task.h"
#include "fusekit/harness/toy_lm.h"
#include "fusekit/pipeline/decode_job.h"
#include "fusekit/pipeline/demo.h"
#include "fusekit/pipeline/run.h"
#include "fusekit/scorers/ngram.h"
#include "fusekit/speaker/ivector.h"
#include "fusekit/speaker/ubm.h"
#include "fusekit/version.h"

namespace fs = std::filesystem;
using namespace fusekit;

namespace {

struct Globals {
  std::optional<uint64_t> seed;
  int threads = 1;
  std::string log_level = "info";
};

std::string OneLine(std::string s) {
  for (char &c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

int Report(Errc code, const std::string &message) {
  std::cerr << "error: code=" << ErrcName(code) << " message=" << OneLine(message) << "\n";
  return static_cast<int>(code);
}

std::vector<std::string> SplitCommas(const std::vector<std::string> &items) {
  std::vector<std::string> out;
  for (const auto &item : items) {
    size_t start = 0;
    while (start <= item.size()) {
      const size_t comma = item.find(',', start);
      const std::string part = item.substr(start, comma == std::string::npos
                                                       ? std::string::npos
                                                       : comma - start);
      if (!part.empty()) out.push_back(part);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  return out;
}

std::vector<FeatureMatrix> ReadManifestFeatures(const std::string &manifest_path,
                                                const Manifest &m, int threads) {
  std::vector<FeatureMatrix> feats(m.size());
  ParallelFor(m.size(), threads, [&](size_t i) {
    feats[i] =
        ReadFeatureFile(ResolvePath(manifest_path, m.records()[i].path)).features;
  });
  return feats;
}

void PrintJson(const nlohmann::json &j) { std::cout << j.dump(2) << "\n"; }

// ------------------------------------------------------------- features

void AddFeatures(CLI::App &app, Globals &g) {
  auto *features = app.add_subcommand("features", "Acoustic front-end");
  features->require_subcommand(1);
  auto *extract = features->add_subcommand("extract", "WAV -> FEAT1 feature file");
  static std::string config, wav, out;
  extract->add_option("--config", config, "feature config (TOML)")->required();
  extract->add_option("--wav", wav, "input WAV (PCM16 mono)")->required();
  extract->add_option("--out", out, "output feature file")->required();
  extract->callback([&g] {
    const FeaturePipelineConfig cfg = LoadFeaturePipelineConfig(config);
    const Waveform w = ReadWav(wav);
    // Same per-utterance stream as the run pipeline: keyed by file stem.
    const uint64_t seed = g.seed.value_or(cfg.perturb.seed);
    Rng rng(DeriveSeed(seed, fs::path(wav).stem().string()));
    const FeatureMatrix f = ExtractFeatures(w, cfg.features, cfg.perturb, rng);
    WriteFeatureFile(out, f);
    spdlog::info("{}: {} frames x {} channels", out, f.frames(), f.channels());
  });
}

// -------------------------------------------------------------- speaker

void AddSpeaker(CLI::App &app, Globals &g) {
  auto *speaker = app.add_subcommand("speaker", "UBM, T matrix and i-vectors");
  speaker->require_subcommand(1);

  static std::string manifest, ubm_path, tmat_path, out, out_dir;
  static int components = 64, iterations = 10, rank = 16;
  static size_t max_frames = 200000;

  auto *ubm = speaker->add_subcommand("train-ubm", "Train a diagonal GMM on pooled frames");
  ubm->add_option("--manifest", manifest, "manifest of feature files")->required();
  ubm->add_option("--out", out, "output UBM file")->required();
  ubm->add_option("--components", components, "mixture components");
  ubm->add_option("--iterations", iterations, "EM iterations");
  ubm->add_option("--max-frames", max_frames, "subsample pooled frames to this many");
  ubm->callback([&g] {
    const Manifest m = ReadManifest(manifest);
    const auto pooled = PoolFrames(ReadManifestFeatures(manifest, m, g.threads), max_frames);
    UbmTrainOptions o;
    o.num_components = components;
    o.iterations = iterations;
    o.seed = g.seed.value_or(0);
    const auto res = TrainUbm(pooled, o);
    WriteUbm(out, res.ubm);
    PrintJson({{"frames", pooled.rows()}, {"loglike", res.loglike}});
  });

  auto *tmat = speaker->add_subcommand("train-tmat", "Train the total-variability matrix");
  tmat->add_option("--manifest", manifest, "manifest of feature files")->required();
  tmat->add_option("--ubm", ubm_path, "UBM file")->required();
  tmat->add_option("--out", out, "output T-matrix file")->required();
  tmat->add_option("--rank", rank, "i-vector dimension");
  tmat->add_option("--iterations", iterations, "EM iterations");
  tmat->callback([&g] {
    const Manifest m = ReadManifest(manifest);
    const Ubm u = ReadUbm(ubm_path);
    const auto feats = ReadManifestFeatures(manifest, m, g.threads);
    std::vector<BwStats> stats(feats.size());
    ParallelFor(feats.size(), g.threads, [&](size_t i) {
      stats[i] = AccumulateStats(u, FeaturesToEigen(feats[i]));
    });
    TMatrixTrainOptions o;
    o.rank = rank;
    o.iterations = iterations;
    o.seed = g.seed.value_or(0);
    const auto res = TrainTMatrix(u, stats, o);
    WriteTMatrix(out, res.tmat);
    PrintJson({{"utterances", feats.size()}, {"objective", res.objective}});
  });

  auto *extract = speaker->add_subcommand(
      "extract", "Append IVEC1 i-vector blocks to the manifest's feature files");
  extract->add_option("--manifest", manifest, "manifest of feature files")->required();
  extract->add_option("--ubm", ubm_path, "UBM file")->required();
  extract->add_option("--tmat", tmat_path, "T-matrix file")->required();
  extract->add_option("--out-dir", out_dir,
                      "write <utt-id>.feat copies here instead of rewriting in place");
  extract->callback([&g] {
    const Manifest m = ReadManifest(manifest);
    const Ubm u = ReadUbm(ubm_path);
    const TMatrix t = ReadTMatrix(tmat_path);
    if (!out_dir.empty()) fs::create_directories(out_dir);
    ParallelFor(m.size(), g.threads, [&](size_t i) {
      const auto &r = m.records()[i];
      const std::string in = ResolvePath(manifest, r.path);
      const FeatureMatrix f = ReadFeatureFile(in).features;
      const Eigen::VectorXd w = ExtractIvector(t, u, AccumulateStats(u, FeaturesToEigen(f)));
      const std::vector<double> iv(w.data(), w.data() + w.size());
      const std::string dst =
          out_dir.empty() ? in : (fs::path(out_dir) / (r.utt_id + ".feat")).string();
      WriteFeatureFile(dst, f, &iv);
    });
    spdlog::info("i-vectors (dim {}) written for {} utterances", t.rank(), m.size());
  });
}

// --------------------------------------------------------------- decode

void AddDecode(CLI::App &app, Globals &g) {
  auto *decode = app.add_subcommand("decode", "Beam search with score fusion");
  static std::vector<std::string> e2e, lm, feats;
  static std::string internal_lm, weights, manifest, out, context = "hypothesis";
  static std::optional<size_t> beam, nbest;
  static size_t context_words = 150;
  decode->add_option("--e2e", e2e, "E2E table model(s), comma separated")->required();
  decode->add_option("--lm", lm, "external LM(s): ARPA or LM table JSON");
  decode->add_option("--internal-lm", internal_lm, "internal LM for probability-ratio fusion");
  decode->add_option("--weights", weights, "weights TOML");
  decode->add_option("--feat", feats, "feature file(s); utterance id = file stem");
  decode->add_option("--manifest", manifest, "manifest (enables cross-utterance context)");
  decode->add_option("--beam", beam, "beam size (overrides the weights file)");
  decode->add_option("--nbest", nbest, "n-best size (overrides the weights file)");
  decode->add_option("--context", context, "LM history: none|hypothesis|reference");
  decode->add_option("--context-words", context_words, "cross-utterance history limit");
  decode->add_option("--out", out, "hypothesis file (.trn); sidecar at <out>.json")->required();
  decode->callback([&g] {
    Check(feats.empty() != manifest.empty(), Errc::kInvalidArgument,
          "give exactly one of --feat or --manifest");
    DecodeSpec spec;
    spec.e2e = SplitCommas(e2e);
    spec.lm = SplitCommas(lm);
    spec.internal_lm = internal_lm;
    spec.weights = weights;
    spec.beam = beam;
    spec.nbest = nbest;
    const DecodeModels models = LoadDecodeModels(spec);
    std::vector<DecodeInput> inputs;
    if (!manifest.empty()) {
      inputs = DecodeInputsFromManifest(ReadManifest(manifest), manifest);
    } else {
      for (const auto &f : feats) {
        DecodeInput in;
        in.utt_id = fs::path(f).stem().string();
        in.feature_path = f;
        inputs.push_back(in);
      }
    }
    const auto outputs =
        DecodeAll(models, inputs, ParseContextMode(context), context_words, g.threads);
    if (auto parent = fs::path(out).parent_path(); !parent.empty())
      fs::create_directories(parent);
    WriteDecodeOutputs(out, models, outputs);
    spdlog::info("decoded {} utterances -> {}", outputs.size(), out);
  });
}

// ---------------------------------------------------------------- score

void AddScore(CLI::App &app, Globals &) {
  auto *score = app.add_subcommand("score", "Corpus WER against manifest transcripts");
  static std::string manifest, hyp, json_out;
  score->add_option("--manifest", manifest, "manifest with reference transcripts")->required();
  score->add_option("--hyp", hyp, "hypothesis file (.trn)")->required();
  score->add_option("--json", json_out, "also write per-utterance counts as JSON");
  score->callback([] {
    const ScoreReport rep = ScoreManifest(ReadManifest(manifest), ReadTrn(hyp));
    const WerReport &c = rep.corpus;
    std::printf("WER %.2f%% [ %zu / %zu, %zu ins, %zu del, %zu sub ] over %zu utterances\n",
                100.0 * c.wer(), c.errors(), c.ref_words, c.insertions, c.deletions,
                c.substitutions, rep.utterances.size());
    if (!json_out.empty()) {
      auto counts = [](const WerReport &r) {
        return nlohmann::json{{"substitutions", r.substitutions},
                              {"deletions", r.deletions},
                              {"insertions", r.insertions},
                              {"ref_words", r.ref_words}};
      };
      nlohmann::json per = nlohmann::json::object();
      for (const auto &[id, r] : rep.utterances) per[id] = counts(r);
      nlohmann::json j{{"corpus", counts(c)}, {"wer", c.wer()}, {"utterances", per}};
      binio::WriteStringToFile(json_out, j.dump(2) + "\n");
    }
  });
}

// -------------------------------------------------------------- harness

void AddHarness(CLI::App &app, Globals &g) {
  auto *harness = app.add_subcommand("harness", "Synthetic tasks and fusion experiments");
  harness->require_subcommand(1);

  static std::string task, out, out_dir, optimizer = "adamw", json_out;
  static size_t n = 100, epochs = 300, batch = 0, sentences = 20000;
  static bool target = false;
  static std::optional<size_t> test, dev;

  auto *gen = harness->add_subcommand(
      "generate", "Sample utterances: symbol feature files plus a manifest");
  gen->add_option("--task", task, "task TOML")->required();
  gen->add_option("-n,--utterances", n, "number of utterances");
  gen->add_option("--out-dir", out_dir, "output directory")->required();
  gen->add_flag("--target", target, "sample words from [target.lm] instead of [task.lm]");
  gen->callback([&g] {
    HmmTask t;
    if (target) {
      const FusionExperiment e = LoadFusionExperiment(task);
      t = e.task;
      t.lm = e.target_lm;
    } else {
      t = LoadHmmTask(task);
    }
    const auto corpus = Generate(t, g.seed.value_or(t.seed), n, {}, g.threads);
    fs::create_directories(fs::path(out_dir) / "feats");
    std::vector<ManifestRecord> recs;
    for (const auto &u : corpus) {
      const std::string rel = "feats/" + u.id + ".feat";
      WriteFeatureFile((fs::path(out_dir) / rel).string(), ToAcoustics(u).features);
      recs.push_back({u.id, rel, u.speaker, u.conversation, u.channel, u.order,
                      t.vocab.Decode(u.words)});
    }
    WriteManifest((fs::path(out_dir) / "manifest.tsv").string(), Manifest(recs));
    spdlog::info("{} utterances -> {}", corpus.size(), out_dir);
  });

  auto *train = harness->add_subcommand("train-lm", "Train a toy bigram LM, write ARPA");
  train->add_option("--task", task, "task TOML (sentences sampled from its LM)")->required();
  train->add_flag("--target", target, "sample from [target.lm] instead of [task.lm]");
  train->add_option("--sentences", sentences, "training sentences");
  train->add_option("--optimizer", optimizer, "sgd|adamw");
  train->add_option("--epochs", epochs, "epochs");
  train->add_option("--batch-size", batch, "sentences per step (0 = full batch)");
  train->add_option("--out", out, "output ARPA file")->required();
  train->callback([&g] {
    HmmTask t;
    BigramTable source;
    if (target) {
      const FusionExperiment e = LoadFusionExperiment(task);
      t = e.task;
      source = e.target_lm;
    } else {
      t = LoadHmmTask(task);
      source = t.lm;
    }
    const uint64_t seed = g.seed.value_or(t.seed);
    const auto sents = SampleSentences(t.vocab, source, seed, sentences);
    ToyLmOptions o;
    o.optimizer = ParseToyOptimizer(optimizer);
    o.epochs = epochs;
    o.batch_size = batch;
    o.seed = seed;
    const auto res = TrainToyLm(t.vocab, sents, o);
    std::vector<double> uni(t.vocab.size(), 0.0);
    double total = 0.0;
    for (const auto &s : sents) {
      for (TokenId w : s) uni[w] += 1.0;
      uni[t.vocab.eos()] += 1.0;
      total += s.size() + 1.0;
    }
    for (double &u : uni) u /= total;
    binio::WriteStringToFile(out, BigramToArpa(t.vocab, res.lm->Probs(), uni));
    PrintJson({{"sentences", sents.size()},
               {"cross_entropy", CrossEntropy(*res.lm, sents)},
               {"ml_cross_entropy", MaxLikelihoodCrossEntropy(t.vocab, sents)},
               {"epoch_loss", res.epoch_loss}});
  });

  auto *eval = harness->add_subcommand(
      "eval-fusion", "Compare no-LM, shallow and probability-ratio fusion");
  eval->add_option("--task", task, "fusion experiment TOML")->required();
  eval->add_option("--test", test, "override test utterances");
  eval->add_option("--dev", dev, "override dev utterances");
  eval->add_option("--json", json_out, "write results as JSON");
  eval->callback([&g] {
    FusionExperiment e = LoadFusionExperiment(task);
    if (g.seed) e.seed = *g.seed;
    if (test) e.test_utterances = *test;
    if (dev) e.dev_utterances = *dev;
    const FusionEvalResult r = EvalFusion(e, g.threads);
    std::cout << FormatFusionTable(r);
    if (!json_out.empty())
      binio::WriteStringToFile(json_out, FusionResultToJson(r).dump(2) + "\n");
  });

  static DemoOptions demo;
  auto *make = harness->add_subcommand("make-demo", "Write a runnable demo data set");
  make->add_option("--task", task, "fusion experiment TOML")->required();
  make->add_option("--out", out_dir, "output directory")->required();
  make->add_option("--utterances", demo.utterances, "utterances");
  make->add_option("--sample-rate", demo.sample_rate_hz, "8000 or 16000");
  make->add_option("--table-prefixes", demo.table_prefixes, "E2E table rows per utterance");
  make->callback([&g] {
    if (g.seed) demo.seed = *g.seed;
    MakeDemo(task, out_dir, demo);
    std::cout << "demo written to " << out_dir << "; run: fusekit run "
              << (fs::path(out_dir) / "run.toml").string() << "\n";
  });
}

// ------------------------------------------------------------------ run

void AddRun(CLI::App &app, Globals &g) {
  auto *run = app.add_subcommand("run", "Run a pipeline from a config file");
  static std::string config;
  run->add_option("config", config, "run config (TOML)")->required();
  run->callback([&g] {
    RunConfig cfg = LoadRunConfig(config);
    if (g.seed) cfg.seed = *g.seed;
    if (g.threads > 1) cfg.threads = g.threads;
    const nlohmann::json report = RunPipeline(cfg);
    for (const auto &st : report["stages"]) {
      if (st["name"] == "score") {
        const auto &c = st["results"]["corpus"];
        std::printf("WER %.2f%% (%d errors / %d words)\n",
                    100.0 * c["wer"].get<double>(),
                    c["substitutions"].get<int>() + c["deletions"].get<int>() +
                        c["insertions"].get<int>(),
                    c["ref_words"].get<int>());
      }
    }
    std::cout << "report: " << (fs::path(cfg.output_dir) / "report.json").string() << "\n";
  });
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"fusekit: LM fusion for end-to-end ASR, with a synthetic test bed"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "seed (overrides config defaults)");
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--log-level", g.log_level, "trace|debug|info|warn|error|off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));
  app.parse_complete_callback([&g] {
    auto logger = spdlog::stderr_color_mt("fusekit");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::from_str(g.log_level));
  });

  AddFeatures(app, g);
  AddSpeaker(app, g);
  AddDecode(app, g);
  AddScore(app, g);
  AddHarness(app, g);
  AddRun(app, g);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    return Report(Errc::kInvalidArgument, e.what());
  } catch (const Error &e) {
    return Report(e.code(), e.what());
  } catch (const std::exception &e) {
    return Report(Errc::kPipeline, e.what());
  }
  return 0;
}

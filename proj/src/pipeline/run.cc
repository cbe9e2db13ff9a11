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

#include "fusekit/pipeline/run.h"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <functional>
#include <set>

#include <Eigen/Core>
#include <spdlog/spdlog.h>

#include "fusekit/common/binary_io.h"
#include "fusekit/common/error.h"
#include "fusekit/common/parallel.h"
#include "fusekit/common/rng.h"
#include "fusekit/common/toml_util.h"
#include "fusekit/features/config.h"
#include "fusekit/features/io.h"
#include "fusekit/features/pipeline.h"
#include "fusekit/harness/fusion_eval.h"
#include "fusekit/version.h"

namespace fusekit {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kStageOrder{"features", "speaker", "decode",
                                           "score", "harness"};

std::string Resolve(const std::string &base, const std::string &p) {
  if (p.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base).parent_path() / p).lexically_normal().string();
}

std::string ReadText(const std::string &path) {
  return path.empty() ? "" : binio::ReadFileToString(path);
}

nlohmann::json WerJson(const WerReport &r) {
  return {{"substitutions", r.substitutions}, {"deletions", r.deletions},
          {"insertions", r.insertions},       {"ref_words", r.ref_words},
          {"wer", r.ref_words ? nlohmann::json(r.wer()) : nlohmann::json(nullptr)}};
}

// Mutable state handed from stage to stage.
struct RunState {
  Manifest manifest;
  std::vector<std::string> feature_paths;  // per manifest record
  std::string hypotheses;
};

}  // namespace

Eigen::MatrixXd FeaturesToEigen(const FeatureMatrix &f) {
  Eigen::MatrixXd m(f.frames(), f.channels());
  for (size_t t = 0; t < f.frames(); ++t)
    for (size_t c = 0; c < f.channels(); ++c) m(t, c) = f(t, c);
  return m;
}

Eigen::MatrixXd PoolFrames(const std::vector<FeatureMatrix> &feats, size_t max_frames) {
  Check(!feats.empty(), Errc::kInvalidArgument, "no feature files to pool");
  const size_t dim = feats[0].channels();
  // Every k-th frame, k chosen to stay under the cap.
  size_t total = 0;
  for (const auto &f : feats) {
    Check(f.channels() == dim, Errc::kInvalidArgument,
          "feature dimension differs across utterances");
    total += f.frames();
  }
  const size_t cap = std::max<size_t>(1, max_frames);
  const size_t stride = std::max<size_t>(1, (total + cap - 1) / cap);
  std::vector<const double *> rows;
  size_t k = 0;
  for (const auto &f : feats)
    for (size_t t = 0; t < f.frames(); ++t, ++k)
      if (k % stride == 0) rows.push_back(f.row(t).data());
  Eigen::MatrixXd pooled(rows.size(), dim);
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < dim; ++c) pooled(r, c) = rows[r][c];
  return pooled;
}

bool RunConfig::HasStage(const std::string &stage) const {
  return std::find(stages.begin(), stages.end(), stage) != stages.end();
}

RunConfig ParseRunConfig(const std::string &toml_text,
                         const std::string &config_path) {
  using tomlu::Read;
  using tomlu::ReadArray;
  const toml::table root = tomlu::Parse(toml_text, "run config");
  RunConfig c;
  c.config_path = config_path;
  c.config_text = toml_text;
  const auto path = [&](std::string p) { return Resolve(config_path, p); };

  const auto *run = root["run"].as_table();
  Check(run != nullptr, Errc::kParse, "run config: missing [run] table");
  Read(*run, "name", c.name);
  Read(*run, "output_dir", c.output_dir);
  Read(*run, "manifest", c.manifest);
  Read(*run, "seed", c.seed);
  Read(*run, "threads", c.threads);
  ReadArray(*run, "stages", c.stages);
  Check(!c.output_dir.empty(), Errc::kParse, "run config: output_dir is required");
  Check(c.threads >= 1, Errc::kParse, "run config: threads must be >= 1");
  c.output_dir = path(c.output_dir);
  c.manifest = path(c.manifest);

  std::set<std::string> seen;
  for (const auto &s : c.stages) {
    Check(std::find(kStageOrder.begin(), kStageOrder.end(), s) != kStageOrder.end(),
          Errc::kParse, "run config: unknown stage '" + s + "'");
    Check(seen.insert(s).second, Errc::kParse, "run config: stage listed twice: " + s);
  }
  Check(!c.stages.empty(), Errc::kParse, "run config: no stages");
  // Stages always run in pipeline order.
  std::vector<std::string> ordered;
  for (const auto &s : kStageOrder)
    if (seen.count(s)) ordered.push_back(s);
  c.stages = ordered;

  if (const auto *f = root["features"].as_table()) {
    Read(*f, "config", c.feature_config);
    c.feature_config = path(c.feature_config);
  }
  if (const auto *s = root["speaker"].as_table()) {
    Read(*s, "ubm", c.ubm_model);
    Read(*s, "tmat", c.tmat_model);
    Read(*s, "components", c.ubm.num_components);
    Read(*s, "ubm_iterations", c.ubm.iterations);
    Read(*s, "max_ubm_frames", c.max_ubm_frames);
    Read(*s, "rank", c.tmat.rank);
    Read(*s, "tmat_iterations", c.tmat.iterations);
    c.ubm_model = path(c.ubm_model);
    c.tmat_model = path(c.tmat_model);
  }
  if (const auto *d = root["decode"].as_table()) {
    ReadArray(*d, "e2e", c.decode.e2e);
    ReadArray(*d, "lm", c.decode.lm);
    Read(*d, "internal_lm", c.decode.internal_lm);
    Read(*d, "weights", c.decode.weights);
    std::string mode = ContextModeName(c.decode.context);
    Read(*d, "context", mode);
    c.decode.context = ParseContextMode(mode);
    Read(*d, "context_words", c.decode.context_words);
    size_t v = 0;
    if (d->get("beam")) Read(*d, "beam", v), c.decode.beam = v;
    if (d->get("nbest")) Read(*d, "nbest", v), c.decode.nbest = v;
    for (auto &p : c.decode.e2e) p = path(p);
    for (auto &p : c.decode.lm) p = path(p);
    c.decode.internal_lm = path(c.decode.internal_lm);
    c.decode.weights = path(c.decode.weights);
  }
  if (const auto *h = root["harness"].as_table()) {
    Read(*h, "task", c.harness_task);
    c.harness_task = path(c.harness_task);
    size_t v = 0;
    if (h->get("test_utterances")) Read(*h, "test_utterances", v), c.harness_test = v;
    if (h->get("dev_utterances")) Read(*h, "dev_utterances", v), c.harness_dev = v;
    if (h->get("lm_text_sentences"))
      Read(*h, "lm_text_sentences", v), c.harness_lm_text = v;
  }
  return c;
}

RunConfig LoadRunConfig(const std::string &path) {
  try {
    return ParseRunConfig(binio::ReadFileToString(path), path);
  } catch (const Error &e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

std::string RunFeaturePath(const RunConfig &cfg, const std::string &utt_id) {
  return (fs::path(cfg.output_dir) / "features" / (utt_id + ".feat")).string();
}

std::string RunHypothesisPath(const RunConfig &cfg) {
  return (fs::path(cfg.output_dir) / "decode" / "hyp.trn").string();
}

void ValidateRunInputs(const RunConfig &cfg) {
  std::vector<std::string> missing;
  auto need = [&](const std::string &p, const std::string &what) {
    if (p.empty()) Fail(Errc::kInvalidArgument, "run config: " + what + " is not set");
    if (!fs::is_regular_file(p)) missing.push_back(p + " (" + what + ")");
  };
  const bool data = cfg.HasStage("features") || cfg.HasStage("speaker") ||
                    cfg.HasStage("decode") || cfg.HasStage("score");
  if (data) need(cfg.manifest, "manifest");

  if (cfg.HasStage("features")) need(cfg.feature_config, "features.config");
  if (cfg.HasStage("speaker")) {
    Check(cfg.tmat_model.empty() || !cfg.ubm_model.empty(), Errc::kInvalidArgument,
          "run config: speaker.tmat requires speaker.ubm");
    if (!cfg.ubm_model.empty()) need(cfg.ubm_model, "speaker.ubm");
    if (!cfg.tmat_model.empty()) need(cfg.tmat_model, "speaker.tmat");
  }
  if (cfg.HasStage("decode")) {
    Check(!cfg.decode.e2e.empty(), Errc::kInvalidArgument,
          "run config: decode.e2e is empty");
    for (const auto &p : cfg.decode.e2e) need(p, "decode.e2e");
    for (const auto &p : cfg.decode.lm) need(p, "decode.lm");
    if (!cfg.decode.internal_lm.empty()) need(cfg.decode.internal_lm, "decode.internal_lm");
    if (!cfg.decode.weights.empty()) need(cfg.decode.weights, "decode.weights");
  }
  if (cfg.HasStage("score") && !cfg.HasStage("decode") &&
      !fs::is_regular_file(RunHypothesisPath(cfg)))
    missing.push_back(RunHypothesisPath(cfg) + " (score without decode)");
  if (cfg.HasStage("harness")) need(cfg.harness_task, "harness.task");

  // Per-utterance inputs: WAVs for the front-end, else feature files.
  if (data && fs::is_regular_file(cfg.manifest)) {
    const Manifest m = ReadManifest(cfg.manifest);
    const bool reads_manifest_paths =
        cfg.HasStage("features") || cfg.HasStage("speaker") || cfg.HasStage("decode");
    for (const auto &r : m.records()) {
      Check(r.utt_id.find('/') == std::string::npos, Errc::kInvalidArgument,
            "utterance id may not contain '/': " + r.utt_id);
      if (reads_manifest_paths) {
        const std::string p = ResolvePath(cfg.manifest, r.path);
        if (!fs::is_regular_file(p)) missing.push_back(p + " (manifest " + r.utt_id + ")");
      }
    }
  }

  if (!missing.empty()) {
    std::string msg = "missing input files: ";
    for (size_t i = 0; i < missing.size(); ++i) msg += (i ? "; " : "") + missing[i];
    Fail(Errc::kIo, msg);
  }

  // Parse what can be parsed so config errors also surface up front.
  if (cfg.HasStage("features")) LoadFeaturePipelineConfig(cfg.feature_config);
  if (cfg.HasStage("decode")) LoadDecodeModels(cfg.decode);
  if (cfg.HasStage("harness")) LoadFusionExperiment(cfg.harness_task);
}

namespace {

nlohmann::json RunFeatures(const RunConfig &cfg, RunState &st, uint64_t seed) {
  const FeaturePipelineConfig fpc = LoadFeaturePipelineConfig(cfg.feature_config);
  const auto &recs = st.manifest.records();
  fs::create_directories(fs::path(cfg.output_dir) / "features");
  std::vector<size_t> frames(recs.size());
  ParallelFor(recs.size(), cfg.threads, [&](size_t i) {
    const Waveform wav = ReadWav(ResolvePath(cfg.manifest, recs[i].path));
    Rng rng(DeriveSeed(seed, recs[i].utt_id));
    FeatureMatrix f;
    try {
      f = ExtractFeatures(wav, fpc.features, fpc.perturb, rng);
    } catch (const Error &e) {
      throw Error(e.code(), recs[i].utt_id + ": " + e.what());
    }
    frames[i] = f.frames();
    WriteFeatureFile(RunFeaturePath(cfg, recs[i].utt_id), f);
  });
  for (size_t i = 0; i < recs.size(); ++i)
    st.feature_paths[i] = RunFeaturePath(cfg, recs[i].utt_id);
  size_t total = 0;
  for (size_t n : frames) total += n;
  return {{"utterances", recs.size()},
          {"frames", total},
          {"output", (fs::path(cfg.output_dir) / "features").string()}};
}

nlohmann::json RunSpeaker(const RunConfig &cfg, RunState &st, uint64_t ubm_seed,
                          uint64_t tmat_seed) {
  const auto &recs = st.manifest.records();
  std::vector<FeatureMatrix> feats(recs.size());
  ParallelFor(recs.size(), cfg.threads, [&](size_t i) {
    feats[i] = ReadFeatureFile(st.feature_paths[i]).features;
  });
  Check(!recs.empty(), Errc::kInvalidArgument, "empty manifest");
  const size_t dim = feats[0].channels();
  for (size_t i = 0; i < recs.size(); ++i)
    Check(feats[i].channels() == dim, Errc::kInvalidArgument,
          recs[i].utt_id + ": feature dimension differs across utterances");

  nlohmann::json out;
  const fs::path models = fs::path(cfg.output_dir) / "models";
  fs::create_directories(models);
  Ubm ubm;
  if (!cfg.ubm_model.empty()) {
    ubm = ReadUbm(cfg.ubm_model);
    out["ubm"] = {{"source", cfg.ubm_model}};
  } else {
    const Eigen::MatrixXd pooled = PoolFrames(feats, cfg.max_ubm_frames);
    UbmTrainOptions o = cfg.ubm;
    o.seed = ubm_seed;
    auto res = TrainUbm(pooled, o);
    ubm = std::move(res.ubm);
    WriteUbm((models / "ubm.bin").string(), ubm);
    out["ubm"] = {{"source", "trained"},
                  {"frames", pooled.rows()},
                  {"components", o.num_components},
                  {"loglike", res.loglike},
                  {"output", (models / "ubm.bin").string()}};
  }
  Check(ubm.dim() == static_cast<int>(dim), Errc::kInvalidArgument,
        "UBM dimension does not match the features");

  std::vector<BwStats> stats(recs.size());
  ParallelFor(recs.size(), cfg.threads,
              [&](size_t i) { stats[i] = AccumulateStats(ubm, FeaturesToEigen(feats[i])); });

  TMatrix tmat;
  if (!cfg.tmat_model.empty()) {
    tmat = ReadTMatrix(cfg.tmat_model);
    out["tmat"] = {{"source", cfg.tmat_model}};
  } else {
    TMatrixTrainOptions o = cfg.tmat;
    o.seed = tmat_seed;
    auto res = TrainTMatrix(ubm, stats, o);
    tmat = std::move(res.tmat);
    WriteTMatrix((models / "tmat.bin").string(), tmat);
    out["tmat"] = {{"source", "trained"},
                   {"rank", o.rank},
                   {"objective", res.objective},
                   {"output", (models / "tmat.bin").string()}};
  }
  Check(tmat.t.rows() == static_cast<Eigen::Index>(ubm.num_components() * dim),
        Errc::kInvalidArgument, "T matrix does not match the UBM");

  fs::create_directories(fs::path(cfg.output_dir) / "features");
  ParallelFor(recs.size(), cfg.threads, [&](size_t i) {
    const Eigen::VectorXd w = ExtractIvector(tmat, ubm, stats[i]);
    const std::vector<double> iv(w.data(), w.data() + w.size());
    WriteFeatureFile(RunFeaturePath(cfg, recs[i].utt_id), feats[i], &iv);
  });
  for (size_t i = 0; i < recs.size(); ++i)
    st.feature_paths[i] = RunFeaturePath(cfg, recs[i].utt_id);
  out["ivector_dim"] = tmat.rank();
  out["utterances"] = recs.size();
  return out;
}

nlohmann::json RunDecode(const RunConfig &cfg, RunState &st) {
  const DecodeModels models = LoadDecodeModels(cfg.decode);
  auto inputs = DecodeInputsFromManifest(st.manifest, cfg.manifest);
  for (size_t i = 0; i < inputs.size(); ++i) inputs[i].feature_path = st.feature_paths[i];
  const auto outputs = DecodeAll(models, inputs, cfg.decode.context,
                                 cfg.decode.context_words, cfg.threads);
  st.hypotheses = RunHypothesisPath(cfg);
  fs::create_directories(fs::path(st.hypotheses).parent_path());
  WriteDecodeOutputs(st.hypotheses, models, outputs);
  size_t unterminated = 0;
  for (const auto &o : outputs) unterminated += o.nbest.unterminated;
  return {{"utterances", outputs.size()},
          {"unterminated", unterminated},
          {"context", ContextModeName(cfg.decode.context)},
          {"context_words", cfg.decode.context_words},
          {"weights", models.weights_json},
          {"output", st.hypotheses}};
}

nlohmann::json RunScore(const RunConfig &cfg, RunState &st) {
  if (st.hypotheses.empty()) st.hypotheses = RunHypothesisPath(cfg);
  const ScoreReport rep = ScoreManifest(st.manifest, ReadTrn(st.hypotheses));
  nlohmann::json per = nlohmann::json::object();
  for (const auto &[id, r] : rep.utterances) per[id] = WerJson(r);
  const fs::path out = fs::path(cfg.output_dir) / "score" / "wer.json";
  fs::create_directories(out.parent_path());
  binio::WriteStringToFile(
      out.string(),
      nlohmann::json{{"corpus", WerJson(rep.corpus)}, {"utterances", per}}.dump(2) + "\n");
  return {{"corpus", WerJson(rep.corpus)}, {"output", out.string()}};
}

nlohmann::json RunHarness(const RunConfig &cfg) {
  FusionExperiment exp = LoadFusionExperiment(cfg.harness_task);
  if (cfg.harness_test) exp.test_utterances = *cfg.harness_test;
  if (cfg.harness_dev) exp.dev_utterances = *cfg.harness_dev;
  if (cfg.harness_lm_text) exp.lm_text_sentences = *cfg.harness_lm_text;
  const FusionEvalResult r = EvalFusion(exp, cfg.threads);
  const fs::path dir = fs::path(cfg.output_dir) / "harness";
  fs::create_directories(dir);
  const std::string table = FormatFusionTable(r);
  binio::WriteStringToFile((dir / "fusion_table.txt").string(), table);
  nlohmann::json j = FusionResultToJson(r);
  binio::WriteStringToFile((dir / "fusion.json").string(), j.dump(2) + "\n");
  spdlog::info("fusion comparison:\n{}", table);
  j["seed"] = exp.seed;
  j["output"] = (dir / "fusion_table.txt").string();
  return j;
}

}  // namespace

nlohmann::json RunPipeline(const RunConfig &cfg) {
  ValidateRunInputs(cfg);

  const uint64_t feat_seed = DeriveSeed(cfg.seed, std::string_view("features"));
  const uint64_t ubm_seed = DeriveSeed(cfg.seed, std::string_view("ubm"));
  const uint64_t tmat_seed = DeriveSeed(cfg.seed, std::string_view("tmat"));

  nlohmann::json report;
  report["name"] = cfg.name;
  report["versions"] = {
      {"fusekit", kVersion},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                    std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)},
      {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                            std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                            std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
      {"tomlplusplus", std::to_string(TOML_LIB_MAJOR) + "." +
                           std::to_string(TOML_LIB_MINOR) + "." +
                           std::to_string(TOML_LIB_PATCH)},
  };
  nlohmann::json configs = {{"run", {{"path", cfg.config_path}, {"text", cfg.config_text}}}};
  if (cfg.HasStage("features"))
    configs["features"] = {{"path", cfg.feature_config}, {"text", ReadText(cfg.feature_config)}};
  if (cfg.HasStage("decode") && !cfg.decode.weights.empty())
    configs["weights"] = {{"path", cfg.decode.weights}, {"text", ReadText(cfg.decode.weights)}};
  if (cfg.HasStage("harness"))
    configs["harness_task"] = {{"path", cfg.harness_task}, {"text", ReadText(cfg.harness_task)}};
  report["configs"] = configs;
  report["seeds"] = {{"run", cfg.seed},
                     {"features", feat_seed},
                     {"ubm", ubm_seed},
                     {"tmat", tmat_seed}};
  report["threads"] = cfg.threads;
  report["stages"] = nlohmann::json::array();

  fs::create_directories(cfg.output_dir);
  const std::string report_path = (fs::path(cfg.output_dir) / "report.json").string();
  auto write_report = [&] {
    binio::WriteStringToFile(report_path, report.dump(2) + "\n");
  };

  RunState st;
  const bool data = cfg.HasStage("features") || cfg.HasStage("speaker") ||
                    cfg.HasStage("decode") || cfg.HasStage("score");
  if (data) {
    st.manifest = ReadManifest(cfg.manifest);
    for (const auto &r : st.manifest.records())
      st.feature_paths.push_back(ResolvePath(cfg.manifest, r.path));
  }

  const std::map<std::string, std::function<nlohmann::json()>> stages{
      {"features", [&] { return RunFeatures(cfg, st, feat_seed); }},
      {"speaker", [&] { return RunSpeaker(cfg, st, ubm_seed, tmat_seed); }},
      {"decode", [&] { return RunDecode(cfg, st); }},
      {"score", [&] { return RunScore(cfg, st); }},
      {"harness", [&] { return RunHarness(cfg); }},
  };
  for (const auto &name : cfg.stages) {
    spdlog::info("stage {}: start", name);
    const auto t0 = std::chrono::steady_clock::now();
    nlohmann::json entry = {{"name", name}};
    try {
      entry["results"] = stages.at(name)();
    } catch (const std::exception &e) {
      const Errc code = [&] {
        if (const auto *fe = dynamic_cast<const Error *>(&e)) return fe->code();
        return Errc::kPipeline;
      }();
      entry["status"] = "failed";
      entry["error"] = {{"code", std::string(ErrcName(code))}, {"message", e.what()}};
      report["stages"].push_back(entry);
      write_report();
      throw Error(code, "stage " + name + ": " + e.what());
    }
    entry["status"] = "ok";
    entry["seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report["stages"].push_back(entry);
    spdlog::info("stage {}: done", name);
  }
  write_report();
  return report;
}

}  // namespace fusekit

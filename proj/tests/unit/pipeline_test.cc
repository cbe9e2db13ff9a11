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

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "fusekit/common/binary_io.h"
#include "fusekit/common/error.h"
#include "fusekit/eval/manifest.h"
#include "fusekit/pipeline/demo.h"
#include "fusekit/pipeline/run.h"
#include "test_util.h"

using namespace fusekit;
namespace fs = std::filesystem;

namespace {

const std::string kTask = std::string(FUSEKIT_SOURCE_DIR) + "/configs/fusion_task.toml";

// A small demo with perturbation switched on, so the seeded paths are used.
fs::path SmallDemo(const std::string &name) {
  const fs::path dir = testing::TempDir(name);
  DemoOptions o;
  o.utterances = 8;
  o.table_prefixes = 60;
  o.lm_sentences = 500;
  MakeDemo(kTask, dir.string(), o);
  std::ofstream(dir / "features.toml", std::ios::app) << "\n[perturb]\nseed = 5\n";
  return dir;
}

RunConfig DemoRun(const fs::path &dir, const std::string &out, int threads,
                  const std::string &stages =
                      R"(["features", "speaker", "decode", "score"])") {
  std::string text = binio::ReadFileToString((dir / "run.toml").string());
  auto replace = [&](const std::string &from, const std::string &to) {
    const auto pos = text.find(from);
    REQUIRE(pos != std::string::npos);
    text.replace(pos, from.size(), to);
  };
  replace("output_dir = \"out\"", "output_dir = \"" + out + "\"");
  replace("threads = 1", "threads = " + std::to_string(threads));
  replace(R"(["features", "speaker", "decode", "score", "harness"])", stages);
  return ParseRunConfig(text, (dir / "run.toml").string());
}

std::string Bytes(const fs::path &p) { return binio::ReadFileToString(p.string()); }

}  // namespace

TEST_CASE("run config parsing") {
  const std::string text = R"(
[run]
output_dir = "o"
manifest = "m.tsv"
stages = ["score", "features"]
[features]
config = "sub/f.toml"
)";
  const RunConfig c = ParseRunConfig(text, "/data/exp/run.toml");
  CHECK(c.stages == std::vector<std::string>{"features", "score"});
  CHECK(c.output_dir == "/data/exp/o");
  CHECK(c.manifest == "/data/exp/m.tsv");
  CHECK(c.feature_config == "/data/exp/sub/f.toml");
  CHECK(c.decode.context == ContextMode::kHypothesis);
  CHECK(c.decode.context_words == 150);
  CHECK(RunFeaturePath(c, "u1") == "/data/exp/o/features/u1.feat");

  auto parse_error = [](const std::string &t) {
    try {
      ParseRunConfig(t, "run.toml");
    } catch (const Error &e) {
      return e.code() == Errc::kParse;
    }
    return false;
  };
  CHECK(parse_error("[run]\noutput_dir = \"o\"\nstages = [\"decoding\"]\n"));
  CHECK(parse_error("[run]\noutput_dir = \"o\"\nstages = [\"score\", \"score\"]\n"));
  CHECK(parse_error("[run]\noutput_dir = \"o\"\nstages = []\n"));
  CHECK(parse_error("[other]\n"));
  CHECK(parse_error("[run]\noutput_dir = \"o\"\nthreads = 0\nstages = [\"score\"]\n"));
  CHECK(ParseContextMode("reference") == ContextMode::kReference);
  CHECK_THROWS_AS(ParseContextMode("oracle"), Error);
}

TEST_CASE("frame pooling") {
  std::vector<FeatureMatrix> feats;
  for (size_t n : {3, 5, 2}) {
    FeatureMatrix f(n, 2, 10.0, FeatureKind::kCompressed);
    for (size_t t = 0; t < n; ++t) f(t, 0) = static_cast<double>(feats.size() * 10 + t);
    feats.push_back(f);
  }
  CHECK(PoolFrames(feats, 100).rows() == 10);
  const auto m = PoolFrames(feats, 4);
  CHECK(m.rows() <= 4);
  CHECK(m.rows() >= 3);
  CHECK(m(0, 0) == 0.0);
  feats.push_back(FeatureMatrix(1, 3, 10.0, FeatureKind::kCompressed));
  CHECK_THROWS_AS(PoolFrames(feats, 100), Error);
}

TEST_CASE("pipeline reruns are byte identical") {
  const fs::path dir = SmallDemo("pipeline_rerun");
  const auto a = RunPipeline(DemoRun(dir, "a", 1));
  RunPipeline(DemoRun(dir, "b", 1));
  RunPipeline(DemoRun(dir, "c", 4));

  const Manifest m = ReadManifest((dir / "manifest.tsv").string());
  REQUIRE(m.size() == 8);
  for (const auto &r : m.records()) {
    const std::string rel = "features/" + r.utt_id + ".feat";
    const std::string fa = Bytes(dir / "a" / rel);
    CHECK(!fa.empty());
    CHECK(fa == Bytes(dir / "b" / rel));
    CHECK(fa == Bytes(dir / "c" / rel));
  }
  for (const char *rel : {"decode/hyp.trn", "decode/hyp.trn.json", "score/wer.json",
                          "models/ubm.bin", "models/tmat.bin"}) {
    CAPTURE(rel);
    CHECK(Bytes(dir / "a" / rel) == Bytes(dir / "b" / rel));
    CHECK(Bytes(dir / "a" / rel) == Bytes(dir / "c" / rel));
  }

  REQUIRE(a["stages"].size() == 4);
  for (const auto &s : a["stages"]) CHECK(s["status"] == "ok");
  CHECK(a["seeds"]["run"] == 1);
  CHECK(a["configs"]["features"]["text"].get<std::string>().find("[perturb]") !=
        std::string::npos);
  CHECK(fs::is_regular_file(dir / "a" / "report.json"));

  // Later utterances of a conversation side see earlier hypotheses.
  const auto side = nlohmann::json::parse(Bytes(dir / "a" / "decode/hyp.trn.json"));
  size_t with_context = 0;
  for (const auto &u : side["utterances"]) with_context += u["context_words"] > 0;
  CHECK(with_context > 0);
}

TEST_CASE("missing inputs are reported together before any stage runs") {
  const fs::path dir = SmallDemo("pipeline_missing");
  const Manifest m = ReadManifest((dir / "manifest.tsv").string());
  fs::remove(dir / m.records()[1].path);
  fs::remove(dir / m.records()[4].path);
  fs::remove(dir / "lm.arpa");
  try {
    RunPipeline(DemoRun(dir, "out", 1));
    FAIL("expected throw");
  } catch (const Error &e) {
    CHECK(e.code() == Errc::kIo);
    const std::string msg = e.what();
    CHECK(msg.find("missing input files") != std::string::npos);
    CHECK(msg.find(m.records()[1].utt_id) != std::string::npos);
    CHECK(msg.find(m.records()[4].utt_id) != std::string::npos);
    CHECK(msg.find("lm.arpa") != std::string::npos);
  }
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("a failing stage is named and reported") {
  const fs::path dir = SmallDemo("pipeline_fail");
  // Decoding straight from WAV paths: the decode stage cannot read them.
  const RunConfig cfg = DemoRun(dir, "out", 1, R"(["decode"])");
  try {
    RunPipeline(cfg);
    FAIL("expected throw");
  } catch (const Error &e) {
    CHECK(std::string(e.what()).rfind("stage decode: ", 0) == 0);
  }
  const auto report = nlohmann::json::parse(Bytes(dir / "out" / "report.json"));
  REQUIRE(report["stages"].size() == 1);
  CHECK(report["stages"][0]["status"] == "failed");
  CHECK(report["stages"][0]["error"].contains("code"));
}

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

#include "fusekit/fusion/fusion.h"

#include "fusekit/common/binary_io.h"
#include "fusekit/common/error.h"
#include "fusekit/common/toml_util.h"

namespace fusekit {

FusionWeights FusionConfig::Resolve(size_t num_lm, size_t num_e2e) const {
  FusionWeights w = weights;
  auto fill = [](std::vector<double> &v, size_t n, double value) {
    if (v.empty()) v.assign(n, value);
  };
  fill(w.lm, num_lm, 0.0);
  fill(w.e2e, num_e2e, 1.0);
  fill(w.coverage, num_e2e, 0.0);
  fill(w.tau, num_e2e, 0.5);
  w.Validate(num_lm, num_e2e);
  return w;
}

FusionConfig ParseFusionConfig(const std::string &toml_text) {
  const toml::table root = tomlu::Parse(toml_text, "weights config");
  FusionConfig c;
  if (const auto *w = root["weights"].as_table()) {
    tomlu::ReadArray(*w, "lm", c.weights.lm);
    tomlu::ReadArray(*w, "e2e", c.weights.e2e);
    tomlu::ReadArray(*w, "coverage", c.weights.coverage);
    tomlu::ReadArray(*w, "tau", c.weights.tau);
    tomlu::ReadArray(*w, "lm_beta", c.weights.lm_beta);
    tomlu::ReadArray(*w, "e2e_beta", c.weights.e2e_beta);
    tomlu::Read(*w, "length", c.weights.length);
    if (w->get("internal_lm")) {
      double v = 0.0;
      tomlu::Read(*w, "internal_lm", v);
      Check(v >= 0.0, Errc::kParse,
            "internal_lm is a magnitude; it is applied with a negative sign");
      c.internal_lm = v;
    }
    tomlu::Read(*w, "internal_lm_beta", c.internal_lm_beta);
  }
  if (const auto *d = root["decode"].as_table()) {
    tomlu::Read(*d, "beam", c.decode.beam);
    tomlu::Read(*d, "max_len", c.decode.max_len);
    tomlu::Read(*d, "nbest", c.decode.nbest);
    tomlu::Read(*d, "incremental_coverage", c.decode.incremental_coverage);
    tomlu::Read(*d, "early_stop", c.decode.early_stop);
  }
  c.decode.Validate();
  return c;
}

FusionConfig LoadFusionConfig(const std::string &path) {
  try {
    return ParseFusionConfig(binio::ReadFileToString(path));
  } catch (const Error &e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

}  // namespace fusekit

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

#include "fusekit/harness/adamw.h"

#include <cmath>

#include "fusekit/common/error.h"

namespace fusekit {

void AdamWOptions::Validate() const {
  Check(lr > 0.0 && std::isfinite(lr), Errc::kInvalidArgument, "lr must be > 0");
  Check(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0,
        Errc::kInvalidArgument, "betas must lie in [0, 1)");
  Check(eps > 0.0, Errc::kInvalidArgument, "eps must be > 0");
  Check(weight_decay >= 0.0, Errc::kInvalidArgument, "weight_decay must be >= 0");
}

void AdamWStep(std::span<double> params, std::span<const double> grads,
               AdamWState &state) {
  Check(params.size() == grads.size() && params.size() == state.m.size() &&
            params.size() == state.v.size(),
        Errc::kInvalidArgument, "AdamW: parameter, gradient and state sizes differ");
  for (double g : grads)
    Check(std::isfinite(g), Errc::kNumeric, "AdamW: non-finite gradient");
  const AdamWOptions &o = state.options;
  ++state.step;
  const double bc1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.step));
  const double decay = 1.0 - o.lr * o.weight_decay;
  for (size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = o.beta1 * state.m[i] + (1.0 - o.beta1) * g;
    state.v[i] = o.beta2 * state.v[i] + (1.0 - o.beta2) * g * g;
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] *= decay;
    params[i] -= o.lr * mhat / (std::sqrt(vhat) + o.eps);
  }
}

}  // namespace fusekit

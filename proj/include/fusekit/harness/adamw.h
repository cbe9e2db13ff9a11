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

// harness/adamw.h
// Adam with decoupled weight decay: the decay multiplies the parameters
// directly and never enters the moment estimates.

#ifndef FUSEKIT_HARNESS_ADAMW_H_
#define FUSEKIT_HARNESS_ADAMW_H_

#include <cstdint>
#include <span>
#include <vector>

namespace fusekit {

struct AdamWOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-2;

  void Validate() const;
};

struct AdamWState {
  AdamWOptions options;
  int64_t step = 0;
  std::vector<double> m;  // first moment
  std::vector<double> v;  // second moment

  AdamWState() = default;
  AdamWState(AdamWOptions opts, size_t num_params)
      : options(opts), m(num_params, 0.0), v(num_params, 0.0) {}
};

/// One update, in place:
///   m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2
///   theta <- theta (1 - lr wd) - lr mhat / (sqrt(vhat) + eps)
/// with bias-corrected mhat, vhat. Non-finite gradients throw kNumeric and
/// leave everything untouched.
void AdamWStep(std::span<double> params, std::span<const double> grads,
               AdamWState &state);

}  // namespace fusekit

#endif  // FUSEKIT_HARNESS_ADAMW_H_

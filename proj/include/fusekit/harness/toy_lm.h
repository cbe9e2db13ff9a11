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

// harness/toy_lm.h
// Bigram logit table trained by cross-entropy gradient descent.

#ifndef FUSEKIT_HARNESS_TOY_LM_H_
#define FUSEKIT_HARNESS_TOY_LM_H_

#include <memory>
#include <string>
#include <vector>

#include "fusekit/harness/adamw.h"
#include "fusekit/harness/exact_scorers.h"

namespace fusekit {

enum class ToyOptimizer { kSgd, kAdamW };

ToyOptimizer ParseToyOptimizer(const std::string &name);

struct ToyLmOptions {
  ToyOptimizer optimizer = ToyOptimizer::kAdamW;
  size_t epochs = 30;
  size_t batch_size = 0;  // sentences per step; 0 = full batch
  uint64_t seed = 0;      // minibatch shuffling
  double sgd_lr = 5.0;
  AdamWOptions adamw{0.1, 0.9, 0.999, 1e-8, 0.0};
};

struct ToyLmResult {
  std::shared_ptr<BigramScorer> lm;
  std::vector<double> epoch_loss;  // mean nats per token after each epoch
};

/// Trains logits z[h][w] (h in {<s>, words}, w in {</s>, words}) so that
/// p(w|h) = softmax(z[h])[w]. Zero epochs leave all logits at 0 (uniform).
ToyLmResult TrainToyLm(const Vocabulary &vocab,
                       const std::vector<std::vector<TokenId>> &sentences,
                       const ToyLmOptions &options);

/// Mean negative log-likelihood per predicted token (</s> included).
double CrossEntropy(const Scorer &lm,
                    const std::vector<std::vector<TokenId>> &sentences);

/// Cross-entropy of the count-based maximum-likelihood bigram on the same
/// sentences: the optimum any bigram trainer can reach.
double MaxLikelihoodCrossEntropy(const Vocabulary &vocab,
                                 const std::vector<std::vector<TokenId>> &sentences);

}  // namespace fusekit

#endif  // FUSEKIT_HARNESS_TOY_LM_H_

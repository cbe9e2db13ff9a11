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

// speaker/ubm.h
// Diagonal-covariance GMM universal background model and its EM trainer.

#ifndef FUSEKIT_SPEAKER_UBM_H_
#define FUSEKIT_SPEAKER_UBM_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fusekit {

struct Ubm {
  Eigen::VectorXd weights;    // K
  Eigen::MatrixXd means;      // K x D
  Eigen::MatrixXd variances;  // K x D

  int num_components() const { return static_cast<int>(weights.size()); }
  int dim() const { return static_cast<int>(means.cols()); }

  /// Per-component log(w_k N(x; mu_k, Sigma_k)) for one frame.
  Eigen::VectorXd ComponentLogLikes(const Eigen::Ref<const Eigen::VectorXd> &x) const;
  /// Posterior responsibilities for one frame; sums to 1.
  Eigen::VectorXd Posteriors(const Eigen::Ref<const Eigen::VectorXd> &x,
                             double *frame_loglike = nullptr) const;
  /// Total data log-likelihood, frames stored as rows.
  double LogLikelihood(const Eigen::MatrixXd &frames) const;

  void Validate() const;
};

struct UbmTrainOptions {
  int num_components = 64;
  int iterations = 10;
  uint64_t seed = 0;
  double variance_floor_scale = 1e-4;  // times the global variance
  double weight_floor = 1e-6;
};

struct UbmTrainResult {
  Ubm ubm;
  /// loglike[0] is the initialization; loglike[i] after EM iteration i.
  std::vector<double> loglike;
};

/// k-means++ seeding followed by maximum-likelihood EM. Frames are rows.
UbmTrainResult TrainUbm(const Eigen::MatrixXd &frames,
                        const UbmTrainOptions &opts);

void WriteUbm(const std::string &path, const Ubm &ubm);
Ubm ReadUbm(const std::string &path);

}  // namespace fusekit

#endif  // FUSEKIT_SPEAKER_UBM_H_

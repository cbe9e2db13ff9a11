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

// speaker/ivector.h
// Baum-Welch statistics, total-variability matrix training and i-vector
// extraction.

#ifndef FUSEKIT_SPEAKER_IVECTOR_H_
#define FUSEKIT_SPEAKER_IVECTOR_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fusekit/speaker/ubm.h"

namespace fusekit {

/// Zeroth-order soft counts and first-order sums centred on the UBM means.
struct BwStats {
  Eigen::VectorXd zeroth;  // K
  Eigen::MatrixXd first;   // K x D

  BwStats() = default;
  BwStats(int num_components, int dim);
  BwStats &operator+=(const BwStats &other);
  double num_frames() const { return zeroth.sum(); }
};

BwStats AccumulateStats(const Ubm &ubm, const Eigen::MatrixXd &frames);

/// Total-variability subspace. Rows are grouped per component: rows
/// [k*D, (k+1)*D) hold T_k.
struct TMatrix {
  Eigen::MatrixXd t;  // (K*D) x R
  int rank() const { return static_cast<int>(t.cols()); }
};

/// Posterior precision L = I + sum_k N_k T_k' Sigma_k^-1 T_k and linear term
/// b = sum_k T_k' Sigma_k^-1 F_k for one utterance.
struct IvectorPosterior {
  Eigen::MatrixXd precision;
  Eigen::VectorXd linear;
  Eigen::VectorXd mean;        // L^-1 b
  Eigen::MatrixXd covariance;  // L^-1
};

IvectorPosterior ComputeIvectorPosterior(const TMatrix &tmat, const Ubm &ubm,
                                         const BwStats &stats);

/// Posterior mean of the latent factor.
Eigen::VectorXd ExtractIvector(const TMatrix &tmat, const Ubm &ubm,
                               const BwStats &stats);

struct TMatrixTrainOptions {
  int rank = 16;
  int iterations = 10;
  uint64_t seed = 0;
  double init_scale = 0.1;  // std-dev of the random init, times sqrt(var)
};

struct TMatrixTrainResult {
  TMatrix tmat;
  /// objective[i] = sum over utterances of 1/2 b'L^-1 b - 1/2 log|L|
  /// (marginal log-likelihood up to a constant) after iteration i;
  /// objective[0] is the initialization.
  std::vector<double> objective;
};

TMatrixTrainResult TrainTMatrix(const Ubm &ubm,
                                const std::vector<BwStats> &stats,
                                const TMatrixTrainOptions &opts);

/// Marginal log-likelihood of the statistics under T, up to a constant that
/// does not depend on T.
double TMatrixObjective(const TMatrix &tmat, const Ubm &ubm,
                        const std::vector<BwStats> &stats);

void WriteTMatrix(const std::string &path, const TMatrix &tmat);
TMatrix ReadTMatrix(const std::string &path);

}  // namespace fusekit

#endif  // FUSEKIT_SPEAKER_IVECTOR_H_

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

// Planted total-variability model used by the speaker tests.

#ifndef FUSEKIT_TESTS_SPEAKER_FIXTURES_H_
#define FUSEKIT_TESTS_SPEAKER_FIXTURES_H_

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "fusekit/common/rng.h"
#include "fusekit/speaker/ivector.h"

namespace fusekit::testing {

struct PlantedModel {
  Ubm ubm;
  TMatrix truth;
  std::vector<BwStats> stats;
  std::vector<Eigen::VectorXd> latents;
};

// Well-separated unit-variance UBM whose supervector is shifted per utterance
// by T* w, w ~ N(0, I).
inline PlantedModel MakePlantedModel(int k, int d, int r, int utterances,
                                     int frames_per_utt, uint64_t seed) {
  Rng rng(seed);
  PlantedModel m;
  m.ubm.weights = Eigen::VectorXd::Constant(k, 1.0 / k);
  m.ubm.means.resize(k, d);
  for (int c = 0; c < k; ++c)
    for (int i = 0; i < d; ++i) m.ubm.means(c, i) = 25.0 * c + 3.0 * rng.Normal();
  m.ubm.variances = Eigen::MatrixXd::Ones(k, d);
  m.truth.t.resize(k * d, r);
  for (Eigen::Index i = 0; i < m.truth.t.size(); ++i)
    m.truth.t.data()[i] = rng.Normal();
  for (int u = 0; u < utterances; ++u) {
    Eigen::VectorXd w(r);
    for (int j = 0; j < r; ++j) w[j] = rng.Normal();
    Eigen::MatrixXd frames(frames_per_utt, d);
    for (int t = 0; t < frames_per_utt; ++t) {
      const int c = static_cast<int>(rng.UniformInt(0, k - 1));
      const Eigen::VectorXd shift = m.truth.t.middleRows(c * d, d) * w;
      for (int i = 0; i < d; ++i)
        frames(t, i) = m.ubm.means(c, i) + shift[i] + rng.Normal();
    }
    m.stats.push_back(AccumulateStats(m.ubm, frames));
    m.latents.push_back(w);
  }
  return m;
}

// Largest principal angle (radians) between the column spans of a and b.
inline double MaxPrincipalAngle(const Eigen::MatrixXd &a,
                                const Eigen::MatrixXd &b) {
  const Eigen::MatrixXd qa = Eigen::HouseholderQR<Eigen::MatrixXd>(a)
                                 .householderQ() *
                             Eigen::MatrixXd::Identity(a.rows(), a.cols());
  const Eigen::MatrixXd qb = Eigen::HouseholderQR<Eigen::MatrixXd>(b)
                                 .householderQ() *
                             Eigen::MatrixXd::Identity(b.rows(), b.cols());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(qa.transpose() * qb);
  const double smallest = std::clamp(svd.singularValues().minCoeff(), -1.0, 1.0);
  return std::acos(smallest);
}

}  // namespace fusekit::testing

#endif  // FUSEKIT_TESTS_SPEAKER_FIXTURES_H_

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

#include <cmath>

#include "fusekit/common/error.h"
#include "fusekit/common/rng.h"
#include "fusekit/speaker/ivector.h"
#include "fusekit/speaker/ubm.h"
#include "speaker_fixtures.h"
#include "test_util.h"

using namespace fusekit;

namespace {

Eigen::MatrixXd TwoClusters(Rng &rng, int n, const Eigen::RowVector2d &a,
                            const Eigen::RowVector2d &b) {
  Eigen::MatrixXd frames(n, 2);
  for (int t = 0; t < n; ++t) {
    const auto &centre = (t % 2 == 0) ? a : b;
    frames.row(t) = centre + 0.5 * Eigen::RowVector2d(rng.Normal(), rng.Normal());
  }
  return frames;
}

Ubm RandomUbm(Rng &rng, int k, int d) {
  Ubm ubm;
  ubm.weights.resize(k);
  for (int c = 0; c < k; ++c) ubm.weights[c] = 0.5 + rng.Uniform();
  ubm.weights /= ubm.weights.sum();
  ubm.means.resize(k, d);
  ubm.variances.resize(k, d);
  for (int c = 0; c < k; ++c)
    for (int i = 0; i < d; ++i) {
      ubm.means(c, i) = 2.0 * rng.Normal();
      ubm.variances(c, i) = 0.5 + rng.Uniform();
    }
  return ubm;
}

}  // namespace

TEST_CASE("single-component UBM is the sample Gaussian") {
  Rng rng(1);
  Eigen::MatrixXd frames(200, 3);
  for (Eigen::Index i = 0; i < frames.size(); ++i)
    frames.data()[i] = 1.0 + 2.0 * rng.Normal();
  const auto res = TrainUbm(frames, {.num_components = 1, .iterations = 3});
  const Eigen::RowVectorXd mean = frames.colwise().mean();
  const Eigen::RowVectorXd var =
      (frames.rowwise() - mean).array().square().colwise().mean();
  CHECK((res.ubm.means.row(0) - mean).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((res.ubm.variances.row(0) - var).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(res.ubm.weights[0] == doctest::Approx(1.0));
}

TEST_CASE("two separated clusters are recovered") {
  Rng rng(2);
  const Eigen::RowVector2d a(-5.0, 1.0), b(4.0, -3.0);
  const auto frames = TwoClusters(rng, 2000, a, b);
  const auto res = TrainUbm(frames, {.num_components = 2, .iterations = 20, .seed = 3});
  const auto &m = res.ubm.means;
  const bool first_is_a = (m.row(0) - a).norm() < (m.row(1) - a).norm();
  CHECK((m.row(first_is_a ? 0 : 1) - a).cwiseAbs().maxCoeff() < 0.05);
  CHECK((m.row(first_is_a ? 1 : 0) - b).cwiseAbs().maxCoeff() < 0.05);
  res.ubm.Validate();
}

TEST_CASE("UBM EM is monotone and iters=0 returns the initialization") {
  Rng rng(4);
  Eigen::MatrixXd frames(600, 4);
  for (Eigen::Index i = 0; i < frames.size(); ++i)
    frames.data()[i] = rng.Normal() + (i % 3) * 2.0;
  const auto init = TrainUbm(frames, {.num_components = 5, .iterations = 0, .seed = 9});
  const auto full = TrainUbm(frames, {.num_components = 5, .iterations = 15, .seed = 9});
  CHECK(init.loglike.size() == 1);
  CHECK(init.loglike[0] == full.loglike[0]);
  for (size_t i = 1; i < full.loglike.size(); ++i)
    CHECK(full.loglike[i] >= full.loglike[i - 1] - 1e-8 * std::abs(full.loglike[i - 1]));
  CHECK_THROWS_AS(TrainUbm(frames.topRows(3), {.num_components = 4}), Error);
}

TEST_CASE("responsibilities are normalized") {
  Rng rng(5);
  const Ubm ubm = RandomUbm(rng, 6, 3);
  for (int t = 0; t < 100; ++t) {
    Eigen::Vector3d x(4 * rng.Normal(), 4 * rng.Normal(), 4 * rng.Normal());
    CHECK(std::abs(ubm.Posteriors(x).sum() - 1.0) < 1e-12);
  }
}

TEST_CASE("Baum-Welch statistics") {
  Rng rng(6);
  const Ubm ubm = RandomUbm(rng, 4, 2);
  const auto zero = AccumulateStats(ubm, Eigen::MatrixXd(0, 2));
  CHECK(zero.zeroth.isZero());
  CHECK(zero.first.isZero());

  Eigen::MatrixXd frames(57, 2);
  for (Eigen::Index i = 0; i < frames.size(); ++i) frames.data()[i] = 3 * rng.Normal();
  const auto stats = AccumulateStats(ubm, frames);
  CHECK(std::abs(stats.zeroth.sum() - 57.0) < 1e-6);

  // Direct recomputation of the responsibility sums.
  Eigen::VectorXd direct = Eigen::VectorXd::Zero(4);
  for (int t = 0; t < 57; ++t) {
    Eigen::VectorXd lik(4);
    for (int c = 0; c < 4; ++c) {
      double l = ubm.weights[c];
      for (int i = 0; i < 2; ++i) {
        const double v = ubm.variances(c, i);
        const double diff = frames(t, i) - ubm.means(c, i);
        l *= std::exp(-0.5 * diff * diff / v) / std::sqrt(2 * M_PI * v);
      }
      lik[c] = l;
    }
    direct += lik / lik.sum();
  }
  CHECK((direct - stats.zeroth).cwiseAbs().maxCoeff() < 1e-9);

  // A frame at a dominant component's mean contributes ~0 first-order mass.
  Ubm sharp = ubm;
  sharp.means.row(1) << 50.0, 50.0;
  Eigen::MatrixXd at_mean(1, 2);
  at_mean << 50.0, 50.0;
  const auto s1 = AccumulateStats(sharp, at_mean);
  CHECK(s1.zeroth[1] > 0.999);
  CHECK(s1.first.row(1).norm() < 1e-12);
}

TEST_CASE("i-vector extraction") {
  SUBCASE("scalar hand computation") {
    Ubm ubm;
    ubm.weights = Eigen::VectorXd::Ones(1);
    ubm.means = Eigen::MatrixXd::Zero(1, 1);
    ubm.variances = Eigen::MatrixXd::Ones(1, 1);
    TMatrix tmat{Eigen::MatrixXd::Ones(1, 1)};
    BwStats stats(1, 1);
    stats.zeroth[0] = 1.0;
    stats.first(0, 0) = 0.5;
    const auto post = ComputeIvectorPosterior(tmat, ubm, stats);
    CHECK(post.precision(0, 0) == doctest::Approx(2.0));
    CHECK(post.mean[0] == doctest::Approx(0.25));
  }

  Rng rng(7);
  const Ubm ubm = RandomUbm(rng, 3, 2);
  TMatrix tmat{Eigen::MatrixXd(6, 2)};
  for (Eigen::Index i = 0; i < tmat.t.size(); ++i) tmat.t.data()[i] = rng.Normal();
  BwStats stats(3, 2);
  for (int c = 0; c < 3; ++c) {
    stats.zeroth[c] = 5.0 + 10 * rng.Uniform();
    stats.first.row(c) << rng.Normal(), rng.Normal();
  }

  SUBCASE("zero statistics give the prior mean") {
    CHECK(ExtractIvector(tmat, ubm, BwStats(3, 2)).isZero());
  }
  SUBCASE("linear in F for fixed N") {
    const auto w = ExtractIvector(tmat, ubm, stats);
    BwStats doubled = stats;
    doubled.first *= 2.0;
    CHECK((ExtractIvector(tmat, ubm, doubled) - 2.0 * w).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("consistent component permutation leaves w unchanged") {
    const std::vector<int> perm{2, 0, 1};
    Ubm pu = ubm;
    TMatrix pt = tmat;
    BwStats ps = stats;
    for (int c = 0; c < 3; ++c) {
      pu.weights[c] = ubm.weights[perm[c]];
      pu.means.row(c) = ubm.means.row(perm[c]);
      pu.variances.row(c) = ubm.variances.row(perm[c]);
      pt.t.middleRows(c * 2, 2) = tmat.t.middleRows(perm[c] * 2, 2);
      ps.zeroth[c] = stats.zeroth[perm[c]];
      ps.first.row(c) = stats.first.row(perm[c]);
    }
    CHECK((ExtractIvector(pt, pu, ps) - ExtractIvector(tmat, ubm, stats))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  }
  SUBCASE("non-finite statistics rejected") {
    BwStats bad = stats;
    bad.first(0, 0) = std::nan("");
    CHECK_THROWS_AS(ExtractIvector(tmat, ubm, bad), Error);
  }
}

TEST_CASE("T matrix training") {
  const auto planted = testing::MakePlantedModel(4, 3, 2, 300, 40, 11);

  SUBCASE("iters=0 returns the initialization") {
    const auto a = TrainTMatrix(planted.ubm, planted.stats, {.rank = 2, .iterations = 0, .seed = 5});
    const auto b = TrainTMatrix(planted.ubm, planted.stats, {.rank = 2, .iterations = 3, .seed = 5});
    CHECK(a.objective.size() == 1);
    CHECK(a.objective[0] == b.objective[0]);
  }
  SUBCASE("objective is monotone and the planted subspace is recovered") {
    const auto res = TrainTMatrix(planted.ubm, planted.stats, {.rank = 2, .iterations = 10, .seed = 5});
    for (size_t i = 1; i < res.objective.size(); ++i)
      CHECK(res.objective[i] >= res.objective[i - 1] - 1e-8 * std::abs(res.objective[i - 1]));
    CHECK(testing::MaxPrincipalAngle(res.tmat.t, planted.truth.t) < 0.2);
  }
  SUBCASE("full rank: supervector reconstruction residual never grows") {
    const auto full = testing::MakePlantedModel(2, 2, 4, 400, 60, 12);
    for (uint64_t seed : {2u, 3u, 4u, 5u}) {
      double prev = 1e300;
      for (int iters = 0; iters <= 8; ++iters) {
        const auto res = TrainTMatrix(full.ubm, full.stats, {.rank = 4, .iterations = iters, .seed = seed});
        double residual = 0.0;
        for (const auto &s : full.stats) {
          const Eigen::VectorXd w = ExtractIvector(res.tmat, full.ubm, s);
          for (int c = 0; c < 2; ++c) {
            if (s.zeroth[c] <= 0) continue;
            const Eigen::VectorXd offset = s.first.row(c).transpose() / s.zeroth[c];
            residual += s.zeroth[c] * (offset - res.tmat.t.middleRows(c * 2, 2) * w).squaredNorm();
          }
        }
        CHECK(residual <= prev * (1 + 1e-9));
        prev = residual;
      }
    }
  }
  SUBCASE("rank larger than utterance count") {
    std::vector<BwStats> few(planted.stats.begin(), planted.stats.begin() + 1);
    CHECK_THROWS_AS(TrainTMatrix(planted.ubm, few, {.rank = 2}), Error);
  }
}

TEST_CASE("model files") {
  const auto dir = testing::TempDir("speaker_io");
  Rng rng(8);
  const Ubm ubm = RandomUbm(rng, 3, 2);
  WriteUbm((dir / "u.ubm").string(), ubm);
  const Ubm back = ReadUbm((dir / "u.ubm").string());
  CHECK(back.weights == ubm.weights);
  CHECK(back.means == ubm.means);
  CHECK(back.variances == ubm.variances);

  TMatrix t{Eigen::MatrixXd::Random(6, 2)};
  WriteTMatrix((dir / "t.tmat").string(), t);
  CHECK(ReadTMatrix((dir / "t.tmat").string()).t == t.t);
  CHECK_THROWS_AS(ReadUbm((dir / "t.tmat").string()), Error);
}

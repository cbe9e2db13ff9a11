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

#include "fusekit/speaker/ivector.h"

#include <cmath>
#include <fstream>

#include "fusekit/common/binary_io.h"
#include "fusekit/common/error.h"
#include "fusekit/common/rng.h"

namespace fusekit {

namespace {

constexpr double kRidge = 1e-8;

void CheckShapes(const TMatrix &tmat, const Ubm &ubm, const BwStats &stats) {
  const int k = ubm.num_components();
  const int d = ubm.dim();
  Check(tmat.t.rows() == static_cast<Eigen::Index>(k) * d && tmat.rank() >= 1,
        Errc::kInvalidArgument, "T matrix does not match UBM dimensions");
  Check(stats.zeroth.size() == k && stats.first.rows() == k &&
            stats.first.cols() == d,
        Errc::kInvalidArgument, "statistics do not match UBM dimensions");
}

// Per-component T_k' Sigma_k^-1 T_k, shared by every utterance.
std::vector<Eigen::MatrixXd> ComponentProducts(const TMatrix &tmat,
                                               const Ubm &ubm) {
  const int d = ubm.dim();
  std::vector<Eigen::MatrixXd> out(ubm.num_components());
  for (int c = 0; c < ubm.num_components(); ++c) {
    const auto tk = tmat.t.middleRows(c * d, d);
    const Eigen::VectorXd inv_var = ubm.variances.row(c).transpose().cwiseInverse();
    out[c] = tk.transpose() * inv_var.asDiagonal() * tk;
  }
  return out;
}

IvectorPosterior Posterior(const TMatrix &tmat, const Ubm &ubm,
                           const BwStats &stats,
                           const std::vector<Eigen::MatrixXd> &products) {
  const int d = ubm.dim();
  const int r = tmat.rank();
  IvectorPosterior post;
  post.precision = Eigen::MatrixXd::Identity(r, r);
  post.linear = Eigen::VectorXd::Zero(r);
  for (int c = 0; c < ubm.num_components(); ++c) {
    post.precision += stats.zeroth[c] * products[c];
    const auto tk = tmat.t.middleRows(c * d, d);
    const Eigen::VectorXd scaled =
        stats.first.row(c).transpose().cwiseQuotient(ubm.variances.row(c).transpose());
    post.linear += tk.transpose() * scaled;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(post.precision);
  Check(llt.info() == Eigen::Success, Errc::kNumeric,
        "i-vector precision is not positive definite");
  post.mean = llt.solve(post.linear);
  post.covariance = llt.solve(Eigen::MatrixXd::Identity(r, r));
  return post;
}

double UtteranceObjective(const IvectorPosterior &post) {
  Eigen::LLT<Eigen::MatrixXd> llt(post.precision);
  const double logdet =
      2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return 0.5 * post.linear.dot(post.mean) - 0.5 * logdet;
}

}  // namespace

BwStats::BwStats(int num_components, int dim)
    : zeroth(Eigen::VectorXd::Zero(num_components)),
      first(Eigen::MatrixXd::Zero(num_components, dim)) {}

BwStats &BwStats::operator+=(const BwStats &other) {
  Check(zeroth.size() == other.zeroth.size() &&
            first.cols() == other.first.cols(),
        Errc::kInvalidArgument, "cannot merge statistics of different shape");
  zeroth += other.zeroth;
  first += other.first;
  return *this;
}

BwStats AccumulateStats(const Ubm &ubm, const Eigen::MatrixXd &frames) {
  Check(frames.rows() == 0 || frames.cols() == ubm.dim(),
        Errc::kInvalidArgument, "frame dimension does not match UBM");
  BwStats stats(ubm.num_components(), ubm.dim());
  for (Eigen::Index t = 0; t < frames.rows(); ++t) {
    const Eigen::VectorXd x = frames.row(t).transpose();
    const Eigen::VectorXd post = ubm.Posteriors(x);
    stats.zeroth += post;
    for (int c = 0; c < ubm.num_components(); ++c)
      stats.first.row(c) += post[c] * (x.transpose() - ubm.means.row(c));
  }
  return stats;
}

IvectorPosterior ComputeIvectorPosterior(const TMatrix &tmat, const Ubm &ubm,
                                         const BwStats &stats) {
  CheckShapes(tmat, ubm, stats);
  Check(stats.zeroth.allFinite() && stats.first.allFinite(), Errc::kNumeric,
        "non-finite statistics");
  return Posterior(tmat, ubm, stats, ComponentProducts(tmat, ubm));
}

Eigen::VectorXd ExtractIvector(const TMatrix &tmat, const Ubm &ubm,
                               const BwStats &stats) {
  return ComputeIvectorPosterior(tmat, ubm, stats).mean;
}

double TMatrixObjective(const TMatrix &tmat, const Ubm &ubm,
                        const std::vector<BwStats> &stats) {
  const auto products = ComponentProducts(tmat, ubm);
  double total = 0.0;
  for (const auto &s : stats) {
    CheckShapes(tmat, ubm, s);
    total += UtteranceObjective(Posterior(tmat, ubm, s, products));
  }
  return total;
}

TMatrixTrainResult TrainTMatrix(const Ubm &ubm,
                                const std::vector<BwStats> &stats,
                                const TMatrixTrainOptions &opts) {
  const int k = ubm.num_components();
  const int d = ubm.dim();
  const int r = opts.rank;
  Check(r >= 1, Errc::kInvalidArgument, "rank must be >= 1");
  Check(static_cast<int>(stats.size()) >= r, Errc::kInvalidArgument,
        "need at least rank-many utterances to train the T matrix");

  Rng rng(opts.seed);
  TMatrixTrainResult result;
  TMatrix &tmat = result.tmat;
  tmat.t.resize(static_cast<Eigen::Index>(k) * d, r);
  for (int c = 0; c < k; ++c)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < r; ++j)
        tmat.t(c * d + i, j) =
            opts.init_scale * std::sqrt(ubm.variances(c, i)) * rng.Normal();
  result.objective.push_back(TMatrixObjective(tmat, ubm, stats));

  for (int iter = 0; iter < opts.iterations; ++iter) {
    const auto products = ComponentProducts(tmat, ubm);
    std::vector<Eigen::MatrixXd> lhs(k, Eigen::MatrixXd::Zero(r, r));
    std::vector<Eigen::MatrixXd> rhs(k, Eigen::MatrixXd::Zero(d, r));
    for (const auto &s : stats) {
      CheckShapes(tmat, ubm, s);
      const IvectorPosterior post = Posterior(tmat, ubm, s, products);
      const Eigen::MatrixXd second =
          post.covariance + post.mean * post.mean.transpose();
      for (int c = 0; c < k; ++c) {
        lhs[c] += s.zeroth[c] * second;
        rhs[c] += s.first.row(c).transpose() * post.mean.transpose();
      }
    }
    // M-step: T_k A_k = C_k, i.e. A_k T_k' = C_k' (A_k symmetric).
    for (int c = 0; c < k; ++c) {
      Eigen::LDLT<Eigen::MatrixXd> ldlt(lhs[c]);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
          ldlt.vectorD().minCoeff() <= 0.0) {
        lhs[c] += kRidge * Eigen::MatrixXd::Identity(r, r);
        ldlt.compute(lhs[c]);
      }
      tmat.t.middleRows(c * d, d) = ldlt.solve(rhs[c].transpose()).transpose();
    }
    Check(tmat.t.allFinite(), Errc::kNumeric, "T matrix update diverged");
    result.objective.push_back(TMatrixObjective(tmat, ubm, stats));
  }
  return result;
}

void WriteTMatrix(const std::string &path, const TMatrix &tmat) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) Fail(Errc::kIo, "cannot write " + path);
  binio::WriteTag(os, "TMAT1");
  binio::WriteU32(os, static_cast<uint32_t>(tmat.t.rows()));
  binio::WriteU32(os, static_cast<uint32_t>(tmat.t.cols()));
  for (Eigen::Index i = 0; i < tmat.t.rows(); ++i)
    for (Eigen::Index j = 0; j < tmat.t.cols(); ++j)
      binio::WriteF64(os, tmat.t(i, j));
}

TMatrix ReadTMatrix(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(Errc::kIo, "cannot open " + path);
  binio::ExpectTag(is, "TMAT1");
  const uint32_t rows = binio::ReadU32(is);
  const uint32_t cols = binio::ReadU32(is);
  TMatrix tmat;
  tmat.t.resize(rows, cols);
  for (Eigen::Index i = 0; i < tmat.t.rows(); ++i)
    for (Eigen::Index j = 0; j < tmat.t.cols(); ++j)
      tmat.t(i, j) = binio::ReadF64(is);
  Check(tmat.t.allFinite(), Errc::kNumeric, "non-finite T matrix in " + path);
  return tmat;
}

}  // namespace fusekit

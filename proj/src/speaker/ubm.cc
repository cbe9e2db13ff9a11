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

#include "fusekit/speaker/ubm.h"

#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "fusekit/common/binary_io.h"
#include "fusekit/common/error.h"
#include "fusekit/common/rng.h"

namespace fusekit {

namespace {

double LogSumExp(const Eigen::VectorXd &v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

Eigen::RowVectorXd GlobalVariance(const Eigen::MatrixXd &frames) {
  const Eigen::RowVectorXd mean = frames.colwise().mean();
  return (frames.rowwise() - mean).array().square().colwise().mean();
}

// k-means++ seeding: the first centre is a uniformly drawn frame, later
// centres are drawn with probability proportional to squared distance.
Eigen::MatrixXd SeedCentres(const Eigen::MatrixXd &frames, int k, Rng &rng) {
  const Eigen::Index n = frames.rows();
  Eigen::MatrixXd centres(k, frames.cols());
  centres.row(0) = frames.row(rng.UniformInt(0, n - 1));
  Eigen::VectorXd dist2 = (frames.rowwise() - centres.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const size_t pick = dist2.sum() > 0.0
                            ? rng.Categorical(std::vector<double>(
                                  dist2.data(), dist2.data() + n))
                            : static_cast<size_t>(rng.UniformInt(0, n - 1));
    centres.row(c) = frames.row(static_cast<Eigen::Index>(pick));
    dist2 = dist2.cwiseMin(
        (frames.rowwise() - centres.row(c)).rowwise().squaredNorm());
  }
  return centres;
}

}  // namespace

Eigen::VectorXd Ubm::ComponentLogLikes(
    const Eigen::Ref<const Eigen::VectorXd> &x) const {
  const int k = num_components();
  Eigen::VectorXd out(k);
  constexpr double kLog2Pi = 1.8378770664093453;
  for (int c = 0; c < k; ++c) {
    const auto var = variances.row(c).transpose().array();
    const auto diff = x.array() - means.row(c).transpose().array();
    out[c] = std::log(weights[c]) -
             0.5 * ((kLog2Pi + var.log()) + diff.square() / var).sum();
  }
  return out;
}

Eigen::VectorXd Ubm::Posteriors(const Eigen::Ref<const Eigen::VectorXd> &x,
                                double *frame_loglike) const {
  Eigen::VectorXd ll = ComponentLogLikes(x);
  const double total = LogSumExp(ll);
  if (frame_loglike) *frame_loglike = total;
  return (ll.array() - total).exp();
}

double Ubm::LogLikelihood(const Eigen::MatrixXd &frames) const {
  double total = 0.0;
  for (Eigen::Index t = 0; t < frames.rows(); ++t)
    total += LogSumExp(ComponentLogLikes(frames.row(t).transpose()));
  return total;
}

void Ubm::Validate() const {
  const int k = num_components();
  Check(k >= 1 && means.rows() == k && variances.rows() == k &&
            variances.cols() == means.cols(),
        Errc::kInvalidArgument, "inconsistent UBM dimensions");
  Check(std::abs(weights.sum() - 1.0) < 1e-9, Errc::kNumeric,
        "UBM weights do not sum to 1");
  Check((variances.array() > 0.0).all() && weights.allFinite() &&
            means.allFinite(),
        Errc::kNumeric, "UBM has non-positive variance or non-finite values");
}

UbmTrainResult TrainUbm(const Eigen::MatrixXd &frames,
                        const UbmTrainOptions &opts) {
  const int k = opts.num_components;
  const Eigen::Index n = frames.rows();
  const Eigen::Index d = frames.cols();
  Check(k >= 1, Errc::kInvalidArgument, "need at least one component");
  Check(n >= k, Errc::kInvalidArgument,
        "more UBM components (" + std::to_string(k) + ") than frames (" +
            std::to_string(n) + ")");
  Check(frames.allFinite(), Errc::kNumeric, "non-finite training frames");

  Rng rng(opts.seed);
  const Eigen::RowVectorXd global_var = GlobalVariance(frames);
  const Eigen::RowVectorXd var_floor =
      (global_var * opts.variance_floor_scale)
          .cwiseMax(std::numeric_limits<double>::min());

  UbmTrainResult result;
  Ubm &ubm = result.ubm;
  ubm.weights = Eigen::VectorXd::Constant(k, 1.0 / k);
  ubm.means = SeedCentres(frames, k, rng);
  ubm.variances = global_var.cwiseMax(var_floor).replicate(k, 1);
  result.loglike.push_back(ubm.LogLikelihood(frames));

  Eigen::VectorXd occ(k);
  Eigen::MatrixXd sum_x(k, d), sum_xx(k, d);
  for (int iter = 0; iter < opts.iterations; ++iter) {
    occ.setZero();
    sum_x.setZero();
    sum_xx.setZero();
    for (Eigen::Index t = 0; t < n; ++t) {
      const Eigen::VectorXd x = frames.row(t).transpose();
      const Eigen::VectorXd post = ubm.Posteriors(x);
      occ += post;
      sum_x += post * x.transpose();
      sum_xx += post * x.array().square().matrix().transpose();
    }
    for (int c = 0; c < k; ++c) {
      if (occ[c] > 1e-10) {
        ubm.means.row(c) = sum_x.row(c) / occ[c];
        ubm.variances.row(c) =
            (sum_xx.row(c) / occ[c] - ubm.means.row(c).array().square().matrix())
                .cwiseMax(var_floor);
      } else {
        ubm.variances.row(c) = ubm.variances.row(c).cwiseMax(var_floor);
      }
    }
    ubm.weights = (occ / static_cast<double>(n)).cwiseMax(opts.weight_floor);
    ubm.weights /= ubm.weights.sum();
    result.loglike.push_back(ubm.LogLikelihood(frames));
  }
  return result;
}

void WriteUbm(const std::string &path, const Ubm &ubm) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) Fail(Errc::kIo, "cannot write " + path);
  binio::WriteTag(os, "UBM1");
  binio::WriteU32(os, static_cast<uint32_t>(ubm.num_components()));
  binio::WriteU32(os, static_cast<uint32_t>(ubm.dim()));
  for (Eigen::Index c = 0; c < ubm.weights.size(); ++c)
    binio::WriteF64(os, ubm.weights[c]);
  for (const Eigen::MatrixXd *m : {&ubm.means, &ubm.variances})
    for (Eigen::Index r = 0; r < m->rows(); ++r)
      for (Eigen::Index c = 0; c < m->cols(); ++c) binio::WriteF64(os, (*m)(r, c));
}

Ubm ReadUbm(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(Errc::kIo, "cannot open " + path);
  binio::ExpectTag(is, "UBM1");
  const uint32_t k = binio::ReadU32(is);
  const uint32_t d = binio::ReadU32(is);
  Ubm ubm;
  ubm.weights.resize(k);
  ubm.means.resize(k, d);
  ubm.variances.resize(k, d);
  for (uint32_t c = 0; c < k; ++c) ubm.weights[c] = binio::ReadF64(is);
  for (Eigen::MatrixXd *m : {&ubm.means, &ubm.variances})
    for (Eigen::Index r = 0; r < m->rows(); ++r)
      for (Eigen::Index c = 0; c < m->cols(); ++c) (*m)(r, c) = binio::ReadF64(is);
  ubm.Validate();
  return ubm;
}

}  // namespace fusekit

//
// Copyright 2026 The Shuffle Privacy Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "shuffle_privacy/estimation_bounds.h"

#include <cmath>
#include <limits>

#include "absl/strings/str_cat.h"
#include "shuffle_privacy/numeric.h"
#include "shuffle_privacy/status_macros.h"

namespace shuffle_privacy {
namespace {

absl::Status SingularFisherError(absl::string_view where) {
  return absl::FailedPreconditionError(absl::StrCat(
      "SingularFisher: Fisher information is singular on T_d at ", where,
      "; the lower bound is vacuous"));
}

}  // namespace

Eigen::MatrixXd TangentBasis(int d) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d - 1);
  for (int k = 1; k < d; ++k) {
    const double norm = std::sqrt(static_cast<double>(k) * (k + 1));
    for (int i = 0; i < k; ++i) h(i, k - 1) = 1.0 / norm;
    h(k, k - 1) = -static_cast<double>(k) / norm;
  }
  return h;
}

double FisherInfo::TangentTrace() const { return tangent_eigenvalues.sum(); }

double FisherInfo::TangentInverseTrace() const {
  if (singular) return std::numeric_limits<double>::infinity();
  CompensatedSum s;
  for (Eigen::Index i = 0; i < tangent_eigenvalues.size(); ++i) {
    s.Add(1.0 / tangent_eigenvalues(i));
  }
  return s.value();
}

absl::StatusOr<FisherInfo> ComputeFisherInfo(const Channel& ch,
                                             std::span<const double> theta,
                                             int64_t n) {
  const int d = ch.d();
  if (static_cast<int>(theta.size()) != d) {
    return absl::InvalidArgumentError(absl::StrCat(
        "SimplexViolation: theta has ", theta.size(), " entries, d = ", d));
  }
  for (double t : theta) {
    if (!(t >= 0.0)) {
      return absl::InvalidArgumentError(
          absl::StrCat("SimplexViolation: negative coordinate ", t));
    }
  }
  if (std::abs(Sum(theta) - 1.0) > 1e-12) {
    return absl::InvalidArgumentError(
        absl::StrCat("SimplexViolation: theta sums to ", Sum(theta)));
  }
  const int k = ch.num_outputs();
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
      w(ch.entries().data(), d, k);
  Eigen::Map<const Eigen::VectorXd> th(theta.data(), d);
  const Eigen::VectorXd q = w.transpose() * th;
  for (int y = 0; y < k; ++y) {
    if (!(q(y) > 0.0)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "DegenerateMixture: q_theta vanishes at output ", ch.outputs()[y]));
    }
  }
  const Eigen::MatrixXd scaled = w * q.cwiseInverse().cwiseSqrt().asDiagonal();
  const Eigen::MatrixXd gram = scaled * scaled.transpose();
  const Eigen::MatrixXd proj =
      Eigen::MatrixXd::Identity(d, d) -
      Eigen::MatrixXd::Constant(d, d, 1.0 / d);
  FisherInfo info;
  info.n = n;
  info.theta.assign(theta.begin(), theta.end());
  info.matrix = static_cast<double>(n) * proj * gram * proj;
  info.matrix = 0.5 * (info.matrix + info.matrix.transpose()).eval();

  const Eigen::MatrixXd h = TangentBasis(d);
  const Eigen::MatrixXd restricted = h.transpose() * info.matrix * h;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      restricted, Eigen::EigenvaluesOnly);
  info.tangent_eigenvalues = solver.eigenvalues();
  const double top = info.tangent_eigenvalues.maxCoeff();
  info.singular = !(top > 0.0) || info.tangent_eigenvalues.minCoeff() <
                                      kSingularRelativeEigenvalue * top;
  return info;
}

std::vector<double> NearVertexPoint(int d, double rho) {
  std::vector<double> theta(d, rho);
  theta[0] = 1.0 - (d - 1) * rho;
  return theta;
}

absl::StatusOr<CrBound> CramerRaoBound(const Channel& ch, int64_t n,
                                       double rho) {
  const int d = ch.d();
  if (!(rho > 0.0) || !(rho < 1.0 / (d - 1))) {
    return absl::InvalidArgumentError(
        absl::StrCat("BadRho: need 0 < rho < 1/(d-1), got ", rho));
  }
  const std::vector<double> theta = NearVertexPoint(d, rho);
  SP_ASSIGN_OR_RETURN(FisherInfo info, ComputeFisherInfo(ch, theta, n));
  if (info.singular) return SingularFisherError("theta^(rho)");
  CrBound out;
  out.rho = rho;
  out.chi_star = ChiStar(ch);
  out.formula = (d - 1) * (1.0 - (d - 1) * rho) /
                (static_cast<double>(n) * out.chi_star);
  out.trace = info.TangentInverseTrace();
  return out;
}

absl::StatusOr<AssouadResult> AssouadBound(int d, int64_t n, double chi_star,
                                           std::optional<double> delta) {
  if (!(chi_star > 0.0) || !std::isfinite(chi_star)) {
    return absl::InvalidArgumentError(
        "ZeroInformation: Assouad bound needs 0 < chi* < inf");
  }
  const double max_delta = 1.0 / (4.0 * (d - 1));
  AssouadResult out;
  out.n_chi_star = static_cast<double>(n) * chi_star;
  const double root = std::sqrt(out.n_chi_star);
  if (delta.has_value()) {
    if (!(*delta > 0.0) || *delta > max_delta * (1.0 + 1e-12)) {
      return absl::InvalidArgumentError(absl::StrCat(
          "BadDelta: need 0 < delta <= 1/(4(d-1)), got ", *delta));
    }
    out.delta = *delta;
  } else if (out.n_chi_star >= 4.0 * (d - 1.0) * (d - 1.0)) {
    out.delta = 1.0 / (2.0 * root);
  } else {
    out.delta = max_delta;
    out.regime_ok = false;
  }
  out.bound = (d - 1) / 8.0 * out.delta * out.delta * (1.0 - out.delta * root);
  out.vacuous = out.bound <= 0.0;
  if (out.vacuous) out.bound = 0.0;
  return out;
}

absl::StatusOr<AssouadResult> AssouadBound(const Channel& ch, int64_t n,
                                           std::optional<double> delta) {
  return AssouadBound(ch.d(), n, ChiStar(ch), delta);
}

absl::StatusOr<std::vector<std::vector<double>>> AssouadCube(int d,
                                                             double delta) {
  if (d < 2 || d > kMaxCubeD) {
    return absl::ResourceExhaustedError(absl::StrCat(
        "TooManyVertices: cube needs 2 <= d <= ", kMaxCubeD, ", got ", d));
  }
  if (!(delta > 0.0) || delta > 1.0 / (4.0 * (d - 1)) * (1.0 + 1e-12)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "BadDelta: need 0 < delta <= 1/(4(d-1)), got ", delta));
  }
  const int64_t count = int64_t{1} << (d - 1);
  std::vector<std::vector<double>> vertices;
  vertices.reserve(count);
  for (int64_t v = 0; v < count; ++v) {
    std::vector<double> theta(d);
    double rest = 0.0;
    for (int j = 1; j < d; ++j) {
      theta[j] = delta * (1.0 + ((v >> (j - 1)) & 1));
      rest += theta[j];
    }
    theta[0] = 1.0 - rest;
    vertices.push_back(std::move(theta));
  }
  return vertices;
}

double SymmetrizedChi2(const Channel& ch) {
  const int d = ch.d();
  const std::vector<double> m = PairwiseChi2Matrix(ch);
  CompensatedSum s;
  for (double v : m) s.Add(v);
  return s.value() / (static_cast<double>(d) * (d - 1));
}

absl::StatusOr<SymmetrizedFisher> SymmetrizedFisherUniform(const Channel& ch,
                                                           int64_t n) {
  const int d = ch.d();
  const std::vector<double> uniform(d, 1.0 / d);
  SP_ASSIGN_OR_RETURN(FisherInfo info, ComputeFisherInfo(ch, uniform, n));
  if (info.singular) return SingularFisherError("the uniform point");
  SymmetrizedFisher out;
  const double trace = info.TangentTrace();
  out.alpha = trace / (d - 1);
  out.inverse_trace_symmetrized = (d - 1.0) * (d - 1.0) / trace;
  out.inverse_trace = info.TangentInverseTrace();
  return out;
}

}  // namespace shuffle_privacy

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

#ifndef SHUFFLE_PRIVACY_ESTIMATION_BOUNDS_H_
#define SHUFFLE_PRIVACY_ESTIMATION_BOUNDS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "Eigen/Dense"
#include "absl/status/statusor.h"
#include "shuffle_privacy/channel.h"

namespace shuffle_privacy {

// Tangent eigenvalues below this fraction of the largest count as zero.
inline constexpr double kSingularRelativeEigenvalue = 1e-12;

// Orthonormal d x (d-1) basis of T_d = {u : sum u = 0} (Helmert contrasts).
Eigen::MatrixXd TangentBasis(int d);

// I_theta = n P_T W diag(q_theta)^{-1} W^T P_T.
struct FisherInfo {
  Eigen::MatrixXd matrix;
  int64_t n = 0;
  std::vector<double> theta;
  // Eigenvalues of the restriction to T_d, ascending.
  Eigen::VectorXd tangent_eigenvalues;
  bool singular = false;

  double TangentTrace() const;
  // Sum of 1 / eigenvalue on T_d; +inf when singular.
  double TangentInverseTrace() const;
};

absl::StatusOr<FisherInfo> ComputeFisherInfo(const Channel& ch,
                                             std::span<const double> theta,
                                             int64_t n);

// theta^(rho) = (1 - (d-1) rho, rho, ..., rho).
std::vector<double> NearVertexPoint(int d, double rho);

struct CrBound {
  double rho = 0.0;
  double chi_star = 0.0;
  // (d-1)(1 - (d-1) rho) / (n chi*).
  double formula = 0.0;
  // tr_T I^{-1} at theta^(rho).
  double trace = 0.0;
};

absl::StatusOr<CrBound> CramerRaoBound(const Channel& ch, int64_t n,
                                       double rho);

struct AssouadResult {
  double bound = 0.0;
  double delta = 0.0;
  double n_chi_star = 0.0;
  // False when the canonical delta was infeasible and 1/(4(d-1)) was used.
  bool regime_ok = true;
  // delta sqrt(n chi*) >= 1; the bound is then reported as 0.
  bool vacuous = false;
};

// ((d-1)/8) delta^2 (1 - delta sqrt(n chi*)). Without `delta`, uses
// 1/(2 sqrt(n chi*)) when n chi* >= 4(d-1)^2, which gives (d-1)/(64 n chi*).
absl::StatusOr<AssouadResult> AssouadBound(int d, int64_t n, double chi_star,
                                           std::optional<double> delta);
absl::StatusOr<AssouadResult> AssouadBound(const Channel& ch, int64_t n,
                                           std::optional<double> delta);

inline constexpr int kMaxCubeD = 16;

// Vertex v (bit j-2 of the index is v_j) has theta_j = delta (1 + v_j) for
// j >= 2 and theta_1 = 1 - sum_j theta_j.
absl::StatusOr<std::vector<std::vector<double>>> AssouadCube(int d,
                                                             double delta);

// Average of chi2(W(.|j) || W(.|i)) over ordered pairs i != j.
double SymmetrizedChi2(const Channel& ch);

struct SymmetrizedFisher {
  // Common eigenvalue tr_T I / (d-1) of the symmetrized channel.
  double alpha = 0.0;
  // (d-1)^2 / tr_T I and tr_T I^{-1}; the first never exceeds the second.
  double inverse_trace_symmetrized = 0.0;
  double inverse_trace = 0.0;
};

absl::StatusOr<SymmetrizedFisher> SymmetrizedFisherUniform(const Channel& ch,
                                                           int64_t n);

}  // namespace shuffle_privacy

#endif  // SHUFFLE_PRIVACY_ESTIMATION_BOUNDS_H_

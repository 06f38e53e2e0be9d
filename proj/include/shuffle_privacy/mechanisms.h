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

#ifndef SHUFFLE_PRIVACY_MECHANISMS_H_
#define SHUFFLE_PRIVACY_MECHANISMS_H_

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "absl/status/statusor.h"
#include "shuffle_privacy/channel.h"

namespace shuffle_privacy {

// Largest subset-selection alphabet that is built explicitly.
inline constexpr int64_t kMaxSubsetAlphabet = 2'000'000;

// Limits for expanding an orbit channel into a matrix.
inline constexpr int kMaxMaterializeD = 6;
inline constexpr int64_t kMaxMaterializeAlphabet = 100'000;

// Output labels are "0".."d-1".
absl::StatusOr<Channel> Grr(int d, double lambda);

// Cyclic half blocks A_x = {x, ..., x + d/2 - 1} mod d.
absl::StatusOr<Channel> HalfBlock(int d, double lambda);

// The input paired with `a` in the half-block construction.
inline int OppositeInput(int d, int a) { return (a + d / 2) % d; }

// GRR block on "0".."d-1" with mass p plus the null symbol "z".
absl::StatusOr<Channel> AugmentedGrr(int d, double p, double lambda);

struct MixtureBlock {
  double p = 1.0;
  double lambda = 2.0;
};

struct MixtureSpec {
  int d = 2;
  std::vector<MixtureBlock> blocks;
  std::vector<double> null_masses;
};

absl::Status ValidateMixtureSpec(const MixtureSpec& spec);

// Block i output y is labeled "b<i>:<y>", null symbol k is "z<k>".
absl::StatusOr<Channel> GrrMixture(const MixtureSpec& spec);

// Outputs are the s-subsets of [d] in lexicographic order, labeled "{0,2}".
absl::StatusOr<Channel> SubsetSelection(int d, int s, double lambda);

// Half-block channel on m informative outputs "h<y>" scaled by theta, plus
// d - m common outputs "c<k>" of mass (1 - theta) / (d - m). Input x uses the
// half-block row x mod m.
absl::StatusOr<Channel> Interpolated(int d, int m, double theta,
                                     double lambda);

struct OrbitTemplate {
  double mass = 1.0;
  std::vector<double> a;

  double A() const;  // sum 1 / a_x
  double B() const;  // sum a_x^2
  // B - d and A B - d^2, computed from t = a - 1 without cancellation.
  double ExcessB() const;
  double ExcessAB() const;
};

struct EquivariantChannel {
  int d = 2;
  std::vector<OrbitTemplate> orbits;
  double null_mass = 0.0;

  // Pairwise chi-square, identical for every pair.
  double Budget() const;
  double Signal() const;
};

// Checks the template sums and masses; templates are sorted descending.
absl::StatusOr<EquivariantChannel> OrbitChannel(
    int d, std::vector<OrbitTemplate> orbits, double null_mass);

// Number of distinct coordinate permutations of `a`.
int64_t OrbitSize(const std::vector<double>& a);

// Expands every orbit into its distinct permutations; W(y|x) = (p/m) a'_x.
// Orbit k, permutation j is labeled "o<k>:<level pattern>", null mass is "z".
absl::StatusOr<Channel> MaterializeOrbitChannel(const EquivariantChannel& ec);

// a = d (beta + eta e_1) with beta, eta the GRR constants at lambda.
OrbitTemplate GrrTemplate(int d, double lambda, double mass = 1.0);

// alpha on the first s coordinates, beta on the rest, alpha / beta = lambda.
OrbitTemplate TwoLevelTemplate(int d, int s, double lambda, double mass = 1.0);

struct GrrParams {
  int d = 2;
  double lambda = 2.0;
};
struct HalfBlockParams {
  int d = 2;
  double lambda = 2.0;
};
struct AugGrrParams {
  int d = 2;
  double p = 1.0;
  double lambda = 2.0;
};
struct SubsetParams {
  int d = 2;
  int s = 1;
  double lambda = 2.0;
};
struct InterpParams {
  int d = 2;
  int m = 2;
  double theta = 1.0;
  double lambda = 2.0;
};

using MechanismSpec =
    std::variant<GrrParams, HalfBlockParams, AugGrrParams, MixtureSpec,
                 SubsetParams, InterpParams, EquivariantChannel>;

std::string MechanismKind(const MechanismSpec& spec);
int MechanismD(const MechanismSpec& spec);

absl::StatusOr<Channel> BuildChannel(const MechanismSpec& spec);

}  // namespace shuffle_privacy

#endif  // SHUFFLE_PRIVACY_MECHANISMS_H_

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

#ifndef SHUFFLE_PRIVACY_DESIGN_FRONTIER_H_
#define SHUFFLE_PRIVACY_DESIGN_FRONTIER_H_

#include <functional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "shuffle_privacy/mechanisms.h"

namespace shuffle_privacy {

// Risks are reported as n * risk; divide by n for the absolute value.

// beta = 1/(lambda + d - 1), eta = (lambda - 1)/(lambda + d - 1).
double GrrBeta(int d, double lambda);
double GrrEta(int d, double lambda);

// C_lambda = (lambda - 1)^2 (lambda + 1) / (lambda (lambda + d - 1)).
absl::StatusOr<double> GrrBudget(int d, double lambda);

// C*(d) = C_{sqrt(d-1)}; needs d >= 3.
absl::StatusOr<double> CStar(int d);

// Solves budget(1 + h) = target for h > 0, given budget increasing in h.
// Bisection from the bracket (1e-9, 1), doubling the upper end as needed.
absl::StatusOr<double> SolveIncreasingBudget(
    const std::function<double(double)>& budget_of_h, double target);

// lambda(C) with C_{lambda(C)} = C.
absl::StatusOr<double> LambdaOfBudget(int d, double budget);

// (d-1)/d (1/S - 1).
double ProjectedRiskTimesN(int d, double signal);

struct FrontierPoint {
  double C = 0.0;
  double S = 0.0;
  double risk_times_n = 0.0;
  std::string mech_kind;  // "aug_grr" or "grr"
  double p = 1.0;
  double lambda = 1.0;
};

// Upper concave envelope: C/(d + 2 sqrt(d-1)) up to C*(d), eta_{lambda(C)}^2
// beyond.
absl::StatusOr<FrontierPoint> SOpt(int d, double budget);

struct OptRisk {
  double r_opt_times_n = 0.0;
  double r_grr_times_n = 0.0;
  double ratio = 1.0;
  double lambda_c = 1.0;
  bool low_budget = false;
};

absl::StatusOr<OptRisk> ComputeOptRisk(int d, double budget);

double MixtureBudget(const MixtureSpec& spec);
// sum p_i eta_{lambda_i}^2; ZeroSignal when no block carries mass.
absl::StatusOr<double> MixtureSignal(const MixtureSpec& spec);

struct ConcavityReport {
  double p_d = 0.0;
  double d2s_dc2 = 0.0;
  // lambda >= sqrt(d-1), where P_d <= 0 is guaranteed.
  bool in_range = false;
  bool holds = true;
};

ConcavityReport ConcavityCertificate(int d, double lambda);

struct TwoLevelSlope {
  double S = 0.0;
  double C = 0.0;
  double slope = 0.0;
  // Supremum over lambda > 1 for this s, where it sits, and whether a
  // finite lambda attains it (s < d/2).
  double max_slope = 0.0;
  double argmax_lambda = 1.0;
  bool attained = false;
};

absl::StatusOr<TwoLevelSlope> ComputeTwoLevelSlope(int d, int s,
                                                   double lambda);

// 1 / (d + 2 sqrt(d-1)).
double OrbitSlopeBound(int d);

// (B - d) / (A B - d^2) for one informative orbit.
absl::StatusOr<double> OrbitSlope(const OrbitTemplate& t);

// Subset selection closed forms.
absl::StatusOr<double> SsBudget(int d, int s, double lambda);
absl::StatusOr<double> SsRiskTimesN(int d, int s, double lambda);

struct SsInclusion {
  double p_s = 0.0;  // P_x(x in S)
  double r_s = 0.0;  // P_x(j in S), j != x
};
SsInclusion SsInclusionProbabilities(int d, int s, double lambda);

struct SsMatchedRow {
  int s = 1;
  double lambda_s = 1.0;
  double matched_risk_times_n = 0.0;
};

struct SsMatchedTable {
  std::vector<SsMatchedRow> rows;
  bool strictly_increasing = true;
};

absl::StatusOr<SsMatchedTable> SsMatchedRisk(int d, double budget);

// kappa_{d,s} / C_{d,s} = lambda / ((lambda + 1)(d + s(lambda - 1))).
absl::StatusOr<double> ThinnedSsRatio(int d, int s, double lambda);

struct ExploratoryCandidate {
  std::string shape;  // "ordered_pair" or "three_level"
  std::vector<double> levels;
  std::vector<int> multiplicities;
  double orbit_budget = 0.0;
  double orbit_signal = 0.0;
  // Signal after thinning to the requested budget.
  double signal_at_budget = 0.0;
};

struct ExploratoryScan {
  double budget = 0.0;
  double grr_signal = 0.0;
  std::vector<ExploratoryCandidate> best;
  std::string banner;
};

// Scans ordered-pair and three-level templates above C*(d). The scan makes no
// optimality claim.
absl::StatusOr<ExploratoryScan> ExploreHighBudget(int d, double budget,
                                                  int grid = 40,
                                                  int keep = 10);

}  // namespace shuffle_privacy

#endif  // SHUFFLE_PRIVACY_DESIGN_FRONTIER_H_

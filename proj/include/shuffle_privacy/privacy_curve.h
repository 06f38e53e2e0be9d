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

#ifndef SHUFFLE_PRIVACY_PRIVACY_CURVE_H_
#define SHUFFLE_PRIVACY_PRIVACY_CURVE_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "shuffle_privacy/channel.h"

namespace shuffle_privacy {

// Ceiling on the number of quotient compositions that are enumerated.
inline constexpr double kEnumerationGuard = 5e7;

// Berry-Esseen constant used by the Kolmogorov-distance certificate.
inline constexpr double kBerryEsseenConstant = 0.5600;

enum class CurveProvenance {
  kExactEnumeration,
  kClosedFormBinomial,
  kMonteCarlo,
  kUpperBound,
};

std::string ProvenanceName(CurveProvenance p);

// Canonical experiment: P has all n users on input a, Q moves one user to b.
// delta_fwd(eps) = E_P[(L - e^eps)_+], delta_rev(eps) = E_P[(1 - e^eps L)_+].
struct CurvePoint {
  double eps = 0.0;
  double delta_fwd = 0.0;
  double delta_rev = 0.0;
  double two_sided() const { return delta_fwd > delta_rev ? delta_fwd
                                                          : delta_rev; }
};

struct PrivacyCurve {
  std::vector<CurvePoint> points;
  int64_t n = 0;
  CurveProvenance provenance = CurveProvenance::kExactEnumeration;
};

// Geometric in e^eps - 1 over [1e-3, lambda].
std::vector<double> DefaultEpsGrid(double lambda, int points = 64);

// C(n + k - 1, k - 1) as a double.
double CompositionCount(int64_t n, int k);

absl::StatusOr<PrivacyCurve> PrivacyCurveExact(const LrLaw& law, int64_t n,
                                               std::span<const double> eps);

// Binomial closed form for the law {1/lambda: lambda/(1+lambda),
// lambda: 1/(1+lambda)}.
absl::StatusOr<PrivacyCurve> PrivacyCurveTwoAtom(double lambda, int64_t n,
                                                 std::span<const double> eps);

absl::StatusOr<double> GdpDelta(double mu, double eps);

// sqrt(I / n).
double GdpScale(double chi2, int64_t n);

struct DilutionBounds {
  double fwd = 0.0;
  double rev = 0.0;
};

absl::StatusOr<DilutionBounds> Dilution(double i_star, int64_t n, double eps);

// Kolmogorov distance bound C_BE (lambda - 1) / sqrt(n I) for the null score.
absl::StatusOr<double> BeCertificate(double lambda, int64_t n, double chi2);

struct FamilyRow {
  int d = 0;
  double i_star = 0.0;
  int a = 0;
  int b = 1;
};

// Worst-pair chi-square along a finite list of d. `log_slope` is the least
// squares slope of log I* against log d; it describes only the listed d.
struct FamilyDiagnostic {
  std::vector<FamilyRow> rows;
  double log_slope = 0.0;
  std::string note;
};

absl::StatusOr<FamilyDiagnostic> RunFamilyDiagnostic(
    const std::function<absl::StatusOr<Channel>(int)>& family,
    std::span<const int> d_list);

}  // namespace shuffle_privacy

#endif  // SHUFFLE_PRIVACY_PRIVACY_CURVE_H_

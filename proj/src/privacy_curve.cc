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

#include "shuffle_privacy/privacy_curve.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "absl/strings/str_cat.h"
#include "shuffle_privacy/numeric.h"
#include "shuffle_privacy/parallel.h"
#include "shuffle_privacy/status_macros.h"

namespace shuffle_privacy {
namespace {

absl::Status CheckGrid(std::span<const double> eps) {
  for (double e : eps) {
    if (!(e >= 0.0) || !std::isfinite(e)) {
      return absl::InvalidArgumentError(
          absl::StrCat("BadEps: grid point ", e, " is not a finite eps >= 0"));
    }
  }
  return absl::OkStatus();
}

// Grid indices sorted by eps, with e^eps cached in that order.
struct SortedGrid {
  std::vector<size_t> order;
  std::vector<double> exp_eps;

  explicit SortedGrid(std::span<const double> eps) : order(eps.size()) {
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t u, size_t v) { return eps[u] < eps[v]; });
    exp_eps.reserve(eps.size());
    for (size_t i : order) exp_eps.push_back(std::exp(eps[i]));
  }
};

// Per-grid-point accumulators in sorted grid order.
struct DeltaSums {
  std::vector<CompensatedSum> fwd;
  std::vector<CompensatedSum> rev;

  explicit DeltaSums(size_t g) : fwd(g), rev(g) {}

  void AddAtom(const SortedGrid& grid, double mass, double lr) {
    for (size_t i = 0; i < grid.exp_eps.size(); ++i) {
      const double t = grid.exp_eps[i];
      const double f = lr - t;
      const double r = 1.0 - t * lr;
      if (f <= 0.0 && r <= 0.0) break;
      if (f > 0.0) fwd[i].Add(mass * f);
      if (r > 0.0) rev[i].Add(mass * r);
    }
  }

  void Merge(const DeltaSums& other) {
    for (size_t i = 0; i < fwd.size(); ++i) {
      fwd[i].Add(other.fwd[i]);
      rev[i].Add(other.rev[i]);
    }
  }
};

PrivacyCurve Finish(const SortedGrid& grid, std::span<const double> eps,
                    const DeltaSums& sums, int64_t n,
                    CurveProvenance provenance) {
  PrivacyCurve curve;
  curve.n = n;
  curve.provenance = provenance;
  curve.points.resize(eps.size());
  for (size_t i = 0; i < grid.order.size(); ++i) {
    CurvePoint& pt = curve.points[grid.order[i]];
    pt.eps = eps[grid.order[i]];
    pt.delta_fwd = std::clamp(sums.fwd[i].value(), 0.0, 1.0);
    pt.delta_rev = std::clamp(sums.rev[i].value(), 0.0, 1.0);
  }
  return curve;
}

// Enumerates compositions of `remaining` into atoms [j, k) and feeds each
// leaf to `sums`.
class CompositionWalker {
 public:
  CompositionWalker(const LrLaw& law, int64_t n, const SortedGrid& grid,
                    const std::vector<double>& log_factorial)
      : law_(law), n_(n), grid_(grid), log_factorial_(log_factorial) {
    log_p_.reserve(law.atoms.size());
    for (const auto& atom : law.atoms) {
      log_p_.push_back(atom.mass > 0.0
                           ? std::log(atom.mass)
                           : -std::numeric_limits<double>::infinity());
    }
  }

  // Fixes the count on atom 0 and enumerates the rest.
  void RunWithFirst(int64_t m0, DeltaSums& sums) const {
    const int k = static_cast<int>(law_.atoms.size());
    if (k == 1 && m0 != n_) return;
    double log_mass = log_factorial_[n_] - log_factorial_[m0];
    if (m0 > 0) log_mass += m0 * log_p_[0];
    Walk(1, n_ - m0, log_mass, law_.atoms[0].ratio * m0, sums);
  }

 private:
  void Walk(int j, int64_t remaining, double log_mass, double weighted,
            DeltaSums& sums) const {
    const int k = static_cast<int>(law_.atoms.size());
    if (j == k) {
      if (remaining != 0) return;
      if (log_mass == -std::numeric_limits<double>::infinity()) return;
      sums.AddAtom(grid_, std::exp(log_mass),
                   weighted / static_cast<double>(n_));
      return;
    }
    if (j == k - 1) {
      double lm = log_mass - log_factorial_[remaining];
      if (remaining > 0) lm += remaining * log_p_[j];
      Walk(k, 0, lm, weighted + law_.atoms[j].ratio * remaining, sums);
      return;
    }
    for (int64_t m = 0; m <= remaining; ++m) {
      double lm = log_mass - log_factorial_[m];
      if (m > 0) lm += m * log_p_[j];
      Walk(j + 1, remaining - m, lm, weighted + law_.atoms[j].ratio * m,
           sums);
    }
  }

  const LrLaw& law_;
  int64_t n_;
  const SortedGrid& grid_;
  const std::vector<double>& log_factorial_;
  std::vector<double> log_p_;
};

}  // namespace

std::string ProvenanceName(CurveProvenance p) {
  switch (p) {
    case CurveProvenance::kExactEnumeration:
      return "exact_enumeration";
    case CurveProvenance::kClosedFormBinomial:
      return "closed_form_binomial";
    case CurveProvenance::kMonteCarlo:
      return "monte_carlo";
    case CurveProvenance::kUpperBound:
      return "upper_bound";
  }
  return "unknown";
}

std::vector<double> DefaultEpsGrid(double lambda, int points) {
  const double lo = 1e-3;
  const double hi = std::max(lambda, 2e-3);
  std::vector<double> grid;
  grid.reserve(points);
  for (int i = 0; i < points; ++i) {
    const double frac = points > 1 ? static_cast<double>(i) / (points - 1) : 0;
    const double u = lo * std::pow(hi / lo, frac);
    grid.push_back(std::log1p(u));
  }
  return grid;
}

double CompositionCount(int64_t n, int k) {
  if (k <= 1) return 1.0;
  return std::exp(LogFactorial(n + k - 1) - LogFactorial(k - 1) -
                  LogFactorial(n));
}

absl::StatusOr<PrivacyCurve> PrivacyCurveExact(const LrLaw& law, int64_t n,
                                               std::span<const double> eps) {
  if (n < 1) {
    return absl::InvalidArgumentError(absl::StrCat("BadN: n = ", n));
  }
  if (law.atoms.empty()) {
    return absl::InvalidArgumentError("InvalidLaw: no atoms");
  }
  CompensatedSum mass;
  for (const LrAtom& atom : law.atoms) {
    if (!(atom.mass >= 0.0) || !(atom.ratio > 0.0)) {
      return absl::InvalidArgumentError(
          "InvalidLaw: atoms need positive ratios and nonnegative masses");
    }
    mass.Add(atom.mass);
  }
  if (std::abs(mass.value() - 1.0) > 1e-12 ||
      std::abs(law.Mean() - 1.0) > 1e-10) {
    return absl::InvalidArgumentError(absl::StrCat(
        "InvalidLaw: masses sum to ", mass.value(), ", mean ", law.Mean()));
  }
  SP_RETURN_IF_ERROR(CheckGrid(eps));
  const int k = static_cast<int>(law.atoms.size());
  const double count = CompositionCount(n, k);
  if (count > kEnumerationGuard) {
    return absl::ResourceExhaustedError(absl::StrCat(
        "EnumerationTooLarge: ", count, " compositions of n = ", n, " into ",
        k, " atoms exceed ", kEnumerationGuard));
  }
  std::vector<double> log_factorial(n + 1);
  for (int64_t i = 0; i <= n; ++i) log_factorial[i] = LogFactorial(i);

  const SortedGrid grid(eps);
  const CompositionWalker walker(law, n, grid, log_factorial);
  std::vector<DeltaSums> partial(n + 1, DeltaSums(eps.size()));
  ParallelFor(n + 1, [&](int64_t m0) { walker.RunWithFirst(m0, partial[m0]); });
  DeltaSums total(eps.size());
  for (const auto& p : partial) total.Merge(p);
  return Finish(grid, eps, total, n, CurveProvenance::kExactEnumeration);
}

absl::StatusOr<PrivacyCurve> PrivacyCurveTwoAtom(double lambda, int64_t n,
                                                 std::span<const double> eps) {
  if (!(lambda > 1.0) || !std::isfinite(lambda)) {
    return absl::InvalidArgumentError(
        absl::StrCat("BadLambda: need lambda > 1, got ", lambda));
  }
  if (n < 1) {
    return absl::InvalidArgumentError(absl::StrCat("BadN: n = ", n));
  }
  SP_RETURN_IF_ERROR(CheckGrid(eps));
  const SortedGrid grid(eps);
  const double log_q = -std::log1p(lambda);
  const double log_1mq = std::log(lambda) - std::log1p(lambda);
  const double spread = lambda - 1.0 / lambda;
  DeltaSums sums(eps.size());
  for (int64_t k = 0; k <= n; ++k) {
    const double log_pmf = LogFactorial(n) - LogFactorial(k) -
                           LogFactorial(n - k) + k * log_q +
                           (n - k) * log_1mq;
    const double lr =
        1.0 / lambda + static_cast<double>(k) / static_cast<double>(n) * spread;
    sums.AddAtom(grid, std::exp(log_pmf), lr);
  }
  return Finish(grid, eps, sums, n, CurveProvenance::kClosedFormBinomial);
}

absl::StatusOr<double> GdpDelta(double mu, double eps) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    return absl::InvalidArgumentError(
        absl::StrCat("BadMu: need mu > 0, got ", mu));
  }
  if (!(eps >= 0.0)) {
    return absl::InvalidArgumentError(absl::StrCat("BadEps: eps = ", eps));
  }
  const double delta = NormalCdf(-eps / mu + mu / 2.0) -
                       std::exp(eps) * NormalCdf(-eps / mu - mu / 2.0);
  return std::max(0.0, delta);
}

double GdpScale(double chi2, int64_t n) {
  return std::sqrt(std::max(0.0, chi2) / static_cast<double>(n));
}

absl::StatusOr<DilutionBounds> Dilution(double i_star, int64_t n, double eps) {
  if (!(eps > 0.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("BadEps: need eps > 0, got ", eps));
  }
  const double nn = static_cast<double>(n);
  DilutionBounds b;
  b.fwd = std::clamp(i_star / (nn * std::expm1(eps)), 0.0, 1.0);
  b.rev = std::clamp(std::exp(eps) * i_star / (nn * -std::expm1(-eps)), 0.0,
                     1.0);
  return b;
}

absl::StatusOr<double> BeCertificate(double lambda, int64_t n, double chi2) {
  if (!(chi2 > 0.0)) {
    return absl::InvalidArgumentError(
        "ZeroInformation: the certificate needs I > 0");
  }
  return kBerryEsseenConstant * (lambda - 1.0) /
         std::sqrt(static_cast<double>(n) * chi2);
}

absl::StatusOr<FamilyDiagnostic> RunFamilyDiagnostic(
    const std::function<absl::StatusOr<Channel>(int)>& family,
    std::span<const int> d_list) {
  FamilyDiagnostic out;
  std::vector<double> xs;
  std::vector<double> ys;
  for (int d : d_list) {
    SP_ASSIGN_OR_RETURN(Channel ch, family(d));
    const WorstPair w = FindWorstPair(ch);
    out.rows.push_back({d, w.chi2, w.a, w.b});
    if (w.chi2 > 0.0) {
      xs.push_back(std::log(static_cast<double>(d)));
      ys.push_back(std::log(w.chi2));
    }
  }
  if (xs.size() >= 2) {
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double sxy = 0.0;
    double sxx = 0.0;
    for (size_t i = 0; i < xs.size(); ++i) {
      sxy += (xs[i] - mx) * (ys[i] - my);
      sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    out.log_slope = sxx > 0.0 ? sxy / sxx : 0.0;
  }
  out.note =
      "finite-d diagnostic: slope of log I* vs log d over the listed d only; "
      "no statement about d -> infinity";
  return out;
}

}  // namespace shuffle_privacy

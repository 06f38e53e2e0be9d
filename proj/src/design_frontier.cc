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

#include "shuffle_privacy/design_frontier.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "absl/strings/str_cat.h"
#include "shuffle_privacy/numeric.h"
#include "shuffle_privacy/status_macros.h"

namespace shuffle_privacy {
namespace {

constexpr int kMaxBisection = 200;

absl::Status BadParams(absl::string_view what) {
  return absl::InvalidArgumentError(absl::StrCat("BadParams: ", what));
}

absl::Status CheckDLambda(int d, double lambda) {
  if (d < 2) return BadParams(absl::StrCat("need d >= 2, got ", d));
  if (!(lambda > 1.0) || !std::isfinite(lambda)) {
    return BadParams(absl::StrCat("need lambda > 1, got ", lambda));
  }
  return absl::OkStatus();
}

absl::Status CheckDS(int d, int s) {
  if (s < 1 || s > d - 1) {
    return BadParams(absl::StrCat("need 1 <= s <= d - 1, got s = ", s));
  }
  return absl::OkStatus();
}

absl::Status CheckBudget(double budget) {
  if (!(budget > 0.0) || !std::isfinite(budget)) {
    return BadParams(absl::StrCat("need a budget C > 0, got ", budget));
  }
  return absl::OkStatus();
}

// Budgets as functions of h = lambda - 1, which keeps full relative precision
// for small budgets.
double GrrBudgetOfH(int d, double h) {
  return h * h * (h + 2.0) / ((1.0 + h) * (h + d));
}

double SsBudgetOfH(int d, int s, double h) {
  return s * (d - s) * h * h * (h + 2.0) /
         ((1.0 + h) * (d - 1.0) * (d + s * h));
}

}  // namespace

double GrrBeta(int d, double lambda) { return 1.0 / (lambda + d - 1.0); }

double GrrEta(int d, double lambda) {
  return (lambda - 1.0) / (lambda + d - 1.0);
}

absl::StatusOr<double> GrrBudget(int d, double lambda) {
  SP_RETURN_IF_ERROR(CheckDLambda(d, lambda));
  return (lambda - 1.0) * (lambda - 1.0) * (lambda + 1.0) /
         (lambda * (lambda + d - 1.0));
}

absl::StatusOr<double> CStar(int d) {
  if (d < 3) {
    return absl::InvalidArgumentError(absl::StrCat(
        "DTooSmall: C*(d) needs d >= 3 (C*(2) = 0), got d = ", d));
  }
  return GrrBudget(d, std::sqrt(d - 1.0));
}

absl::StatusOr<double> SolveIncreasingBudget(
    const std::function<double(double)>& budget_of_h, double target) {
  SP_RETURN_IF_ERROR(CheckBudget(target));
  double lo = 1e-9;
  double hi = 1.0;
  if (budget_of_h(lo) > target) lo = 0.0;
  while (budget_of_h(hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) {
      return absl::InternalError("NoConvergence: bracket overflow");
    }
  }
  double best = hi;
  for (int it = 0; it < kMaxBisection; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket is down to one ulp
    const double value = budget_of_h(mid);
    best = mid;
    if (std::abs(value - target) <= 1e-13 * target) break;
    if (value < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (std::abs(budget_of_h(lo) - target) <
      std::abs(budget_of_h(best) - target)) {
    best = lo;
  }
  if (std::abs(budget_of_h(hi) - target) <
      std::abs(budget_of_h(best) - target)) {
    best = hi;
  }
  const double mid = best;
  const double residual = std::abs(budget_of_h(mid) - target);
  if (residual > 1e-12 * std::max(target, 1.0)) {
    return absl::InternalError(absl::StrCat(
        "NoConvergence: residual ", residual, " after bisection"));
  }
  return mid;
}

absl::StatusOr<double> LambdaOfBudget(int d, double budget) {
  if (d < 2) return BadParams(absl::StrCat("need d >= 2, got ", d));
  SP_ASSIGN_OR_RETURN(
      double h, SolveIncreasingBudget(
                    [d](double x) { return GrrBudgetOfH(d, x); }, budget));
  return 1.0 + h;
}

double ProjectedRiskTimesN(int d, double signal) {
  return (d - 1.0) / d * (1.0 / signal - 1.0);
}

absl::StatusOr<FrontierPoint> SOpt(int d, double budget) {
  SP_RETURN_IF_ERROR(CheckBudget(budget));
  SP_ASSIGN_OR_RETURN(double c_star, CStar(d));
  FrontierPoint pt;
  pt.C = budget;
  if (budget <= c_star) {
    pt.S = budget / (d + 2.0 * std::sqrt(d - 1.0));
    pt.mech_kind = "aug_grr";
    pt.p = budget / c_star;
    pt.lambda = std::sqrt(d - 1.0);
  } else {
    SP_ASSIGN_OR_RETURN(pt.lambda, LambdaOfBudget(d, budget));
    const double eta = GrrEta(d, pt.lambda);
    pt.S = eta * eta;
    pt.mech_kind = "grr";
    pt.p = 1.0;
  }
  pt.risk_times_n = ProjectedRiskTimesN(d, pt.S);
  return pt;
}

absl::StatusOr<OptRisk> ComputeOptRisk(int d, double budget) {
  SP_ASSIGN_OR_RETURN(FrontierPoint pt, SOpt(d, budget));
  SP_ASSIGN_OR_RETURN(double lam, LambdaOfBudget(d, budget));
  OptRisk out;
  out.lambda_c = lam;
  out.low_budget = pt.mech_kind == "aug_grr";
  const double grr_coef = d + lam + (d - 1.0) / lam;
  out.r_grr_times_n = (d - 1.0) / d * (grr_coef / budget - 1.0);
  if (out.low_budget) {
    const double opt_coef = d + 2.0 * std::sqrt(d - 1.0);
    out.r_opt_times_n = (d - 1.0) / d * (opt_coef / budget - 1.0);
    out.ratio = (opt_coef - budget) / (grr_coef - budget);
  } else {
    out.r_opt_times_n = pt.risk_times_n;
    out.ratio = out.r_opt_times_n / out.r_grr_times_n;
  }
  return out;
}

double MixtureBudget(const MixtureSpec& spec) {
  CompensatedSum s;
  for (const auto& b : spec.blocks) {
    s.Add(b.p * GrrBudgetOfH(spec.d, b.lambda - 1.0));
  }
  return s.value();
}

absl::StatusOr<double> MixtureSignal(const MixtureSpec& spec) {
  CompensatedSum s;
  for (const auto& b : spec.blocks) {
    const double eta = GrrEta(spec.d, b.lambda);
    s.Add(b.p * eta * eta);
  }
  if (!(s.value() > 0.0)) {
    return absl::FailedPreconditionError(
        "ZeroSignal: no GRR block carries mass");
  }
  return s.value();
}

ConcavityReport ConcavityCertificate(int d, double lambda) {
  const double l = lambda;
  const double dd = d;
  ConcavityReport r;
  r.p_d = dd * dd * l + 2 * dd * dd - 3 * dd * l * l * l + dd * l - 4 * dd -
          2 * l * l * l * l + 2 * l * l * l - 2 * l + 2;
  const double den = 2 * dd * l * l + dd * l + dd + l * l * l - l * l + l - 1;
  r.d2s_dc2 = 2 * dd * l * l * l * r.p_d / ((l - 1) * den * den * den);
  r.in_range = lambda >= std::sqrt(dd - 1.0);
  r.holds = !r.in_range || r.p_d <= 0.0;
  return r;
}

absl::StatusOr<TwoLevelSlope> ComputeTwoLevelSlope(int d, int s,
                                                   double lambda) {
  SP_RETURN_IF_ERROR(CheckDLambda(d, lambda));
  SP_RETURN_IF_ERROR(CheckDS(d, s));
  const double h = lambda - 1.0;
  const double den = d + s * h;
  TwoLevelSlope out;
  out.S = s * (d - s) * h * h / ((d - 1.0) * den * den);
  out.C = SsBudgetOfH(d, s, h);
  out.slope = lambda / ((lambda + 1.0) * den);
  if (2 * s < d) {
    out.max_slope = 1.0 / (d + 2.0 * std::sqrt(static_cast<double>(s) * (d - s)));
    out.argmax_lambda = std::sqrt(static_cast<double>(d - s) / s);
    out.attained = true;
  } else {
    out.max_slope = 1.0 / (2.0 * d);
    out.argmax_lambda = 1.0;
    out.attained = false;
  }
  return out;
}

double OrbitSlopeBound(int d) { return 1.0 / (d + 2.0 * std::sqrt(d - 1.0)); }

absl::StatusOr<double> OrbitSlope(const OrbitTemplate& t) {
  const double eb = t.ExcessB();
  if (!(eb > 1e-13 * static_cast<double>(t.a.size()))) {
    return absl::InvalidArgumentError(
        "NeutralOrbit: template carries no signal (B = d)");
  }
  return eb / t.ExcessAB();
}

absl::StatusOr<double> SsBudget(int d, int s, double lambda) {
  SP_RETURN_IF_ERROR(CheckDLambda(d, lambda));
  SP_RETURN_IF_ERROR(CheckDS(d, s));
  return SsBudgetOfH(d, s, lambda - 1.0);
}

absl::StatusOr<double> SsRiskTimesN(int d, int s, double lambda) {
  SP_RETURN_IF_ERROR(CheckDLambda(d, lambda));
  SP_RETURN_IF_ERROR(CheckDS(d, s));
  const double l = lambda;
  const double num = l * l * s * (s - 1.0) + 2.0 * l * s * (d - s) +
                     (d - s) * (d - s - 1.0);
  return (d - 1.0) * num / (s * (d - s) * (l - 1.0) * (l - 1.0));
}

SsInclusion SsInclusionProbabilities(int d, int s, double lambda) {
  const double den = d + s * (lambda - 1.0);
  SsInclusion out;
  out.p_s = lambda * s / den;
  out.r_s = s * (lambda * (s - 1.0) + d - s) / ((d - 1.0) * den);
  return out;
}

absl::StatusOr<SsMatchedTable> SsMatchedRisk(int d, double budget) {
  if (d < 2) return BadParams(absl::StrCat("need d >= 2, got ", d));
  SP_RETURN_IF_ERROR(CheckBudget(budget));
  SsMatchedTable table;
  for (int s = 1; s <= d - 1; ++s) {
    SP_ASSIGN_OR_RETURN(
        double h, SolveIncreasingBudget(
                      [d, s](double x) { return SsBudgetOfH(d, s, x); },
                      budget));
    const double l = 1.0 + h;
    SsMatchedRow row;
    row.s = s;
    row.lambda_s = l;
    row.matched_risk_times_n =
        (d - 1.0) / (d * budget) * ((l + 1.0) * (d + s * h) / l - budget);
    if (!table.rows.empty() &&
        !(row.matched_risk_times_n > table.rows.back().matched_risk_times_n)) {
      table.strictly_increasing = false;
    }
    table.rows.push_back(row);
  }
  return table;
}

absl::StatusOr<double> ThinnedSsRatio(int d, int s, double lambda) {
  SP_RETURN_IF_ERROR(CheckDLambda(d, lambda));
  SP_RETURN_IF_ERROR(CheckDS(d, s));
  return lambda / ((lambda + 1.0) * (d + s * (lambda - 1.0)));
}

absl::StatusOr<ExploratoryScan> ExploreHighBudget(int d, double budget,
                                                  int grid, int keep) {
  SP_ASSIGN_OR_RETURN(double c_star, CStar(d));
  SP_RETURN_IF_ERROR(CheckBudget(budget));
  if (budget <= c_star) {
    return BadParams(absl::StrCat("exploration is for C > C*(d) = ", c_star));
  }
  ExploratoryScan scan;
  scan.budget = budget;
  scan.banner =
      "NO-OPTIMALITY: exploratory scan of ordered-pair and three-level "
      "templates above C*(d); the symmetric frontier in this range is open "
      "and nothing here is an optimality claim";
  SP_ASSIGN_OR_RETURN(double lam, LambdaOfBudget(d, budget));
  scan.grr_signal = GrrEta(d, lam) * GrrEta(d, lam);

  std::vector<ExploratoryCandidate> all;
  std::set<std::vector<int64_t>> seen;
  for (int k1 = 1; k1 <= d - 2; ++k1) {
    for (int k2 = 1; k1 + k2 <= d - 1; ++k2) {
      const int k3 = d - k1 - k2;
      for (int i = 1; i < grid; ++i) {
        for (int j = 1; j < grid; ++j) {
          const double u = d / static_cast<double>(k1) * i / grid;
          const double v = d / static_cast<double>(k2) * j / grid;
          const double w = (d - k1 * u - k2 * v) / k3;
          if (!(w > 0.0)) continue;
          OrbitTemplate t;
          t.a.insert(t.a.end(), k1, u);
          t.a.insert(t.a.end(), k2, v);
          t.a.insert(t.a.end(), k3, w);
          const double eb = t.ExcessB();
          if (!(eb > 1e-12)) continue;
          // Skip relabelings of a template already seen.
          std::vector<int64_t> key;
          for (double x : t.a) key.push_back(std::llround(x * 1e9));
          std::sort(key.begin(), key.end());
          if (!seen.insert(std::move(key)).second) continue;
          ExploratoryCandidate c;
          c.shape = (k1 == 1 && k2 == 1) ? "ordered_pair" : "three_level";
          c.levels = {u, v, w};
          c.multiplicities = {k1, k2, k3};
          c.orbit_budget = t.ExcessAB() / (d * (d - 1.0));
          c.orbit_signal = eb / (d * (d - 1.0));
          if (c.orbit_budget < budget) continue;
          c.signal_at_budget = budget / c.orbit_budget * c.orbit_signal;
          all.push_back(std::move(c));
        }
      }
    }
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const ExploratoryCandidate& x,
                      const ExploratoryCandidate& y) {
                     return x.signal_at_budget > y.signal_at_budget;
                   });
  if (static_cast<int>(all.size()) > keep) all.resize(keep);
  scan.best = std::move(all);
  return scan;
}

}  // namespace shuffle_privacy

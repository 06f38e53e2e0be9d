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

// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all
// criteria pass (including their runtime limits).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "shuffle_privacy/channel.h"
#include "shuffle_privacy/design_frontier.h"
#include "shuffle_privacy/estimation_bounds.h"
#include "shuffle_privacy/mechanisms.h"
#include "shuffle_privacy/privacy_curve.h"
#include "shuffle_privacy/shuffle_sim.h"
#include "testing/test_support.h"

namespace shuffle_privacy {
namespace {

using ::shuffle_privacy::testing::RandomLdpChannel;
using ::shuffle_privacy::testing::RandomMixtureSpec;
using ::shuffle_privacy::testing::RandomTemplate;

// Collects failed checks; the detail string is printed next to the verdict.
class Check {
 public:
  struct Abandoned {};

  void Expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  // |got - want| <= tol.
  void Near(double got, double want, double tol, const std::string& what) {
    Expect(std::abs(got - want) <= tol,
           absl::StrFormat("%s: got %.17g want %.17g (tol %g)", what, got,
                           want, tol));
  }
  // An error status fails the criterion and abandons the rest of its run.
  template <typename T>
  T Value(absl::StatusOr<T> s, const std::string& what) {
    if (!s.ok()) {
      Expect(false, what + ": " + std::string(s.status().message()));
      throw Abandoned();
    }
    return *std::move(s);
  }
  void Note(std::string s) { notes_.push_back(std::move(s)); }

  bool ok() const { return failed_ == 0; }
  std::string Summary() const {
    std::string out = absl::StrCat(checks_, " checks");
    for (const std::string& n : notes_) absl::StrAppend(&out, "; ", n);
    if (failed_ > 0) {
      absl::StrAppend(&out, "; ", failed_, " failed");
      for (const std::string& f : failures_) absl::StrAppend(&out, "\n    ", f);
    }
    return out;
  }

 private:
  int64_t checks_ = 0;
  int64_t failed_ = 0;
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

double Rel(double x) { return std::max(1.0, std::abs(x)); }

// ------------------------------------------------------------------ 1

void ExampleReproduction(Check& c) {
  const double c3 = c.Value(CStar(3), "C*(3)");
  c.Near(c3, (3.0 - 2.0 * std::sqrt(2.0)) / 2.0, 1e-12, "C*(3)");
  const FrontierPoint p3 = c.Value(SOpt(3, 0.05), "S_opt(3)");
  c.Near(p3.p, 0.582843, 1e-6, "p(d=3)");
  const OptRisk r3 = c.Value(ComputeOptRisk(3, 0.05), "risk(3)");
  c.Near(r3.r_opt_times_n, 77.0457, 1e-3 * 77.0457, "n R_opt(d=3)");
  c.Near(r3.r_grr_times_n, 77.1653, 1e-3 * 77.1653, "n R_grr(d=3)");

  const double c10 = c.Value(CStar(10), "C*(10)");
  c.Near(c10, 4.0 / 9.0, 1e-12, "C*(10)");
  const FrontierPoint p10 = c.Value(SOpt(10, 0.1), "S_opt(10)");
  c.Near(p10.p, 0.225, 1e-12, "p(d=10)");
  const OptRisk r10 = c.Value(ComputeOptRisk(10, 0.1), "risk(10)");
  // Closed form (d-1)/d (1/S - 1) with S = C / (d + 2 sqrt(d-1)) = 0.1 / 16.
  c.Near(r10.r_opt_times_n, 0.9 * (160.0 - 1.0), 1e-10, "n R_opt(d=10)");
  c.Near(r10.r_opt_times_n, 143.1, 1e-10, "n R_opt(d=10) vs 143.1");
  c.Near(r10.r_grr_times_n, 149.7150, 1e-3 * 149.7150, "n R_grr(d=10)");
  c.Note(absl::StrFormat("n R_opt = %.6f, %.6f", r3.r_opt_times_n,
                         r10.r_opt_times_n));
}

// ------------------------------------------------------------------ 2

void ObstructionIdentity(Check& c) {
  double worst = 0.0;
  for (double lambda : {2.0, std::numbers::e}) {
    const std::vector<double> grid = DefaultEpsGrid(lambda, 64);
    for (int64_t n : {1, 10, 100}) {
      const PrivacyCurve closed =
          c.Value(PrivacyCurveTwoAtom(lambda, n, grid), "two-atom curve");
      for (int d : {4, 8, 16}) {
        const Channel ch = c.Value(HalfBlock(d, lambda), "half_block");
        const LrLaw law = c.Value(PairwiseLrLaw(ch, 0, d / 2), "law");
        const PrivacyCurve exact =
            c.Value(PrivacyCurveExact(law, n, grid), "exact curve");
        c.Expect(exact.points.size() == 64 && closed.points.size() == 64,
                 "64-point grid");
        for (size_t i = 0; i < exact.points.size(); ++i) {
          const double df =
              std::abs(exact.points[i].delta_fwd - closed.points[i].delta_fwd);
          const double dr =
              std::abs(exact.points[i].delta_rev - closed.points[i].delta_rev);
          worst = std::max({worst, df, dr});
          c.Expect(df <= 1e-12 && dr <= 1e-12,
                   absl::StrCat("d=", d, " n=", n, " point ", i));
        }
      }
    }
  }
  c.Note(absl::StrFormat("max |diff| %.2e", worst));
}

// ------------------------------------------------------------------ 3

void SufficiencyOracleCheck(Check& c) {
  std::mt19937_64 rng(3);
  double worst = 0.0;
  int64_t histograms = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int d = 2 + trial % 4;
    const int k = d + static_cast<int>(rng() % 3);
    const int64_t n = 1 + trial % 5;
    const Channel ch = RandomLdpChannel(rng, d, k);
    const double lambda = std::exp(LdpParameter(ch));
    const std::vector<double> grid = DefaultEpsGrid(lambda, 64);
    const int b = 1 + static_cast<int>(rng() % (d - 1));
    const OracleReport r =
        c.Value(SufficiencyOracle(ch, 0, b, n, grid, 1e-12), "oracle");
    c.Expect(r.equal, absl::StrCat("trial ", trial, " diff ", r.max_abs_diff));
    worst = std::max(worst, r.max_abs_diff);
    histograms += r.histograms;
  }
  c.Note(absl::StrFormat("max |diff| %.2e over %d histograms", worst,
                         histograms));
}

// ------------------------------------------------------------------ 4

void UniversalBoundCheck(Check& c) {
  std::mt19937_64 rng(4);
  double min_gap = 1e300;
  for (int trial = 0; trial < 10000; ++trial) {
    const int d = 2 + static_cast<int>(rng() % 5);
    const int k = 2 + static_cast<int>(rng() % 7);
    const Channel ch = RandomLdpChannel(rng, d, k, 0.5 + trial % 4);
    const double bound =
        c.Value(UniversalBound(std::exp(LdpParameter(ch))), "bound");
    const double chi = ChiStar(ch);
    c.Expect(chi <= bound + 1e-12, absl::StrCat("channel ", trial));
    min_gap = std::min(min_gap, bound - chi);
  }
  for (int d : {4, 8, 16}) {
    for (double lambda : {2.0, std::numbers::e, 7.0}) {
      const Channel ch = c.Value(HalfBlock(d, lambda), "half_block");
      const LrLaw law = c.Value(PairwiseLrLaw(ch, 0, d / 2), "law");
      c.Near(law.Chi2(), (lambda - 1) * (lambda - 1) / lambda, 1e-12,
             "half-block chi2");
      c.Expect(IsExtremal(law, lambda).extremal, "half-block is extremal");
    }
  }
  for (int d = 3; d <= 12; ++d) {
    const Channel ch = c.Value(Grr(d, 3.0), "grr");
    const LrLaw law = c.Value(PairwiseLrLaw(ch, 0, 1), "law");
    c.Expect(!IsExtremal(law, 3.0).extremal, "GRR is not extremal");
  }
  c.Note(absl::StrFormat("min gap %.3g", min_gap));
}

// ------------------------------------------------------------------ 5

void FrontierDominance(Check& c) {
  std::mt19937_64 rng(5);
  double worst = -1e300;
  for (int d : {3, 5, 10}) {
    for (int trial = 0; trial < 10000; ++trial) {
      const MixtureSpec spec = RandomMixtureSpec(rng, d);
      const double budget = MixtureBudget(spec);
      const double s = c.Value(MixtureSignal(spec), "signal");
      const FrontierPoint pt = c.Value(SOpt(d, budget), "S_opt");
      c.Expect(s <= pt.S + 1e-12, absl::StrCat("d=", d, " trial ", trial));
      worst = std::max(worst, s - pt.S);
    }
  }
  for (int d = 3; d <= 50; ++d) {
    const double cs = c.Value(CStar(d), "C*");
    const FrontierPoint lo = c.Value(SOpt(d, cs * (1 - 1e-13)), "below");
    const FrontierPoint hi = c.Value(SOpt(d, cs * (1 + 1e-13)), "above");
    c.Near(lo.S, hi.S, 1e-10, absl::StrCat("knee d=", d));
  }
  int64_t grid_points = 0;
  for (int d = 3; d <= 100; ++d) {
    const double l0 = std::sqrt(d - 1.0);
    for (int i = 0; i <= 2000; ++i) {
      const double lambda = l0 * std::pow(1e3, i / 2000.0);
      const ConcavityReport r = ConcavityCertificate(d, lambda);
      c.Expect(r.in_range && r.p_d <= 0.0,
               absl::StrFormat("P_%d(%.6g) = %.3g", d, lambda, r.p_d));
      ++grid_points;
    }
  }
  c.Note(absl::StrFormat("max S - S_opt %.2e; %d concavity points", worst,
                         grid_points));
}

// ------------------------------------------------------------------ 6

void OrbitOptimality(Check& c) {
  std::mt19937_64 rng(6);
  int64_t near_equal = 0;
  for (int d : {3, 4, 6, 10}) {
    const double bound = 1.0 / (d + 2.0 * std::sqrt(d - 1.0));
    c.Near(OrbitSlopeBound(d), bound, 1e-15, "slope bound");
    std::vector<double> star = GrrTemplate(d, std::sqrt(d - 1.0)).a;
    std::sort(star.begin(), star.end());
    // The extremal template itself, in a random coordinate order.
    OrbitTemplate attained{1.0, star};
    std::shuffle(attained.a.begin(), attained.a.end(), rng);
    c.Near(c.Value(OrbitSlope(attained), "slope"), bound, 1e-12,
           "extremal template attains the bound");
    std::normal_distribution<double> noise;
    for (int trial = 0; trial < 10000 + 300; ++trial) {
      OrbitTemplate t;
      if (trial < 10000) {
        t = RandomTemplate(rng, d);
      } else {
        // Small perturbations of the extremal template, renormalized to mean
        // one, so that the near-equality branch is exercised.
        const double scale = std::pow(10.0, -3.0 - (trial % 4));
        t.a = attained.a;
        double sum = 0.0;
        for (double& v : t.a) {
          v *= 1.0 + scale * noise(rng);
          sum += v;
        }
        for (double& v : t.a) v *= d / sum;
      }
      auto slope = OrbitSlope(t);
      if (!slope.ok()) continue;  // neutral template
      c.Expect(*slope <= bound + 1e-12, absl::StrCat("d=", d, " ", trial));
      if (*slope >= bound - 1e-9) {
        ++near_equal;
        std::sort(t.a.begin(), t.a.end());
        double dist = 0.0;
        for (int i = 0; i < d; ++i) dist = std::max(dist, std::abs(t.a[i] - star[i]));
        c.Expect(dist <= 1e-3, "near-equality away from the GRR template");
      }
    }
  }
  c.Note(absl::StrCat(near_equal, " templates within 1e-9 of the bound"));
}

// ------------------------------------------------------------------ 7

void SubsetMonotonicity(Check& c) {
  for (int d = 3; d <= 12; ++d) {
    for (double budget : {0.01, 0.1, 0.5}) {
      const SsMatchedTable t = c.Value(SsMatchedRisk(d, budget), "table");
      c.Expect(t.strictly_increasing, absl::StrCat("d=", d, " C=", budget));
      for (size_t i = 1; i < t.rows.size(); ++i) {
        c.Expect(t.rows[i].matched_risk_times_n >
                     t.rows[i - 1].matched_risk_times_n,
                 "strict increase");
      }
      // Calibrated GRR: eta = (lambda - 1) / (lambda + d - 1).
      const double lambda = c.Value(LambdaOfBudget(d, budget), "lambda");
      const double eta = (lambda - 1.0) / (lambda + d - 1.0);
      const double grr = (d - 1.0) / d * (1.0 / (eta * eta) - 1.0);
      c.Near(t.rows.front().matched_risk_times_n, grr, 1e-12 * Rel(grr),
             absl::StrCat("s=1 vs GRR, d=", d));
    }
  }
}

// ------------------------------------------------------------------ 8

void MonteCarloConsistency(Check& c) {
  struct Case {
    std::string name;
    absl::StatusOr<Channel> ch;
    double closed_times_n;
  };
  std::vector<Case> cases;
  cases.push_back({"grr(10,3)", Grr(10, 3.0), 31.5});
  cases.push_back({"aug_grr(10,0.225,3)", AugmentedGrr(10, 0.225, 3.0), 143.1});
  cases.push_back({"subset(6,2,2)", SubsetSelection(6, 2, 2.0), 32.5});
  const int64_t n = 100;
  const int64_t reps = 100000;
  for (Case& k : cases) {
    const Channel ch = c.Value(std::move(k.ch), k.name);
    const AffineEstimator est =
        c.Value(PrepareDefaultEstimator(ch), k.name + " estimator");
    const int d = ch.d();
    const SimResult r = c.Value(
        EmpiricalRisk(ch, est, UniformishComposition(d, n), reps, 0), k.name);
    c.Near(r.closed_form * n, k.closed_times_n, 1e-9 * k.closed_times_n,
           k.name + " closed form");
    c.Expect(std::abs(r.mean_risk - r.closed_form) <= 3.0 * r.std_error,
             absl::StrFormat("%s: z = %.2f", k.name, r.z_score));
    for (int i = 0; i < d; ++i) {
      c.Expect(std::abs(r.coord_mean[i] - r.theta[i]) <=
                   4.0 * r.coord_std_error[i],
               absl::StrFormat("%s coordinate %d", k.name, i));
    }
    // Skewed composition: users pile onto the low inputs.
    Composition skew{std::vector<int64_t>(d, 0)};
    int64_t left = n;
    for (int x = 0; x < d && left > 0; ++x) {
      const int64_t take = x + 1 == d ? left : std::max<int64_t>(1, left / 2);
      skew.counts[x] = take;
      left -= take;
    }
    const SimResult s = c.Value(EmpiricalRisk(ch, est, skew, reps, 1), k.name);
    const double joint = std::hypot(r.std_error, s.std_error);
    c.Expect(std::abs(r.mean_risk - s.mean_risk) <= 3.0 * joint,
             absl::StrFormat("%s composition dependence %.3g joint se",
                             k.name, (r.mean_risk - s.mean_risk) / joint));
    c.Note(absl::StrFormat("%s n*risk %.3f (z %.2f), skewed %.3f", k.name,
                           r.mean_risk * n, r.z_score, s.mean_risk * n));
  }
}

// ------------------------------------------------------------------ 9

void CltCheck(Check& c) {
  const Channel ch = c.Value(HalfBlock(8, 2.0), "half_block");
  const int64_t reps = 50000;
  for (int64_t n : {100, 1000, 10000}) {
    const ScoreResult s = c.Value(EmpiricalScore(ch, 0, 4, n, reps, 0), "score");
    const double cert = c.Value(BeCertificate(2.0, n, s.chi2), "certificate");
    const double threshold = cert + 3.0 / std::sqrt(static_cast<double>(reps));
    c.Expect(s.ks_null <= threshold,
             absl::StrFormat("n=%d KS %.4f > %.4f", n, s.ks_null, threshold));
    c.Near(s.shift, std::sqrt(0.5 / n), 1e-15, "shift sqrt(I/n)");
    c.Expect(std::abs(s.alt_mean - s.shift) <= 4.0 * s.alt_mean_std_error,
             absl::StrFormat("n=%d alt mean %.5f vs %.5f", n, s.alt_mean,
                             s.shift));
    c.Note(absl::StrFormat("n=%d KS %.4f <= %.4f", n, s.ks_null, threshold));
  }
}

// ------------------------------------------------------------------ 10

// Sum over orbits of p (A B - d^2) / (d (d - 1)), straight from the levels.
double OrbitBudgetFormula(const EquivariantChannel& ec) {
  const int d = ec.d;
  double total = 0.0;
  for (const OrbitTemplate& t : ec.orbits) {
    double a = 0.0;
    double b = 0.0;
    for (double v : t.a) {
      a += 1.0 / v;
      b += v * v;
    }
    total += t.mass * (a * b - d * d) / (d * (d - 1.0));
  }
  return total;
}

double TwoLevelBudgetFormula(int d, int s, double lambda) {
  return s * (d - s) * (lambda - 1) * (lambda - 1) * (lambda + 1) /
         (lambda * (d - 1.0) * (d + s * (lambda - 1)));
}

double SubsetBudgetFormula(int d, int s, double lambda) {
  return s * (d - s) * (lambda - 1) * (lambda - 1) * (lambda + 1) /
         (lambda * (d - 1.0) * (lambda * s + d - s));
}

void CrossRepresentation(Check& c) {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  int64_t materialized = 0;
  for (int d = 2; d <= 5; ++d) {
    for (int trial = 0; trial < 100; ++trial) {
      const int orbits = 1 + static_cast<int>(rng() % 2);
      const double null_mass = trial % 3 == 0 ? 0.2 * unif(rng) : 0.0;
      std::vector<OrbitTemplate> ts;
      double left = 1.0 - null_mass;
      for (int k = 0; k < orbits; ++k) {
        OrbitTemplate t = RandomTemplate(rng, d);
        t.mass = k + 1 == orbits ? left : left * (0.2 + 0.6 * unif(rng));
        left -= t.mass;
        ts.push_back(std::move(t));
      }
      auto ec = OrbitChannel(d, ts, null_mass);
      if (!ec.ok()) {
        c.Expect(false, std::string(ec.status().message()));
        continue;
      }
      const Channel ch = c.Value(MaterializeOrbitChannel(*ec), "materialize");
      const double want = OrbitBudgetFormula(*ec);
      c.Near(ChiStar(ch), want, 1e-9 * Rel(want), "orbit budget");
      c.Near(ec->Budget(), want, 1e-9 * Rel(want), "orbit budget (library)");
      ++materialized;
    }
    for (int s = 1; s < d; ++s) {
      for (double lambda : {1.3, 2.0, 5.0, 40.0}) {
        const EquivariantChannel two = c.Value(
            OrbitChannel(d, {TwoLevelTemplate(d, s, lambda)}, 0.0), "two-level");
        const Channel tch = c.Value(MaterializeOrbitChannel(two), "materialize");
        const double tw = TwoLevelBudgetFormula(d, s, lambda);
        c.Near(ChiStar(tch), tw, 1e-9 * Rel(tw), "two-level budget");
        const Channel ss = c.Value(SubsetSelection(d, s, lambda), "subset");
        const double sw = SubsetBudgetFormula(d, s, lambda);
        c.Near(ChiStar(ss), sw, 1e-9 * Rel(sw), "subset budget");
      }
    }
  }
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 2 + trial % 5;
    const int k = d + static_cast<int>(rng() % 4);
    const Channel ch = RandomLdpChannel(rng, d, k);
    c.Expect(SymmetrizedChi2(ch) <= ChiStar(ch) * (1 + 1e-12),
             "average-pair chi2 exceeds chi*");
    const SymmetrizedFisher sf =
        c.Value(SymmetrizedFisherUniform(ch, 1), "symmetrized Fisher");
    c.Expect(sf.inverse_trace_symmetrized <= sf.inverse_trace * (1 + 1e-12),
             "harmonic-mean inverse-trace inequality");
  }
  c.Note(absl::StrCat(materialized, " materialized orbit channels"));
}

struct Criterion {
  int id;
  std::string name;
  double limit_seconds;
  std::function<void(Check&)> run;
};

int Main() {
  const std::vector<Criterion> criteria = {
      {1, "example reproduction", 1, ExampleReproduction},
      {2, "half-block curve identity", 10, ObstructionIdentity},
      {3, "sufficiency oracle", 30, SufficiencyOracleCheck},
      {4, "universal chi-square bound", 10, UniversalBoundCheck},
      {5, "frontier dominance", 20, FrontierDominance},
      {6, "orbit optimality", 20, OrbitOptimality},
      {7, "subset monotonicity", 10, SubsetMonotonicity},
      {8, "Monte Carlo consistency", 300, MonteCarloConsistency},
      {9, "CLT / Berry-Esseen", 300, CltCheck},
      {10, "cross-representation equality", 30, CrossRepresentation},
  };
  int failed = 0;
  for (const Criterion& k : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      k.run(check);
    } catch (const Check::Abandoned&) {
      check.Note("abandoned after an error status");
    }
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    const bool in_time = secs <= k.limit_seconds;
    const bool pass = check.ok() && in_time;
    if (!pass) ++failed;
    std::printf("%s %2d %s [%.2fs, limit %.0fs%s] %s\n",
                pass ? "PASS" : "FAIL", k.id, k.name.c_str(), secs,
                k.limit_seconds, in_time ? "" : ", over time",
                check.Summary().c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

}  // namespace
}  // namespace shuffle_privacy

int main() { return shuffle_privacy::Main(); }

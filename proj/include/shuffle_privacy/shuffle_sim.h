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

#ifndef SHUFFLE_PRIVACY_SHUFFLE_SIM_H_
#define SHUFFLE_PRIVACY_SHUFFLE_SIM_H_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "shuffle_privacy/channel.h"
#include "shuffle_privacy/privacy_curve.h"

namespace shuffle_privacy {

// Replications are processed in batches of this size; batch statistics are
// merged in batch order, so results do not depend on the worker count.
inline constexpr int64_t kSimBatch = 4096;

// Exhaustive histogram space allowed in the sufficiency oracle.
inline constexpr double kMaxOracleHistograms = 1e6;
inline constexpr int64_t kMaxOracleN = 6;

// Running count, mean and sum of squared deviations (Welford). Merge is
// Chan's pairwise update, so per-batch statistics can be combined in any
// grouping up to rounding.
struct SimMoments {
  int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void Add(double x);
  void Merge(const SimMoments& o);
  double Variance() const;  // unbiased; 0 below two samples
  double StdError() const;
};

struct Composition {
  std::vector<int64_t> counts;
  int64_t n() const;
};

// floor(n/d) users per input, the remainder on the lowest indices.
Composition UniformishComposition(int d, int64_t n);

enum class SamplingMode {
  kFixedComposition,  // exactly counts[x] users hold x
  kIid,               // inputs drawn i.i.d. from counts / n
};

using Rng = std::mt19937_64;

// Independent stream for replication `rep` under `seed`.
Rng ReplicationRng(uint64_t seed, uint64_t rep);

// Multinomial(n; probs) by sequential conditional binomials.
void SampleMultinomial(int64_t n, std::span<const double> probs, Rng& rng,
                       std::span<int64_t> out);

// One multinomial draw per input row, summed.
absl::StatusOr<Histogram> SampleHistogram(const Channel& ch,
                                          const Composition& comp,
                                          uint64_t seed);
Histogram SampleHistogram(const Channel& ch, std::span<const int64_t> comp,
                          Rng& rng);

enum class EstimatorKind {
  kMixtureProjected,
  kOrbitProjected,
  kSsInverse,
};

absl::StatusOr<EstimatorKind> ParseEstimatorKind(const std::string& name);
std::string EstimatorKindName(EstimatorKind kind);

// Every estimator here is affine in the histogram:
// theta = offset + gain * N / n, with gain a d x |Y| row-major matrix.
struct AffineEstimator {
  EstimatorKind kind = EstimatorKind::kOrbitProjected;
  int d = 0;
  int num_outputs = 0;
  std::vector<double> offset;
  std::vector<double> gain;
  // Signal coefficient S; the exact fixed-composition risk is
  // (d-1)/(n d) (1/S - 1).
  double signal = 0.0;

  std::vector<double> Apply(const Histogram& hist) const;
  double ClosedFormRiskTimesN() const;
};

// mixture_projected: GRR blocks are read from the labels ("y", "b<i>:<y>";
// "z..." is null). orbit_projected: t(y) = W(y|.)/mu(y) - 1, valid for
// permutation-equivariant channels (KindMismatch when the projection is
// biased). ss_inverse: labels are subsets "{...}".
absl::StatusOr<AffineEstimator> PrepareEstimator(EstimatorKind kind,
                                                 const Channel& ch);

// Default estimator for a channel: ss_inverse for subset labels,
// mixture_projected for GRR-block labels, orbit_projected otherwise.
absl::StatusOr<AffineEstimator> PrepareDefaultEstimator(const Channel& ch);

struct SimResult {
  double mean_risk = 0.0;
  double std_error = 0.0;
  int64_t reps = 0;
  uint64_t seed = 0;
  double closed_form = 0.0;
  double z_score = 0.0;
  // Per-coordinate mean of the estimate and its standard error.
  std::vector<double> coord_mean;
  std::vector<double> coord_std_error;
  std::vector<double> theta;
  // Largest |1^T theta - 1| seen.
  double max_affine_defect = 0.0;
};

absl::StatusOr<SimResult> EmpiricalRisk(const Channel& ch,
                                        const AffineEstimator& est,
                                        const Composition& comp, int64_t reps,
                                        uint64_t seed,
                                        SamplingMode mode =
                                            SamplingMode::kFixedComposition);

struct ScoreResult {
  double ks_null = 0.0;
  double ks_alt = 0.0;
  // Mean of the unshifted score under Q and its standard error.
  double alt_mean = 0.0;
  double alt_mean_std_error = 0.0;
  // sqrt(I / n).
  double shift = 0.0;
  double chi2 = 0.0;
  int64_t reps = 0;
};

// S = (L - 1) / sqrt(I/n) under P, and S - sqrt(I/n) under Q; returns the
// Kolmogorov distances to N(0, 1).
absl::StatusOr<ScoreResult> EmpiricalScore(const Channel& ch, int a, int b,
                                           int64_t n, int64_t reps,
                                           uint64_t seed);

// Kolmogorov distance between a sample and the standard normal.
double KolmogorovToNormal(std::vector<double> sample);

struct EmpiricalCurve {
  PrivacyCurve curve;
  std::vector<double> fwd_std_error;
  std::vector<double> rev_std_error;
};

// delta_fwd averages (L - e^eps)_+ over histograms drawn under P; delta_rev
// averages (1/L - e^eps)_+ over histograms drawn under Q (n - 1 users on a and
// one on b).
absl::StatusOr<EmpiricalCurve> EmpiricalPrivacyCurve(
    const Channel& ch, int a, int b, int64_t n, int64_t reps,
    std::span<const double> eps, uint64_t seed);

struct OracleReport {
  PrivacyCurve full;      // hockey-stick sums over all full histograms
  PrivacyCurve quotient;  // LR-quotient enumeration
  double max_abs_diff = 0.0;
  int64_t histograms = 0;
  bool equal = false;
};

// Compares the quotient curve with sum_N (Q(N) - e^eps P(N))_+ where
// Q(N) = sum_y W(y|b) P_{n-1}(N - e_y).
absl::StatusOr<OracleReport> SufficiencyOracle(const Channel& ch, int a,
                                               int b, int64_t n,
                                               std::span<const double> eps,
                                               double tolerance = 1e-12);

struct DecoderSimResult {
  double worst_risk = 0.0;
  double worst_std_error = 0.0;
  int64_t worst_vertex = 0;
  // Mean Hamming error of the 3 delta / 2 threshold decoder at the worst
  // vertex for that error.
  double worst_decoder_error = 0.0;
  double assouad_bound = 0.0;
  bool bound_vacuous = false;
  int64_t vertices = 0;
  int64_t reps = 0;
};

// i.i.d. sampling at every vertex of the Assouad cube.
absl::StatusOr<DecoderSimResult> AssouadDecoderSim(const Channel& ch,
                                                   const AffineEstimator& est,
                                                   int64_t n, double delta,
                                                   int64_t reps,
                                                   uint64_t seed);

}  // namespace shuffle_privacy

#endif  // SHUFFLE_PRIVACY_SHUFFLE_SIM_H_

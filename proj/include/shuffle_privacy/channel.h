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

// Finite-alphabet local randomizers and the pairwise likelihood-ratio
// quantities that govern the canonical neighboring shuffle experiment.
//
// A Channel is a row-stochastic d x |Y| matrix W(y|x). Construction goes
// through ValidateChannel, which drops outputs of common zero mass and rejects
// outputs that are reachable from some inputs but not others (those would make
// the local privacy parameter infinite). Every Channel therefore has strictly
// positive entries and all likelihood ratios are finite.
//
// For a pair of inputs (a, b) the likelihood ratio w(y) = W(y|b) / W(y|a),
// pushed forward under row a, is an LrLaw. The canonical shuffle experiment
// "all n users hold a" versus "one user switched to b" depends on the channel
// only through this law: the released histogram can be compressed to the
// counts on the level sets of w without losing information.

#ifndef SHUFFLE_PRIVACY_CHANNEL_H_
#define SHUFFLE_PRIVACY_CHANNEL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace shuffle_privacy {

// Accepted deviation of an input row sum from 1. Rows are renormalized after
// the check.
inline constexpr double kRowSumTolerance = 1e-9;

// Likelihood-ratio values closer than this (relative) share one level set.
inline constexpr double kRatioMergeTolerance = 1e-9;

class Channel {
 public:
  int d() const { return d_; }
  int num_outputs() const { return static_cast<int>(outputs_.size()); }
  const std::vector<std::string>& outputs() const { return outputs_; }

  // W(y | x).
  double operator()(int x, int y) const {
    return w_[static_cast<size_t>(x) * outputs_.size() + y];
  }
  std::span<const double> row(int x) const {
    return {w_.data() + static_cast<size_t>(x) * outputs_.size(),
            outputs_.size()};
  }
  // Row-major d x |Y| entries.
  const std::vector<double>& entries() const { return w_; }

  // Dense rows, e.g. for serialization.
  std::vector<std::vector<double>> Rows() const;

 private:
  friend absl::StatusOr<Channel> ValidateChannel(int, std::vector<std::string>,
                                                 std::vector<double>);
  Channel(int d, std::vector<std::string> outputs, std::vector<double> w)
      : d_(d), outputs_(std::move(outputs)), w_(std::move(w)) {}

  int d_;
  std::vector<std::string> outputs_;
  std::vector<double> w_;
};

// Validates a d x |Y| matrix given row-major and returns the support-normalized
// channel. Errors (message prefix names the failure):
//   NonStochasticRow  a row sum deviates from 1 by more than kRowSumTolerance
//   NegativeEntry     some entry is < 0
//   InfiniteLDP       an output has zero mass under some inputs only
//   ShapeMismatch     sizes are inconsistent, d < 2, or an entry is not finite
// An empty `outputs` list gets labels "0", "1", ....
absl::StatusOr<Channel> ValidateChannel(int d, std::vector<std::string> outputs,
                                        std::vector<double> row_major);
absl::StatusOr<Channel> ValidateChannel(
    int d, std::vector<std::string> outputs,
    const std::vector<std::vector<double>>& rows);

// log max_{x, x', y} W(y|x) / W(y|x'). Zero iff all rows coincide.
double LdpParameter(const Channel& ch);

// chi^2(W(.|b) || W(.|a)) = sum_y (W(y|b) - W(y|a))^2 / W(y|a).
// Errors: SameInput when a == b, OutOfRange for a bad index.
absl::StatusOr<double> PairwiseChi2(const Channel& ch, int a, int b);

// d x d matrix (row-major) of PairwiseChi2(a, b); zero on the diagonal.
std::vector<double> PairwiseChi2Matrix(const Channel& ch);

struct WorstPair {
  int a = 0;
  int b = 1;
  double chi2 = 0.0;
};

// Ordered pair with the largest pairwise chi^2; the first one in (a, b)
// lexicographic order on ties.
WorstPair FindWorstPair(const Channel& ch);

// max_{a != b} PairwiseChi2(ch, a, b).
double ChiStar(const Channel& ch);

struct LrAtom {
  double ratio = 1.0;
  double mass = 1.0;
  std::vector<int> levels;  // output indices forming the level set
};

// Pushforward law of the pairwise likelihood ratio under the null row.
// Atoms are sorted by ascending ratio.
struct LrLaw {
  std::vector<LrAtom> atoms;
  double epsilon0 = 0.0;

  // sum_j p_j (r_j - 1)^2.
  double Chi2() const;
  // sum_j r_j p_j, which is 1 for every law produced from a channel.
  double Mean() const;
  // max over atoms of max(r_j, 1 / r_j).
  double RatioBound() const;
};

// Groups outputs by likelihood ratio W(y|b)/W(y|a) (merged within
// kRatioMergeTolerance). Each atom's ratio is P^b(B)/P^a(B) over its level set
// B, which keeps the law exactly mean-one after merging. epsilon0 is the
// channel's LdpParameter.
absl::StatusOr<LrLaw> PairwiseLrLaw(const Channel& ch, int a, int b);

// Builds a law from (ratio, mass) pairs, e.g. parsed from JSON. Sorts and
// merges atoms, then checks: masses sum to 1 (1e-12), mean one (1e-10),
// positive ratios inside [e^{-eps0}, e^{eps0}]. When eps0 is absent it is taken
// as max_j |log r_j|.
absl::StatusOr<LrLaw> MakeLrLaw(std::vector<LrAtom> atoms,
                                std::optional<double> epsilon0 = std::nullopt);

// Shuffle transcript: counts per output.
struct Histogram {
  std::vector<int64_t> counts;
  int64_t n() const;
};

// Exact canonical likelihood ratio from quotient counts aligned with the
// law's atoms: (1/n) sum_j r_j m_j. Errors: LengthMismatch, or an empty or
// negative count vector.
absl::StatusOr<double> ExactLr(const LrLaw& law,
                               std::span<const int64_t> quotient_counts);

// Same ratio from the full histogram: (1/n) sum_y N_y W(y|b)/W(y|a).
absl::StatusOr<double> ExactLrFromHistogram(const Channel& ch, int a, int b,
                                            const Histogram& hist);

// Quotient counts M_j = sum_{y in B_j} N_y.
absl::StatusOr<std::vector<int64_t>> QuotientCounts(const LrLaw& law,
                                                    const Histogram& hist);

// (lambda - 1)^2 / lambda, the largest pairwise chi^2 of any channel whose
// likelihood ratios are bounded by lambda. Errors: BadLambda for lambda <= 1.
absl::StatusOr<double> UniversalBound(double lambda);

struct ExtremalReport {
  bool extremal = false;
  double chi2 = 0.0;
  // UniversalBound(lambda) - chi2; zero exactly for extremal laws.
  double gap = 0.0;
};

// A law attains the universal bound iff it is two-point on {1/lambda, lambda}
// with masses lambda/(1+lambda) and 1/(1+lambda). Ratios and masses are
// compared within 1e-9. lambda <= 1 reports non-extremal with zero gap.
ExtremalReport IsExtremal(const LrLaw& law, double lambda);

}  // namespace shuffle_privacy

#endif  // SHUFFLE_PRIVACY_CHANNEL_H_

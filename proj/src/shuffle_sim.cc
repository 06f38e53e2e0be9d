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

#include "shuffle_privacy/shuffle_sim.h"

#include <algorithm>
#include <cmath>
#include <optional>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "shuffle_privacy/estimation_bounds.h"
#include "shuffle_privacy/numeric.h"
#include "shuffle_privacy/parallel.h"
#include "shuffle_privacy/status_macros.h"

namespace shuffle_privacy {
namespace {

// Running mean and sum of squared deviations; Merge is Chan's update.
using Moments = SimMoments;

int64_t NumBatches(int64_t reps) { return (reps + kSimBatch - 1) / kSimBatch; }

absl::Status CheckReps(int64_t reps) {
  if (reps < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("BadReps: need at least 2 replications, got ", reps));
  }
  return absl::OkStatus();
}

absl::Status CheckPairInputs(const Channel& ch, int a, int b) {
  if (a < 0 || b < 0 || a >= ch.d() || b >= ch.d()) {
    return absl::OutOfRangeError(absl::StrCat("OutOfRange: pair (", a, ", ",
                                              b, ") with d = ", ch.d()));
  }
  if (a == b) {
    return absl::InvalidArgumentError(absl::StrCat("SameInput: a = b = ", a));
  }
  return absl::OkStatus();
}

absl::Status KindMismatch(absl::string_view what) {
  return absl::InvalidArgumentError(absl::StrCat("KindMismatch: ", what));
}

absl::Status ZeroSignal(absl::string_view what) {
  return absl::FailedPreconditionError(absl::StrCat("ZeroSignal: ", what));
}

// Block and coordinate of a GRR-block label; block -1 marks a null symbol.
struct BlockSlot {
  int block = -1;
  int coord = -1;
};

std::optional<BlockSlot> ParseBlockLabel(absl::string_view label) {
  BlockSlot slot;
  if (!label.empty() && label[0] == 'z') return slot;
  int coord = 0;
  if (absl::SimpleAtoi(label, &coord)) {
    slot.block = 0;
    slot.coord = coord;
    return slot;
  }
  if (label.size() > 1 && label[0] == 'b') {
    std::vector<absl::string_view> parts =
        absl::StrSplit(label.substr(1), ':');
    int block = 0;
    if (parts.size() == 2 && absl::SimpleAtoi(parts[0], &block) &&
        absl::SimpleAtoi(parts[1], &coord)) {
      slot.block = block;
      slot.coord = coord;
      return slot;
    }
  }
  return std::nullopt;
}

std::optional<std::vector<int>> ParseSubsetLabel(absl::string_view label) {
  if (label.size() < 2 || label.front() != '{' || label.back() != '}') {
    return std::nullopt;
  }
  std::vector<int> members;
  for (absl::string_view part :
       absl::StrSplit(label.substr(1, label.size() - 2), ',')) {
    int v = 0;
    if (!absl::SimpleAtoi(part, &v)) return std::nullopt;
    members.push_back(v);
  }
  return members;
}

// sum_y mu(y) |t(y)|^2 / (d (d-1)) with t(y) = W(y|.)/mu(y) - 1.
constexpr double kUnbiasedTolerance = 1e-9;

double OrbitSignalOf(const Channel& ch) {
  const int d = ch.d();
  CompensatedSum s;
  for (int y = 0; y < ch.num_outputs(); ++y) {
    double mu = 0.0;
    for (int x = 0; x < d; ++x) mu += ch(x, y);
    mu /= d;
    double norm2 = 0.0;
    for (int x = 0; x < d; ++x) {
      const double t = ch(x, y) / mu - 1.0;
      norm2 += t * t;
    }
    s.Add(mu * norm2);
  }
  return s.value() / (static_cast<double>(d) * (d - 1));
}

absl::StatusOr<AffineEstimator> PrepareMixture(const Channel& ch) {
  const int d = ch.d();
  const int k = ch.num_outputs();
  std::vector<BlockSlot> slots(k);
  int num_blocks = 0;
  for (int y = 0; y < k; ++y) {
    const auto slot = ParseBlockLabel(ch.outputs()[y]);
    if (!slot.has_value() || slot->coord >= d) {
      return KindMismatch(absl::StrCat("output '", ch.outputs()[y],
                                       "' is not a GRR-block label"));
    }
    slots[y] = *slot;
    num_blocks = std::max(num_blocks, slot->block + 1);
  }
  // Column of each (block, coordinate).
  std::vector<std::vector<int>> column(num_blocks, std::vector<int>(d, -1));
  for (int y = 0; y < k; ++y) {
    if (slots[y].block < 0) continue;
    int& c = column[slots[y].block][slots[y].coord];
    if (c >= 0) return KindMismatch("duplicate block label");
    c = y;
  }
  std::vector<double> eta(num_blocks, 0.0);
  CompensatedSum signal;
  for (int i = 0; i < num_blocks; ++i) {
    const int present = static_cast<int>(
        std::count_if(column[i].begin(), column[i].end(),
                      [](int c) { return c >= 0; }));
    if (present == 0) continue;
    if (present != d) return KindMismatch("incomplete GRR block");
    double p = 0.0;
    for (int y = 0; y < d; ++y) p += ch(0, column[i][y]);
    const double diag = ch(0, column[i][0]);
    const double off = ch(0, column[i][1]);
    for (int x = 0; x < d; ++x) {
      for (int y = 0; y < d; ++y) {
        const double expect = y == x ? diag : off;
        if (std::abs(ch(x, column[i][y]) - expect) > 1e-12 * diag) {
          return KindMismatch("block is not a GRR block");
        }
      }
    }
    eta[i] = (diag - off) / p;
    signal.Add(p * eta[i] * eta[i]);
  }
  AffineEstimator est;
  est.kind = EstimatorKind::kMixtureProjected;
  est.d = d;
  est.num_outputs = k;
  est.signal = signal.value();
  if (!(est.signal > 0.0)) return ZeroSignal("mixture has S = 0");
  est.offset.assign(d, 1.0 / d);
  est.gain.assign(static_cast<size_t>(d) * k, 0.0);
  for (int y = 0; y < k; ++y) {
    if (slots[y].block < 0) continue;
    const double c = eta[slots[y].block] / est.signal;
    for (int j = 0; j < d; ++j) {
      est.gain[j * k + y] = c * ((j == slots[y].coord ? 1.0 : 0.0) - 1.0 / d);
    }
  }
  return est;
}

absl::StatusOr<AffineEstimator> PrepareOrbit(const Channel& ch) {
  const int d = ch.d();
  const int k = ch.num_outputs();
  AffineEstimator est;
  est.kind = EstimatorKind::kOrbitProjected;
  est.d = d;
  est.num_outputs = k;
  est.signal = OrbitSignalOf(ch);
  if (!(est.signal > 1e-300)) return ZeroSignal("orbit signal S(W) = 0");
  est.offset.assign(d, 1.0 / d);
  est.gain.assign(static_cast<size_t>(d) * k, 0.0);
  for (int y = 0; y < k; ++y) {
    double mu = 0.0;
    for (int x = 0; x < d; ++x) mu += ch(x, y);
    mu /= d;
    for (int x = 0; x < d; ++x) {
      est.gain[x * k + y] = (ch(x, y) / mu - 1.0) / (d * est.signal);
    }
  }
  // The projection is unbiased only for fully permutation-equivariant
  // channels (cyclic ones such as half_block are not).
  for (int x = 0; x < d; ++x) {
    for (int i = 0; i < d; ++i) {
      CompensatedSum v;
      v.Add(est.offset[i]);
      for (int y = 0; y < k; ++y) v.Add(est.gain[i * k + y] * ch(x, y));
      if (std::abs(v.value() - (i == x ? 1.0 : 0.0)) > kUnbiasedTolerance) {
        return KindMismatch(absl::StrCat(
            "orbit_projected is biased for this channel (input ", x,
            ", coordinate ", i, "); the channel is not permutation-equivariant"));
      }
    }
  }
  return est;
}

absl::StatusOr<AffineEstimator> PrepareSubset(const Channel& ch) {
  const int d = ch.d();
  const int k = ch.num_outputs();
  std::vector<std::vector<int>> members(k);
  for (int y = 0; y < k; ++y) {
    auto parsed = ParseSubsetLabel(ch.outputs()[y]);
    if (!parsed.has_value()) {
      return KindMismatch(
          absl::StrCat("output '", ch.outputs()[y], "' is not a subset"));
    }
    for (int j : *parsed) {
      if (j < 0 || j >= d) return KindMismatch("subset member out of range");
    }
    members[y] = std::move(*parsed);
  }
  // Inclusion probabilities read off row 0.
  double p_s = 0.0;
  double r_s = 0.0;
  for (int y = 0; y < k; ++y) {
    for (int j : members[y]) {
      if (j == 0) p_s += ch(0, y);
      if (j == 1) r_s += ch(0, y);
    }
  }
  if (!(p_s - r_s > 0.0)) return ZeroSignal("p_s = r_s");
  AffineEstimator est;
  est.kind = EstimatorKind::kSsInverse;
  est.d = d;
  est.num_outputs = k;
  est.signal = OrbitSignalOf(ch);
  est.offset.assign(d, -r_s / (p_s - r_s));
  est.gain.assign(static_cast<size_t>(d) * k, 0.0);
  for (int y = 0; y < k; ++y) {
    for (int j : members[y]) est.gain[j * k + y] = 1.0 / (p_s - r_s);
  }
  return est;
}

// Counts of a categorical draw for every row, using per-row suffix sums.
class RowSampler {
 public:
  explicit RowSampler(const Channel& ch) : ch_(ch) {}

  void Draw(int x, int64_t count, Rng& rng, std::span<int64_t> acc) const {
    const auto row = ch_.row(x);
    double remaining_mass = 1.0;
    int64_t remaining = count;
    const size_t k = row.size();
    for (size_t y = 0; y + 1 < k && remaining > 0; ++y) {
      const double p = std::clamp(row[y] / remaining_mass, 0.0, 1.0);
      std::binomial_distribution<int64_t> bin(remaining, p);
      const int64_t draw = bin(rng);
      acc[y] += draw;
      remaining -= draw;
      remaining_mass -= row[y];
      if (remaining_mass <= 0.0) break;
    }
    acc[k - 1] += remaining;
  }

 private:
  const Channel& ch_;
};

double LrOf(const std::vector<double>& w, std::span<const int64_t> counts,
            int64_t n) {
  double s = 0.0;
  for (size_t y = 0; y < w.size(); ++y) {
    s += static_cast<double>(counts[y]) * w[y];
  }
  return s / static_cast<double>(n);
}

}  // namespace

void SimMoments::Add(double x) {
  ++count;
  const double delta = x - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta * (x - mean);
}

void SimMoments::Merge(const SimMoments& o) {
  if (o.count == 0) return;
  if (count == 0) {
    *this = o;
    return;
  }
  const double total = static_cast<double>(count + o.count);
  const double delta = o.mean - mean;
  mean += delta * static_cast<double>(o.count) / total;
  m2 += o.m2 + delta * delta * static_cast<double>(count) *
                   static_cast<double>(o.count) / total;
  count += o.count;
}

double SimMoments::Variance() const {
  if (count < 2) return 0.0;
  return m2 / static_cast<double>(count - 1);
}

double SimMoments::StdError() const {
  if (count < 2) return 0.0;
  return std::sqrt(Variance() / static_cast<double>(count));
}

int64_t Composition::n() const {
  int64_t total = 0;
  for (int64_t c : counts) total += c;
  return total;
}

Composition UniformishComposition(int d, int64_t n) {
  Composition comp;
  comp.counts.assign(d, n / d);
  for (int64_t x = 0; x < n % d; ++x) ++comp.counts[x];
  return comp;
}

Rng ReplicationRng(uint64_t seed, uint64_t rep) {
  std::seed_seq seq{static_cast<uint32_t>(seed),
                    static_cast<uint32_t>(seed >> 32),
                    static_cast<uint32_t>(rep),
                    static_cast<uint32_t>(rep >> 32)};
  return Rng(seq);
}

void SampleMultinomial(int64_t n, std::span<const double> probs, Rng& rng,
                       std::span<int64_t> out) {
  std::fill(out.begin(), out.end(), 0);
  double remaining_mass = 1.0;
  int64_t remaining = n;
  const size_t k = probs.size();
  for (size_t y = 0; y + 1 < k && remaining > 0; ++y) {
    const double p = std::clamp(probs[y] / remaining_mass, 0.0, 1.0);
    std::binomial_distribution<int64_t> bin(remaining, p);
    out[y] = bin(rng);
    remaining -= out[y];
    remaining_mass -= probs[y];
    if (remaining_mass <= 0.0) break;
  }
  if (k > 0) out[k - 1] += remaining;
}

Histogram SampleHistogram(const Channel& ch, std::span<const int64_t> comp,
                          Rng& rng) {
  Histogram hist;
  hist.counts.assign(ch.num_outputs(), 0);
  const RowSampler sampler(ch);
  for (int x = 0; x < ch.d(); ++x) {
    if (comp[x] > 0) sampler.Draw(x, comp[x], rng, hist.counts);
  }
  return hist;
}

absl::StatusOr<Histogram> SampleHistogram(const Channel& ch,
                                          const Composition& comp,
                                          uint64_t seed) {
  if (static_cast<int>(comp.counts.size()) != ch.d()) {
    return absl::InvalidArgumentError(
        absl::StrCat("DimensionMismatch: composition has ", comp.counts.size(),
                     " entries, d = ", ch.d()));
  }
  for (int64_t c : comp.counts) {
    if (c < 0) {
      return absl::InvalidArgumentError("DimensionMismatch: negative count");
    }
  }
  Rng rng = ReplicationRng(seed, 0);
  return SampleHistogram(ch, comp.counts, rng);
}

absl::StatusOr<EstimatorKind> ParseEstimatorKind(const std::string& name) {
  if (name == "mixture_projected") return EstimatorKind::kMixtureProjected;
  if (name == "orbit_projected") return EstimatorKind::kOrbitProjected;
  if (name == "ss_inverse") return EstimatorKind::kSsInverse;
  return absl::InvalidArgumentError(
      absl::StrCat("ParseError: unknown estimator '", name, "'"));
}

std::string EstimatorKindName(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kMixtureProjected:
      return "mixture_projected";
    case EstimatorKind::kOrbitProjected:
      return "orbit_projected";
    case EstimatorKind::kSsInverse:
      return "ss_inverse";
  }
  return "unknown";
}

std::vector<double> AffineEstimator::Apply(const Histogram& hist) const {
  const double n = static_cast<double>(hist.n());
  std::vector<double> theta = offset;
  for (int j = 0; j < d; ++j) {
    CompensatedSum s;
    s.Add(theta[j]);
    const double* g = gain.data() + static_cast<size_t>(j) * num_outputs;
    for (int y = 0; y < num_outputs; ++y) {
      if (hist.counts[y] != 0) {
        s.Add(g[y] * static_cast<double>(hist.counts[y]) / n);
      }
    }
    theta[j] = s.value();
  }
  return theta;
}

double AffineEstimator::ClosedFormRiskTimesN() const {
  return (d - 1.0) / d * (1.0 / signal - 1.0);
}

absl::StatusOr<AffineEstimator> PrepareEstimator(EstimatorKind kind,
                                                 const Channel& ch) {
  switch (kind) {
    case EstimatorKind::kMixtureProjected:
      return PrepareMixture(ch);
    case EstimatorKind::kOrbitProjected:
      return PrepareOrbit(ch);
    case EstimatorKind::kSsInverse:
      return PrepareSubset(ch);
  }
  return absl::InvalidArgumentError("KindMismatch: unknown estimator");
}

absl::StatusOr<AffineEstimator> PrepareDefaultEstimator(const Channel& ch) {
  if (!ch.outputs().empty() && !ch.outputs()[0].empty() &&
      ch.outputs()[0][0] == '{') {
    return PrepareSubset(ch);
  }
  absl::StatusOr<AffineEstimator> mixture = PrepareMixture(ch);
  if (mixture.ok() || absl::IsFailedPrecondition(mixture.status())) {
    return mixture;
  }
  return PrepareOrbit(ch);
}

absl::StatusOr<SimResult> EmpiricalRisk(const Channel& ch,
                                        const AffineEstimator& est,
                                        const Composition& comp, int64_t reps,
                                        uint64_t seed, SamplingMode mode) {
  const int d = ch.d();
  if (est.d != d || est.num_outputs != ch.num_outputs()) {
    return KindMismatch("estimator was prepared for a different channel");
  }
  if (static_cast<int>(comp.counts.size()) != d) {
    return absl::InvalidArgumentError("DimensionMismatch: composition size");
  }
  SP_RETURN_IF_ERROR(CheckReps(reps));
  const int64_t n = comp.n();
  if (n < 1) return absl::InvalidArgumentError("BadN: empty composition");
  std::vector<double> theta(d);
  for (int x = 0; x < d; ++x) {
    theta[x] = static_cast<double>(comp.counts[x]) / static_cast<double>(n);
  }

  struct BatchStats {
    Moments loss;
    std::vector<Moments> coord;
    double affine_defect = 0.0;
  };
  const int64_t batches = NumBatches(reps);
  std::vector<BatchStats> stats(batches);
  ParallelFor(batches, [&](int64_t b) {
    BatchStats& st = stats[b];
    st.coord.resize(d);
    std::vector<int64_t> drawn(d);
    const int64_t end = std::min(reps, (b + 1) * kSimBatch);
    for (int64_t r = b * kSimBatch; r < end; ++r) {
      Rng rng = ReplicationRng(seed, r);
      std::span<const int64_t> users = comp.counts;
      if (mode == SamplingMode::kIid) {
        SampleMultinomial(n, theta, rng, drawn);
        users = drawn;
      }
      const Histogram hist = SampleHistogram(ch, users, rng);
      const std::vector<double> est_theta = est.Apply(hist);
      double loss = 0.0;
      double total = 0.0;
      for (int x = 0; x < d; ++x) {
        const double e = est_theta[x] - theta[x];
        loss += e * e;
        total += est_theta[x];
        st.coord[x].Add(est_theta[x]);
      }
      st.loss.Add(loss);
      st.affine_defect = std::max(st.affine_defect, std::abs(total - 1.0));
    }
  });

  BatchStats all;
  all.coord.resize(d);
  for (const auto& st : stats) {
    all.loss.Merge(st.loss);
    for (int x = 0; x < d; ++x) all.coord[x].Merge(st.coord[x]);
    all.affine_defect = std::max(all.affine_defect, st.affine_defect);
  }
  SimResult out;
  out.mean_risk = all.loss.mean;
  out.std_error = all.loss.StdError();
  out.reps = reps;
  out.seed = seed;
  out.theta = theta;
  out.closed_form = est.ClosedFormRiskTimesN() / static_cast<double>(n);
  if (mode == SamplingMode::kIid) {
    // Random composition adds Var of the centered input indicator.
    double norm2 = 0.0;
    for (double t : theta) norm2 += t * t;
    out.closed_form += (1.0 - norm2) / static_cast<double>(n);
  }
  out.z_score = out.std_error > 0.0
                    ? (out.mean_risk - out.closed_form) / out.std_error
                    : 0.0;
  for (int x = 0; x < d; ++x) {
    out.coord_mean.push_back(all.coord[x].mean);
    out.coord_std_error.push_back(all.coord[x].StdError());
  }
  out.max_affine_defect = all.affine_defect;
  return out;
}

double KolmogorovToNormal(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  const double total = static_cast<double>(sample.size());
  double worst = 0.0;
  size_t i = 0;
  while (i < sample.size()) {
    size_t j = i;
    while (j < sample.size() && sample[j] == sample[i]) ++j;
    const double phi = NormalCdf(sample[i]);
    worst = std::max({worst, std::abs(static_cast<double>(i) / total - phi),
                      std::abs(static_cast<double>(j) / total - phi)});
    i = j;
  }
  return worst;
}

absl::StatusOr<ScoreResult> EmpiricalScore(const Channel& ch, int a, int b,
                                           int64_t n, int64_t reps,
                                           uint64_t seed) {
  SP_RETURN_IF_ERROR(CheckPairInputs(ch, a, b));
  SP_RETURN_IF_ERROR(CheckReps(reps));
  if (n < 1) return absl::InvalidArgumentError("BadN: n must be >= 1");
  SP_ASSIGN_OR_RETURN(double chi2, PairwiseChi2(ch, a, b));
  if (!(chi2 > 0.0)) {
    return absl::FailedPreconditionError(
        "ZeroInformation: the pair has zero chi-square divergence");
  }
  const int k = ch.num_outputs();
  std::vector<double> w(k);
  for (int y = 0; y < k; ++y) w[y] = ch(b, y) / ch(a, y);
  const double sigma = std::sqrt(chi2 / static_cast<double>(n));

  std::vector<double> null_scores(reps);
  std::vector<double> alt_scores(reps);
  const RowSampler sampler(ch);
  ParallelFor(NumBatches(reps), [&](int64_t batch) {
    std::vector<int64_t> counts(k);
    const int64_t end = std::min(reps, (batch + 1) * kSimBatch);
    for (int64_t r = batch * kSimBatch; r < end; ++r) {
      Rng rng = ReplicationRng(seed, r);
      std::fill(counts.begin(), counts.end(), 0);
      sampler.Draw(a, n, rng, counts);
      null_scores[r] = (LrOf(w, counts, n) - 1.0) / sigma;
      std::fill(counts.begin(), counts.end(), 0);
      sampler.Draw(a, n - 1, rng, counts);
      sampler.Draw(b, 1, rng, counts);
      alt_scores[r] = (LrOf(w, counts, n) - 1.0) / sigma;
    }
  });

  ScoreResult out;
  out.chi2 = chi2;
  out.shift = sigma;
  out.reps = reps;
  Moments alt;
  for (double s : alt_scores) alt.Add(s);
  out.alt_mean = alt.mean;
  out.alt_mean_std_error = alt.StdError();
  for (double& s : alt_scores) s -= sigma;
  out.ks_null = KolmogorovToNormal(std::move(null_scores));
  out.ks_alt = KolmogorovToNormal(std::move(alt_scores));
  return out;
}

absl::StatusOr<EmpiricalCurve> EmpiricalPrivacyCurve(
    const Channel& ch, int a, int b, int64_t n, int64_t reps,
    std::span<const double> eps, uint64_t seed) {
  SP_RETURN_IF_ERROR(CheckPairInputs(ch, a, b));
  SP_RETURN_IF_ERROR(CheckReps(reps));
  if (n < 1) return absl::InvalidArgumentError("BadN: n must be >= 1");
  for (double e : eps) {
    if (!(e >= 0.0)) {
      return absl::InvalidArgumentError(absl::StrCat("BadEps: ", e));
    }
  }
  const int k = ch.num_outputs();
  std::vector<double> w(k);
  for (int y = 0; y < k; ++y) w[y] = ch(b, y) / ch(a, y);
  std::vector<double> exp_eps;
  for (double e : eps) exp_eps.push_back(std::exp(e));
  const size_t g = eps.size();

  struct BatchStats {
    std::vector<Moments> fwd;
    std::vector<Moments> rev;
  };
  const int64_t batches = NumBatches(reps);
  std::vector<BatchStats> stats(batches);
  const RowSampler sampler(ch);
  ParallelFor(batches, [&](int64_t batch) {
    BatchStats& st = stats[batch];
    st.fwd.resize(g);
    st.rev.resize(g);
    std::vector<int64_t> counts(k);
    const int64_t end = std::min(reps, (batch + 1) * kSimBatch);
    for (int64_t r = batch * kSimBatch; r < end; ++r) {
      Rng rng = ReplicationRng(seed, r);
      std::fill(counts.begin(), counts.end(), 0);
      sampler.Draw(a, n, rng, counts);
      const double l_null = LrOf(w, counts, n);
      std::fill(counts.begin(), counts.end(), 0);
      sampler.Draw(a, n - 1, rng, counts);
      sampler.Draw(b, 1, rng, counts);
      const double l_alt = LrOf(w, counts, n);
      for (size_t i = 0; i < g; ++i) {
        st.fwd[i].Add(std::max(0.0, l_null - exp_eps[i]));
        st.rev[i].Add(std::max(0.0, 1.0 / l_alt - exp_eps[i]));
      }
    }
  });
  std::vector<Moments> fwd(g);
  std::vector<Moments> rev(g);
  for (const auto& st : stats) {
    for (size_t i = 0; i < g; ++i) {
      fwd[i].Merge(st.fwd[i]);
      rev[i].Merge(st.rev[i]);
    }
  }
  EmpiricalCurve out;
  out.curve.n = n;
  out.curve.provenance = CurveProvenance::kMonteCarlo;
  for (size_t i = 0; i < g; ++i) {
    out.curve.points.push_back({eps[i], fwd[i].mean, rev[i].mean});
    out.fwd_std_error.push_back(fwd[i].StdError());
    out.rev_std_error.push_back(rev[i].StdError());
  }
  return out;
}

absl::StatusOr<OracleReport> SufficiencyOracle(const Channel& ch, int a,
                                               int b, int64_t n,
                                               std::span<const double> eps,
                                               double tolerance) {
  SP_RETURN_IF_ERROR(CheckPairInputs(ch, a, b));
  const int k = ch.num_outputs();
  if (n < 1 || n > kMaxOracleN) {
    return absl::ResourceExhaustedError(
        absl::StrCat("TooLarge: oracle needs 1 <= n <= ", kMaxOracleN));
  }
  const double space = CompositionCount(n, k);
  if (space > kMaxOracleHistograms) {
    return absl::ResourceExhaustedError(absl::StrCat(
        "TooLarge: ", space, " full histograms exceed ", kMaxOracleHistograms));
  }
  SP_ASSIGN_OR_RETURN(LrLaw law, PairwiseLrLaw(ch, a, b));
  SP_ASSIGN_OR_RETURN(PrivacyCurve quotient, PrivacyCurveExact(law, n, eps));

  std::vector<double> log_pa(k);
  for (int y = 0; y < k; ++y) log_pa[y] = std::log(ch(a, y));
  auto log_multinomial = [&](std::span<const int64_t> counts, int64_t total) {
    double s = LogFactorial(total);
    for (int y = 0; y < k; ++y) {
      s -= LogFactorial(counts[y]);
      if (counts[y] > 0) s += counts[y] * log_pa[y];
    }
    return s;
  };

  std::vector<double> exp_eps;
  for (double e : eps) exp_eps.push_back(std::exp(e));
  std::vector<CompensatedSum> fwd(eps.size());
  std::vector<CompensatedSum> rev(eps.size());
  std::vector<int64_t> counts(k, 0);
  std::vector<int64_t> minus(k);
  counts[k - 1] = n;
  int64_t histograms = 0;
  while (true) {
    ++histograms;
    const double p = std::exp(log_multinomial(counts, n));
    CompensatedSum q_sum;
    for (int y = 0; y < k; ++y) {
      if (counts[y] == 0) continue;
      minus = counts;
      --minus[y];
      q_sum.Add(ch(b, y) * std::exp(log_multinomial(minus, n - 1)));
    }
    const double q = q_sum.value();
    for (size_t i = 0; i < eps.size(); ++i) {
      fwd[i].Add(std::max(0.0, q - exp_eps[i] * p));
      rev[i].Add(std::max(0.0, p - exp_eps[i] * q));
    }
    // Next composition: move one unit from the last nonzero slot leftward.
    int j = k - 1;
    while (j >= 0 && counts[j] == 0) --j;
    if (j <= 0) break;
    const int64_t moved = counts[j];
    counts[j] = 0;
    ++counts[j - 1];
    counts[k - 1] = moved - 1;
  }

  OracleReport report;
  report.quotient = std::move(quotient);
  report.full.n = n;
  report.full.provenance = CurveProvenance::kExactEnumeration;
  report.histograms = histograms;
  for (size_t i = 0; i < eps.size(); ++i) {
    CurvePoint pt{eps[i], std::clamp(fwd[i].value(), 0.0, 1.0),
                  std::clamp(rev[i].value(), 0.0, 1.0)};
    report.full.points.push_back(pt);
    const CurvePoint& qp = report.quotient.points[i];
    report.max_abs_diff =
        std::max({report.max_abs_diff, std::abs(pt.delta_fwd - qp.delta_fwd),
                  std::abs(pt.delta_rev - qp.delta_rev)});
  }
  report.equal = report.max_abs_diff <= tolerance;
  return report;
}

absl::StatusOr<DecoderSimResult> AssouadDecoderSim(const Channel& ch,
                                                   const AffineEstimator& est,
                                                   int64_t n, double delta,
                                                   int64_t reps,
                                                   uint64_t seed) {
  const int d = ch.d();
  if (d > 10) {
    return absl::ResourceExhaustedError(
        "TooLarge: decoder simulation needs d <= 10");
  }
  if (est.d != d || est.num_outputs != ch.num_outputs()) {
    return KindMismatch("estimator was prepared for a different channel");
  }
  SP_RETURN_IF_ERROR(CheckReps(reps));
  SP_ASSIGN_OR_RETURN(auto cube, AssouadCube(d, delta));
  SP_ASSIGN_OR_RETURN(AssouadResult bound, AssouadBound(ch, n, delta));
  const int64_t vertices = static_cast<int64_t>(cube.size());

  struct VertexStats {
    Moments loss;
    Moments hamming;
  };
  std::vector<VertexStats> stats(vertices);
  ParallelFor(vertices, [&](int64_t v) {
    const std::vector<double>& theta = cube[v];
    std::vector<int64_t> users(d);
    for (int64_t r = 0; r < reps; ++r) {
      Rng rng = ReplicationRng(seed, static_cast<uint64_t>(v * reps + r));
      SampleMultinomial(n, theta, rng, users);
      const Histogram hist = SampleHistogram(ch, users, rng);
      const std::vector<double> est_theta = est.Apply(hist);
      double loss = 0.0;
      int errors = 0;
      for (int x = 0; x < d; ++x) {
        const double e = est_theta[x] - theta[x];
        loss += e * e;
        if (x >= 1) {
          const bool decoded = est_theta[x] >= 1.5 * delta;
          const bool truth = ((v >> (x - 1)) & 1) != 0;
          errors += decoded != truth;
        }
      }
      stats[v].loss.Add(loss);
      stats[v].hamming.Add(errors);
    }
  });
  DecoderSimResult out;
  out.vertices = vertices;
  out.reps = reps;
  out.assouad_bound = bound.bound;
  out.bound_vacuous = bound.vacuous;
  for (int64_t v = 0; v < vertices; ++v) {
    if (stats[v].loss.mean > out.worst_risk) {
      out.worst_risk = stats[v].loss.mean;
      out.worst_std_error = stats[v].loss.StdError();
      out.worst_vertex = v;
    }
    out.worst_decoder_error =
        std::max(out.worst_decoder_error, stats[v].hamming.mean);
  }
  return out;
}

}  // namespace shuffle_privacy

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

#include "shuffle_privacy/channel.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "absl/strings/str_cat.h"
#include "shuffle_privacy/numeric.h"

namespace shuffle_privacy {
namespace {

absl::Status CheckPair(const Channel& ch, int a, int b) {
  if (a < 0 || b < 0 || a >= ch.d() || b >= ch.d()) {
    return absl::OutOfRangeError(
        absl::StrCat("OutOfRange: pair (", a, ", ", b, ") with d = ", ch.d()));
  }
  if (a == b) {
    return absl::InvalidArgumentError(
        absl::StrCat("SameInput: a = b = ", a));
  }
  return absl::OkStatus();
}

double Chi2Unchecked(const Channel& ch, int a, int b) {
  const auto pa = ch.row(a);
  const auto pb = ch.row(b);
  CompensatedSum s;
  for (size_t y = 0; y < pa.size(); ++y) {
    const double diff = pb[y] - pa[y];
    s.Add(diff * diff / pa[y]);
  }
  return s.value();
}

}  // namespace

std::vector<std::vector<double>> Channel::Rows() const {
  std::vector<std::vector<double>> rows(d_);
  for (int x = 0; x < d_; ++x) {
    const auto r = row(x);
    rows[x].assign(r.begin(), r.end());
  }
  return rows;
}

absl::StatusOr<Channel> ValidateChannel(int d, std::vector<std::string> outputs,
                                        std::vector<double> row_major) {
  if (d < 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("ShapeMismatch: need d >= 2, got ", d));
  }
  if (row_major.empty() || row_major.size() % d != 0) {
    return absl::InvalidArgumentError(
        "ShapeMismatch: matrix is empty or not d x |Y|");
  }
  const size_t k = row_major.size() / d;
  if (outputs.empty()) {
    outputs.reserve(k);
    for (size_t y = 0; y < k; ++y) outputs.push_back(absl::StrCat(y));
  }
  if (outputs.size() != k) {
    return absl::InvalidArgumentError(absl::StrCat(
        "ShapeMismatch: ", outputs.size(), " labels for ", k, " columns"));
  }
  for (int x = 0; x < d; ++x) {
    CompensatedSum s;
    for (size_t y = 0; y < k; ++y) {
      const double v = row_major[x * k + y];
      if (!std::isfinite(v)) {
        return absl::InvalidArgumentError(absl::StrCat(
            "ShapeMismatch: non-finite entry at (", x, ", ", y, ")"));
      }
      if (v < 0.0) {
        return absl::InvalidArgumentError(absl::StrCat(
            "NegativeEntry: W(", y, "|", x, ") = ", v));
      }
      s.Add(v);
    }
    const double total = s.value();
    if (std::abs(total - 1.0) > kRowSumTolerance) {
      return absl::InvalidArgumentError(
          absl::StrCat("NonStochasticRow: row ", x, " sums to ", total));
    }
    for (size_t y = 0; y < k; ++y) row_major[x * k + y] /= total;
  }

  std::vector<size_t> keep;
  keep.reserve(k);
  for (size_t y = 0; y < k; ++y) {
    int zeros = 0;
    for (int x = 0; x < d; ++x) zeros += row_major[x * k + y] == 0.0;
    if (zeros == d) continue;
    if (zeros > 0) {
      return absl::InvalidArgumentError(absl::StrCat(
          "InfiniteLDP: output '", outputs[y],
          "' has zero mass under some inputs but not others"));
    }
    keep.push_back(y);
  }
  if (keep.size() == k) {
    return Channel(d, std::move(outputs), std::move(row_major));
  }
  std::vector<std::string> kept_labels;
  kept_labels.reserve(keep.size());
  for (size_t y : keep) kept_labels.push_back(std::move(outputs[y]));
  std::vector<double> w;
  w.reserve(keep.size() * d);
  for (int x = 0; x < d; ++x) {
    for (size_t y : keep) w.push_back(row_major[x * k + y]);
  }
  return Channel(d, std::move(kept_labels), std::move(w));
}

absl::StatusOr<Channel> ValidateChannel(
    int d, std::vector<std::string> outputs,
    const std::vector<std::vector<double>>& rows) {
  if (static_cast<int>(rows.size()) != d) {
    return absl::InvalidArgumentError(
        absl::StrCat("ShapeMismatch: ", rows.size(), " rows for d = ", d));
  }
  std::vector<double> flat;
  const size_t k = rows.empty() ? 0 : rows.front().size();
  flat.reserve(k * rows.size());
  for (const auto& r : rows) {
    if (r.size() != k) {
      return absl::InvalidArgumentError("ShapeMismatch: ragged rows");
    }
    flat.insert(flat.end(), r.begin(), r.end());
  }
  return ValidateChannel(d, std::move(outputs), std::move(flat));
}

double LdpParameter(const Channel& ch) {
  double worst = 1.0;
  for (int y = 0; y < ch.num_outputs(); ++y) {
    double lo = ch(0, y);
    double hi = lo;
    for (int x = 1; x < ch.d(); ++x) {
      lo = std::min(lo, ch(x, y));
      hi = std::max(hi, ch(x, y));
    }
    worst = std::max(worst, hi / lo);
  }
  return std::log(worst);
}

absl::StatusOr<double> PairwiseChi2(const Channel& ch, int a, int b) {
  if (absl::Status s = CheckPair(ch, a, b); !s.ok()) return s;
  return Chi2Unchecked(ch, a, b);
}

std::vector<double> PairwiseChi2Matrix(const Channel& ch) {
  const int d = ch.d();
  std::vector<double> m(static_cast<size_t>(d) * d, 0.0);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b < d; ++b) {
      if (a != b) m[a * d + b] = Chi2Unchecked(ch, a, b);
    }
  }
  return m;
}

WorstPair FindWorstPair(const Channel& ch) {
  WorstPair worst{0, 1, -1.0};
  for (int a = 0; a < ch.d(); ++a) {
    for (int b = 0; b < ch.d(); ++b) {
      if (a == b) continue;
      const double v = Chi2Unchecked(ch, a, b);
      if (v > worst.chi2) worst = {a, b, v};
    }
  }
  return worst;
}

double ChiStar(const Channel& ch) { return FindWorstPair(ch).chi2; }

double LrLaw::Chi2() const {
  CompensatedSum s;
  for (const auto& atom : atoms) {
    s.Add(atom.mass * (atom.ratio - 1.0) * (atom.ratio - 1.0));
  }
  return s.value();
}

double LrLaw::Mean() const {
  CompensatedSum s;
  for (const auto& atom : atoms) s.Add(atom.mass * atom.ratio);
  return s.value();
}

double LrLaw::RatioBound() const {
  double bound = 1.0;
  for (const auto& atom : atoms) {
    bound = std::max({bound, atom.ratio, 1.0 / atom.ratio});
  }
  return bound;
}

absl::StatusOr<LrLaw> PairwiseLrLaw(const Channel& ch, int a, int b) {
  if (absl::Status s = CheckPair(ch, a, b); !s.ok()) return s;
  const auto pa = ch.row(a);
  const auto pb = ch.row(b);
  std::vector<int> order(pa.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> ratio(pa.size());
  for (size_t y = 0; y < pa.size(); ++y) ratio[y] = pb[y] / pa[y];
  std::stable_sort(order.begin(), order.end(),
                   [&](int u, int v) { return ratio[u] < ratio[v]; });

  LrLaw law;
  law.epsilon0 = LdpParameter(ch);
  size_t i = 0;
  while (i < order.size()) {
    const double anchor = ratio[order[i]];
    CompensatedSum mass_a;
    CompensatedSum mass_b;
    LrAtom atom;
    while (i < order.size() &&
           ratio[order[i]] - anchor <= kRatioMergeTolerance * anchor) {
      mass_a.Add(pa[order[i]]);
      mass_b.Add(pb[order[i]]);
      atom.levels.push_back(order[i]);
      ++i;
    }
    std::sort(atom.levels.begin(), atom.levels.end());
    atom.mass = mass_a.value();
    atom.ratio = mass_b.value() / atom.mass;
    law.atoms.push_back(std::move(atom));
  }
  return law;
}

absl::StatusOr<LrLaw> MakeLrLaw(std::vector<LrAtom> atoms,
                                std::optional<double> epsilon0) {
  if (atoms.empty()) {
    return absl::InvalidArgumentError("InvalidLaw: no atoms");
  }
  for (const auto& atom : atoms) {
    if (!(atom.ratio > 0.0) || !std::isfinite(atom.ratio)) {
      return absl::InvalidArgumentError(
          absl::StrCat("InvalidLaw: ratio ", atom.ratio, " is not positive"));
    }
    if (!(atom.mass >= 0.0) || atom.mass > 1.0) {
      return absl::InvalidArgumentError(
          absl::StrCat("InvalidLaw: mass ", atom.mass, " outside [0, 1]"));
    }
  }
  std::stable_sort(atoms.begin(), atoms.end(),
                   [](const LrAtom& u, const LrAtom& v) {
                     return u.ratio < v.ratio;
                   });
  LrLaw law;
  for (auto& atom : atoms) {
    if (!law.atoms.empty()) {
      LrAtom& last = law.atoms.back();
      if (atom.ratio - last.ratio <= kRatioMergeTolerance * last.ratio) {
        const double mass = last.mass + atom.mass;
        if (mass > 0.0) {
          last.ratio = (last.ratio * last.mass + atom.ratio * atom.mass) / mass;
        }
        last.mass = mass;
        last.levels.insert(last.levels.end(), atom.levels.begin(),
                           atom.levels.end());
        continue;
      }
    }
    law.atoms.push_back(std::move(atom));
  }
  CompensatedSum total;
  for (const auto& atom : law.atoms) total.Add(atom.mass);
  if (std::abs(total.value() - 1.0) > 1e-12) {
    return absl::InvalidArgumentError(
        absl::StrCat("InvalidLaw: masses sum to ", total.value()));
  }
  if (std::abs(law.Mean() - 1.0) > 1e-10) {
    return absl::InvalidArgumentError(absl::StrCat(
        "InvalidLaw: mean likelihood ratio is ", law.Mean(), ", expected 1"));
  }
  const double natural = std::log(law.RatioBound());
  if (epsilon0.has_value()) {
    if (*epsilon0 < 0.0 || natural > *epsilon0 * (1.0 + 1e-12) + 1e-15) {
      return absl::InvalidArgumentError(absl::StrCat(
          "InvalidLaw: ratios need eps0 >= ", natural, ", got ", *epsilon0));
    }
    law.epsilon0 = *epsilon0;
  } else {
    law.epsilon0 = natural;
  }
  return law;
}

int64_t Histogram::n() const {
  return std::accumulate(counts.begin(), counts.end(), int64_t{0});
}

absl::StatusOr<double> ExactLr(const LrLaw& law,
                               std::span<const int64_t> quotient_counts) {
  if (quotient_counts.size() != law.atoms.size()) {
    return absl::InvalidArgumentError(
        absl::StrCat("LengthMismatch: ", quotient_counts.size(),
                     " counts for ", law.atoms.size(), " atoms"));
  }
  int64_t n = 0;
  CompensatedSum s;
  for (size_t j = 0; j < quotient_counts.size(); ++j) {
    if (quotient_counts[j] < 0) {
      return absl::InvalidArgumentError("LengthMismatch: negative count");
    }
    n += quotient_counts[j];
    s.Add(law.atoms[j].ratio * static_cast<double>(quotient_counts[j]));
  }
  if (n == 0) {
    return absl::InvalidArgumentError("LengthMismatch: counts sum to zero");
  }
  return s.value() / static_cast<double>(n);
}

absl::StatusOr<double> ExactLrFromHistogram(const Channel& ch, int a, int b,
                                            const Histogram& hist) {
  if (absl::Status s = CheckPair(ch, a, b); !s.ok()) return s;
  if (static_cast<int>(hist.counts.size()) != ch.num_outputs()) {
    return absl::InvalidArgumentError(
        absl::StrCat("LengthMismatch: histogram has ", hist.counts.size(),
                     " cells, channel has ", ch.num_outputs(), " outputs"));
  }
  const int64_t n = hist.n();
  if (n <= 0) {
    return absl::InvalidArgumentError("LengthMismatch: empty histogram");
  }
  CompensatedSum s;
  for (int y = 0; y < ch.num_outputs(); ++y) {
    s.Add(static_cast<double>(hist.counts[y]) * ch(b, y) / ch(a, y));
  }
  return s.value() / static_cast<double>(n);
}

absl::StatusOr<std::vector<int64_t>> QuotientCounts(const LrLaw& law,
                                                    const Histogram& hist) {
  std::vector<int64_t> m(law.atoms.size(), 0);
  for (size_t j = 0; j < law.atoms.size(); ++j) {
    for (int y : law.atoms[j].levels) {
      if (y < 0 || y >= static_cast<int>(hist.counts.size())) {
        return absl::InvalidArgumentError(
            "LengthMismatch: level set refers past the histogram");
      }
      m[j] += hist.counts[y];
    }
  }
  return m;
}

absl::StatusOr<double> UniversalBound(double lambda) {
  if (!(lambda > 1.0) || !std::isfinite(lambda)) {
    return absl::InvalidArgumentError(
        absl::StrCat("BadLambda: need lambda > 1, got ", lambda));
  }
  return (lambda - 1.0) * (lambda - 1.0) / lambda;
}

ExtremalReport IsExtremal(const LrLaw& law, double lambda) {
  ExtremalReport report;
  report.chi2 = law.Chi2();
  if (!(lambda > 1.0)) return report;
  report.gap = (lambda - 1.0) * (lambda - 1.0) / lambda - report.chi2;
  if (law.atoms.size() != 2) return report;
  const LrAtom& lo = law.atoms[0];
  const LrAtom& hi = law.atoms[1];
  constexpr double kTol = 1e-9;
  report.extremal = RelativelyEqual(lo.ratio, 1.0 / lambda, kTol) &&
                    RelativelyEqual(hi.ratio, lambda, kTol) &&
                    std::abs(lo.mass - lambda / (1.0 + lambda)) <= kTol &&
                    std::abs(hi.mass - 1.0 / (1.0 + lambda)) <= kTol;
  return report;
}

}  // namespace shuffle_privacy

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

#include "shuffle_privacy/mechanisms.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "shuffle_privacy/numeric.h"
#include "shuffle_privacy/status_macros.h"

namespace shuffle_privacy {
namespace {

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

bool IsProbability(double p) { return p >= 0.0 && p <= 1.0; }

std::vector<std::string> IndexLabels(int k, absl::string_view prefix = "") {
  std::vector<std::string> labels;
  labels.reserve(k);
  for (int i = 0; i < k; ++i) labels.push_back(absl::StrCat(prefix, i));
  return labels;
}

// Fills `w` (d x k, row-major) with p * GRR(d, lambda) starting at column
// `offset`.
void AddGrrBlock(int d, int k, int offset, double p, double lambda,
                 std::vector<double>& w) {
  const double beta = 1.0 / (lambda + d - 1.0);
  for (int x = 0; x < d; ++x) {
    for (int y = 0; y < d; ++y) {
      w[static_cast<size_t>(x) * k + offset + y] =
          p * (y == x ? lambda * beta : beta);
    }
  }
}

}  // namespace

absl::StatusOr<Channel> Grr(int d, double lambda) {
  SP_RETURN_IF_ERROR(CheckDLambda(d, lambda));
  std::vector<double> w(static_cast<size_t>(d) * d);
  AddGrrBlock(d, d, 0, 1.0, lambda, w);
  return ValidateChannel(d, IndexLabels(d), std::move(w));
}

absl::StatusOr<Channel> HalfBlock(int d, double lambda) {
  if (d < 2 || d % 2 != 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("OddD: half blocks need an even d >= 2, got ", d));
  }
  SP_RETURN_IF_ERROR(CheckDLambda(d, lambda));
  const double hi = 2.0 * lambda / (d * (1.0 + lambda));
  const double lo = 2.0 / (d * (1.0 + lambda));
  std::vector<double> w(static_cast<size_t>(d) * d, lo);
  for (int x = 0; x < d; ++x) {
    for (int j = 0; j < d / 2; ++j) w[x * d + (x + j) % d] = hi;
  }
  return ValidateChannel(d, IndexLabels(d), std::move(w));
}

absl::StatusOr<Channel> AugmentedGrr(int d, double p, double lambda) {
  SP_RETURN_IF_ERROR(CheckDLambda(d, lambda));
  if (!IsProbability(p)) return BadParams(absl::StrCat("p = ", p));
  const int k = d + 1;
  std::vector<double> w(static_cast<size_t>(d) * k);
  AddGrrBlock(d, k, 0, p, lambda, w);
  for (int x = 0; x < d; ++x) w[x * k + d] = 1.0 - p;
  std::vector<std::string> labels = IndexLabels(d);
  labels.push_back("z");
  return ValidateChannel(d, std::move(labels), std::move(w));
}

absl::Status ValidateMixtureSpec(const MixtureSpec& spec) {
  if (spec.d < 2) return BadParams(absl::StrCat("need d >= 2, got ", spec.d));
  CompensatedSum total;
  for (const auto& block : spec.blocks) {
    if (!IsProbability(block.p)) {
      return absl::InvalidArgumentError(
          absl::StrCat("MassMismatch: block mass ", block.p));
    }
    SP_RETURN_IF_ERROR(CheckDLambda(spec.d, block.lambda));
    total.Add(block.p);
  }
  for (double r : spec.null_masses) {
    if (!IsProbability(r)) {
      return absl::InvalidArgumentError(
          absl::StrCat("MassMismatch: null mass ", r));
    }
    total.Add(r);
  }
  if (std::abs(total.value() - 1.0) > kRowSumTolerance) {
    return absl::InvalidArgumentError(
        absl::StrCat("MassMismatch: masses sum to ", total.value()));
  }
  return absl::OkStatus();
}

absl::StatusOr<Channel> GrrMixture(const MixtureSpec& spec) {
  SP_RETURN_IF_ERROR(ValidateMixtureSpec(spec));
  const int d = spec.d;
  const int nb = static_cast<int>(spec.blocks.size());
  const int k = nb * d + static_cast<int>(spec.null_masses.size());
  std::vector<double> w(static_cast<size_t>(d) * k);
  std::vector<std::string> labels;
  labels.reserve(k);
  for (int i = 0; i < nb; ++i) {
    AddGrrBlock(d, k, i * d, spec.blocks[i].p, spec.blocks[i].lambda, w);
    for (int y = 0; y < d; ++y) labels.push_back(absl::StrCat("b", i, ":", y));
  }
  for (size_t z = 0; z < spec.null_masses.size(); ++z) {
    for (int x = 0; x < d; ++x) w[x * k + nb * d + z] = spec.null_masses[z];
    labels.push_back(absl::StrCat("z", z));
  }
  return ValidateChannel(d, std::move(labels), std::move(w));
}

absl::StatusOr<Channel> SubsetSelection(int d, int s, double lambda) {
  SP_RETURN_IF_ERROR(CheckDLambda(d, lambda));
  if (s < 1 || s > d - 1) {
    return BadParams(absl::StrCat("need 1 <= s <= d - 1, got s = ", s));
  }
  const double size = BinomialCoefficient(d, s);
  if (size > static_cast<double>(kMaxSubsetAlphabet)) {
    return absl::ResourceExhaustedError(absl::StrCat(
        "AlphabetTooLarge: C(", d, ", ", s, ") = ", size, " outputs"));
  }
  const int64_t k = static_cast<int64_t>(size);
  const double base = d / (size * (lambda * s + d - s));
  std::vector<double> w(static_cast<size_t>(d) * k, base);
  std::vector<std::string> labels;
  labels.reserve(k);
  std::vector<int> subset(s);
  std::iota(subset.begin(), subset.end(), 0);
  for (int64_t col = 0; col < k; ++col) {
    labels.push_back(absl::StrCat("{", absl::StrJoin(subset, ","), "}"));
    for (int x : subset) w[x * k + col] = base * lambda;
    // Next subset in lexicographic order.
    int i = s - 1;
    while (i >= 0 && subset[i] == d - s + i) --i;
    if (i < 0) break;
    ++subset[i];
    for (int j = i + 1; j < s; ++j) subset[j] = subset[j - 1] + 1;
  }
  return ValidateChannel(d, std::move(labels), std::move(w));
}

absl::StatusOr<Channel> Interpolated(int d, int m, double theta,
                                     double lambda) {
  SP_RETURN_IF_ERROR(CheckDLambda(d, lambda));
  if (m < 2 || m % 2 != 0 || m > d) {
    return BadParams(absl::StrCat("need an even 2 <= m <= d, got m = ", m));
  }
  if (!IsProbability(theta)) return BadParams(absl::StrCat("theta = ", theta));
  if (m == d && theta < 1.0) {
    return BadParams("theta < 1 needs a common block (m < d)");
  }
  const double hi = theta * 2.0 * lambda / (m * (1.0 + lambda));
  const double lo = theta * 2.0 / (m * (1.0 + lambda));
  const double common = m < d ? (1.0 - theta) / (d - m) : 0.0;
  std::vector<double> w(static_cast<size_t>(d) * d);
  for (int x = 0; x < d; ++x) {
    const int r = x % m;
    for (int y = 0; y < m; ++y) {
      const bool in_block = ((y - r + m) % m) < m / 2;
      w[x * d + y] = in_block ? hi : lo;
    }
    for (int y = m; y < d; ++y) w[x * d + y] = common;
  }
  std::vector<std::string> labels = IndexLabels(m, "h");
  for (int c = 0; c < d - m; ++c) labels.push_back(absl::StrCat("c", c));
  return ValidateChannel(d, std::move(labels), std::move(w));
}

double OrbitTemplate::A() const {
  CompensatedSum s;
  for (double v : a) s.Add(1.0 / v);
  return s.value();
}

double OrbitTemplate::B() const {
  CompensatedSum s;
  for (double v : a) s.Add(v * v);
  return s.value();
}

// With t = a - 1: 1/a = 1 - t + t^2/a and a^2 = 1 + 2t + t^2, so A - d and
// B - d are sums of small terms rather than differences of large ones.
double OrbitTemplate::ExcessB() const {
  CompensatedSum s;
  for (double v : a) {
    const double t = v - 1.0;
    s.Add(2.0 * t);
    s.Add(t * t);
  }
  return s.value();
}

double OrbitTemplate::ExcessAB() const {
  CompensatedSum ea;
  for (double v : a) {
    const double t = v - 1.0;
    ea.Add(-t);
    ea.Add(t * t / v);
  }
  const double da = ea.value();
  const double db = ExcessB();
  const double d = static_cast<double>(a.size());
  CompensatedSum s;
  s.Add(d * da);
  s.Add(d * db);
  s.Add(da * db);
  return s.value();
}

double EquivariantChannel::Budget() const {
  CompensatedSum s;
  const double dd = d;
  for (const auto& o : orbits) {
    s.Add(o.mass * o.ExcessAB() / (dd * (dd - 1.0)));
  }
  return s.value();
}

double EquivariantChannel::Signal() const {
  CompensatedSum s;
  const double dd = d;
  for (const auto& o : orbits) {
    s.Add(o.mass * o.ExcessB() / (dd * (dd - 1.0)));
  }
  return s.value();
}

absl::StatusOr<EquivariantChannel> OrbitChannel(
    int d, std::vector<OrbitTemplate> orbits, double null_mass) {
  if (d < 2) return BadParams(absl::StrCat("need d >= 2, got ", d));
  if (!IsProbability(null_mass)) {
    return BadParams(absl::StrCat("null mass ", null_mass));
  }
  CompensatedSum total;
  total.Add(null_mass);
  for (auto& o : orbits) {
    if (static_cast<int>(o.a.size()) != d) {
      return absl::InvalidArgumentError(absl::StrCat(
          "TemplateSumError: template has ", o.a.size(), " entries, d = ", d));
    }
    if (!IsProbability(o.mass)) {
      return BadParams(absl::StrCat("orbit mass ", o.mass));
    }
    for (double v : o.a) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        return absl::InvalidArgumentError(
            absl::StrCat("TemplateSumError: entry ", v, " is not positive"));
      }
    }
    const double sum = Sum(o.a);
    if (std::abs(sum - d) > 1e-10) {
      return absl::InvalidArgumentError(
          absl::StrCat("TemplateSumError: template sums to ", sum, ", not ", d));
    }
    std::sort(o.a.begin(), o.a.end(), std::greater<>());
    total.Add(o.mass);
  }
  if (std::abs(total.value() - 1.0) > 1e-10) {
    return absl::InvalidArgumentError(
        absl::StrCat("MassMismatch: orbit masses sum to ", total.value()));
  }
  EquivariantChannel ec;
  ec.d = d;
  ec.orbits = std::move(orbits);
  ec.null_mass = null_mass;
  return ec;
}

int64_t OrbitSize(const std::vector<double>& a) {
  std::map<double, int> multiplicity;
  for (double v : a) ++multiplicity[v];
  double log_size = LogFactorial(static_cast<int64_t>(a.size()));
  for (const auto& [v, m] : multiplicity) log_size -= LogFactorial(m);
  return std::llround(std::exp(log_size));
}

absl::StatusOr<Channel> MaterializeOrbitChannel(const EquivariantChannel& ec) {
  const int d = ec.d;
  if (d > kMaxMaterializeD) {
    return absl::ResourceExhaustedError(absl::StrCat(
        "TooLarge: materialization needs d <= ", kMaxMaterializeD));
  }
  int64_t total = ec.null_mass > 0.0 ? 1 : 0;
  for (const auto& o : ec.orbits) total += OrbitSize(o.a);
  if (total > kMaxMaterializeAlphabet) {
    return absl::ResourceExhaustedError(
        absl::StrCat("TooLarge: ", total, " materialized outputs"));
  }
  std::vector<std::vector<double>> columns;
  std::vector<std::string> labels;
  columns.reserve(total);
  labels.reserve(total);
  for (size_t k = 0; k < ec.orbits.size(); ++k) {
    std::vector<double> a = ec.orbits[k].a;
    std::sort(a.begin(), a.end(), std::greater<>());
    // Level index of every value, for labels.
    std::vector<double> levels = a;
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    const double scale = ec.orbits[k].mass / OrbitSize(a);
    do {
      std::vector<double> col(d);
      std::vector<int> pattern(d);
      for (int x = 0; x < d; ++x) {
        col[x] = scale * a[x];
        pattern[x] = static_cast<int>(
            std::find(levels.begin(), levels.end(), a[x]) - levels.begin());
      }
      columns.push_back(std::move(col));
      labels.push_back(absl::StrCat("o", k, ":", absl::StrJoin(pattern, "")));
    } while (std::prev_permutation(a.begin(), a.end()));
  }
  if (ec.null_mass > 0.0) {
    columns.emplace_back(d, ec.null_mass);
    labels.push_back("z");
  }
  const size_t cols = columns.size();
  std::vector<double> w(static_cast<size_t>(d) * cols);
  for (size_t y = 0; y < cols; ++y) {
    for (int x = 0; x < d; ++x) w[x * cols + y] = columns[y][x];
  }
  return ValidateChannel(d, std::move(labels), std::move(w));
}

OrbitTemplate GrrTemplate(int d, double lambda, double mass) {
  const double beta = 1.0 / (lambda + d - 1.0);
  const double eta = (lambda - 1.0) / (lambda + d - 1.0);
  OrbitTemplate t;
  t.mass = mass;
  t.a.assign(d, d * beta);
  t.a[0] = d * (beta + eta);
  return t;
}

OrbitTemplate TwoLevelTemplate(int d, int s, double lambda, double mass) {
  const double den = d + s * (lambda - 1.0);
  OrbitTemplate t;
  t.mass = mass;
  t.a.assign(d, d / den);
  for (int i = 0; i < s && i < d; ++i) t.a[i] = d * lambda / den;
  return t;
}

std::string MechanismKind(const MechanismSpec& spec) {
  struct Visitor {
    std::string operator()(const GrrParams&) const { return "grr"; }
    std::string operator()(const HalfBlockParams&) const {
      return "half_block";
    }
    std::string operator()(const AugGrrParams&) const { return "aug_grr"; }
    std::string operator()(const MixtureSpec&) const { return "mixture"; }
    std::string operator()(const SubsetParams&) const { return "subset"; }
    std::string operator()(const InterpParams&) const { return "interp"; }
    std::string operator()(const EquivariantChannel&) const { return "orbit"; }
  };
  return std::visit(Visitor{}, spec);
}

int MechanismD(const MechanismSpec& spec) {
  return std::visit([](const auto& p) { return p.d; }, spec);
}

absl::StatusOr<Channel> BuildChannel(const MechanismSpec& spec) {
  struct Visitor {
    absl::StatusOr<Channel> operator()(const GrrParams& p) const {
      return Grr(p.d, p.lambda);
    }
    absl::StatusOr<Channel> operator()(const HalfBlockParams& p) const {
      return HalfBlock(p.d, p.lambda);
    }
    absl::StatusOr<Channel> operator()(const AugGrrParams& p) const {
      return AugmentedGrr(p.d, p.p, p.lambda);
    }
    absl::StatusOr<Channel> operator()(const MixtureSpec& p) const {
      return GrrMixture(p);
    }
    absl::StatusOr<Channel> operator()(const SubsetParams& p) const {
      return SubsetSelection(p.d, p.s, p.lambda);
    }
    absl::StatusOr<Channel> operator()(const InterpParams& p) const {
      return Interpolated(p.d, p.m, p.theta, p.lambda);
    }
    absl::StatusOr<Channel> operator()(const EquivariantChannel& p) const {
      SP_ASSIGN_OR_RETURN(EquivariantChannel ec,
                          OrbitChannel(p.d, p.orbits, p.null_mass));
      return MaterializeOrbitChannel(ec);
    }
  };
  return std::visit(Visitor{}, spec);
}

}  // namespace shuffle_privacy

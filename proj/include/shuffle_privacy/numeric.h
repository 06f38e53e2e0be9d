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

// Small numerical helpers shared by the analysis modules.

#ifndef SHUFFLE_PRIVACY_NUMERIC_H_
#define SHUFFLE_PRIVACY_NUMERIC_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>

namespace shuffle_privacy {

// Neumaier's variant of Kahan summation. Sums of many tiny multinomial masses
// are accumulated through this so results do not depend on how a range of
// terms was split between workers.
class CompensatedSum {
 public:
  void Add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  void Add(const CompensatedSum& other) {
    Add(other.sum_);
    Add(other.compensation_);
  }
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

inline double Sum(std::span<const double> values) {
  CompensatedSum s;
  for (double v : values) s.Add(v);
  return s.value();
}

// Standard normal CDF. erfc keeps full relative accuracy in the lower tail.
inline double NormalCdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// log(n!) via lgamma.
inline double LogFactorial(int64_t n) {
  return std::lgamma(static_cast<double>(n) + 1.0);
}

// Binomial coefficient as a double; exact for the small arguments used in
// alphabet-size guards, saturates to +inf on overflow.
inline double BinomialCoefficient(int64_t n, int64_t k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int64_t i = 1; i <= k; ++i) {
    c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return std::round(c);
}

// True when |a - b| <= tol * max(|a|, |b|).
inline bool RelativelyEqual(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

}  // namespace shuffle_privacy

#endif  // SHUFFLE_PRIVACY_NUMERIC_H_

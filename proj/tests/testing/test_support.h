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

// Random instance generators and status helpers shared by the tests.

#ifndef SHUFFLE_PRIVACY_TESTS_TESTING_TEST_SUPPORT_H_
#define SHUFFLE_PRIVACY_TESTS_TESTING_TEST_SUPPORT_H_

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "shuffle_privacy/channel.h"
#include "shuffle_privacy/mechanisms.h"

#define SP_TEST_CONCAT_INNER(a, b) a##b
#define SP_TEST_CONCAT(a, b) SP_TEST_CONCAT_INNER(a, b)

#define ASSERT_OK(expr)                                                  \
  do {                                                                   \
    const absl::Status _st = ::shuffle_privacy::testing::StatusOf(expr); \
    ASSERT_TRUE(_st.ok()) << _st;                                        \
  } while (0)

#define ASSERT_OK_AND_ASSIGN(lhs, expr)                                    \
  auto SP_TEST_CONCAT(_statusor_, __LINE__) = (expr);                      \
  ASSERT_TRUE(SP_TEST_CONCAT(_statusor_, __LINE__).ok())                   \
      << SP_TEST_CONCAT(_statusor_, __LINE__).status();                    \
  lhs = std::move(SP_TEST_CONCAT(_statusor_, __LINE__)).value()

namespace shuffle_privacy::testing {

inline absl::Status StatusOf(const absl::Status& s) { return s; }
template <typename T>
absl::Status StatusOf(const absl::StatusOr<T>& s) {
  return s.status();
}

// Prefix of the status message before ':' (the error name).
std::string ErrorName(const absl::Status& status);

template <typename T>
std::string ErrorName(const absl::StatusOr<T>& s) {
  return ErrorName(s.status());
}

// Channel with d inputs, k outputs and log-uniform positive entries, so the
// LDP parameter is finite. `spread` bounds each log entry.
Channel RandomLdpChannel(std::mt19937_64& rng, int d, int k,
                         double spread = 2.0);

// 1-3 GRR blocks with random masses and lambdas in (1, max_lambda], plus
// 0-2 null outputs.
MixtureSpec RandomMixtureSpec(std::mt19937_64& rng, int d,
                              double max_lambda = 20.0);

// Positive template with mean 1. Mixes generic, two-level, three-level and
// ordered-pair shapes.
OrbitTemplate RandomTemplate(std::mt19937_64& rng, int d);

// Calls fn(counts) for every vector of k nonnegative counts summing to n.
void ForEachComposition(int64_t n, int k,
                        const std::function<void(const std::vector<int64_t>&)>& fn);

// Relative or absolute closeness: |a - b| <= tol * max(1, |a|, |b|).
bool Near(double a, double b, double tol);

}  // namespace shuffle_privacy::testing

#endif  // SHUFFLE_PRIVACY_TESTS_TESTING_TEST_SUPPORT_H_

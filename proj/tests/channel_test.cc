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

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>
#include "shuffle_privacy/mechanisms.h"
#include "testing/test_support.h"

namespace shuffle_privacy {
namespace {

using ::shuffle_privacy::testing::ErrorName;
using ::shuffle_privacy::testing::ForEachComposition;
using ::shuffle_privacy::testing::RandomLdpChannel;

TEST(ValidateChannelTest, AssignsDefaultLabels) {
  ASSERT_OK_AND_ASSIGN(Channel ch,
                       ValidateChannel(2, {}, {{0.25, 0.75}, {0.5, 0.5}}));
  EXPECT_EQ(ch.d(), 2);
  EXPECT_EQ(ch.num_outputs(), 2);
  EXPECT_EQ(ch.outputs()[0], "0");
  EXPECT_EQ(ch.outputs()[1], "1");
  EXPECT_DOUBLE_EQ(ch(1, 0), 0.5);
}

TEST(ValidateChannelTest, RenormalizesWithinTolerance) {
  ASSERT_OK_AND_ASSIGN(
      Channel ch, ValidateChannel(2, {}, {{0.5 + 4e-10, 0.5}, {0.5, 0.5}}));
  EXPECT_NEAR(ch(0, 0) + ch(0, 1), 1.0, 1e-15);
}

TEST(ValidateChannelTest, RejectsBadInputs) {
  EXPECT_EQ(ErrorName(ValidateChannel(2, {}, {{0.6, 0.6}, {0.5, 0.5}})),
            "NonStochasticRow");
  EXPECT_EQ(ErrorName(ValidateChannel(2, {}, {{1.5, -0.5}, {0.5, 0.5}})),
            "NegativeEntry");
  EXPECT_EQ(ErrorName(ValidateChannel(2, {}, {{1.0, 0.0}, {0.5, 0.5}})),
            "InfiniteLDP");
  EXPECT_EQ(ErrorName(ValidateChannel(3, {}, std::vector<std::vector<double>>{{1.0}, {1.0}})),
            "ShapeMismatch");
  EXPECT_EQ(ErrorName(ValidateChannel(2, {"a"}, {{0.5, 0.5}, {0.5, 0.5}})),
            "ShapeMismatch");
}

TEST(ValidateChannelTest, DropsCommonZeroColumns) {
  ASSERT_OK_AND_ASSIGN(Channel ch,
                       ValidateChannel(2, {"a", "b", "c"},
                                       {{0.5, 0.0, 0.5}, {0.25, 0.0, 0.75}}));
  ASSERT_EQ(ch.num_outputs(), 2);
  EXPECT_EQ(ch.outputs()[0], "a");
  EXPECT_EQ(ch.outputs()[1], "c");
}

TEST(ValidateChannelTest, AcceptsEqualRows) {
  ASSERT_OK_AND_ASSIGN(Channel ch,
                       ValidateChannel(2, {}, {{0.3, 0.7}, {0.3, 0.7}}));
  EXPECT_EQ(LdpParameter(ch), 0.0);
  ASSERT_OK_AND_ASSIGN(LrLaw law, PairwiseLrLaw(ch, 0, 1));
  ASSERT_EQ(law.atoms.size(), 1u);
  EXPECT_DOUBLE_EQ(law.atoms[0].ratio, 1.0);
  EXPECT_EQ(law.Chi2(), 0.0);
}

TEST(PairwiseChi2Test, GrrValue) {
  // C_2(10) = (2-1)^2 (2+1) / (2 (2+9)) = 3/22.
  ASSERT_OK_AND_ASSIGN(Channel ch, Grr(10, 2.0));
  ASSERT_OK_AND_ASSIGN(double chi2, PairwiseChi2(ch, 3, 7));
  EXPECT_NEAR(chi2, 3.0 / 22.0, 1e-15);
  EXPECT_NEAR(ChiStar(ch), 3.0 / 22.0, 1e-15);
}

TEST(PairwiseChi2Test, Errors) {
  ASSERT_OK_AND_ASSIGN(Channel ch, Grr(3, 2.0));
  EXPECT_EQ(ErrorName(PairwiseChi2(ch, 1, 1)), "SameInput");
  EXPECT_EQ(ErrorName(PairwiseChi2(ch, 0, 3)), "OutOfRange");
}

TEST(PairwiseChi2Test, MatrixAndWorstPair) {
  ASSERT_OK_AND_ASSIGN(Channel ch,
                       ValidateChannel(3, {}, {{0.5, 0.25, 0.25},
                                               {0.25, 0.5, 0.25},
                                               {0.2, 0.2, 0.6}}));
  const std::vector<double> m = PairwiseChi2Matrix(ch);
  ASSERT_EQ(m.size(), 9u);
  for (int a = 0; a < 3; ++a) {
    EXPECT_EQ(m[a * 3 + a], 0.0);
    for (int b = 0; b < 3; ++b) {
      if (a == b) continue;
      EXPECT_DOUBLE_EQ(m[a * 3 + b], PairwiseChi2(ch, a, b).value());
    }
  }
  const WorstPair wp = FindWorstPair(ch);
  for (double v : m) EXPECT_LE(v, wp.chi2);
  EXPECT_DOUBLE_EQ(wp.chi2, m[wp.a * 3 + wp.b]);
}

TEST(LrLawTest, GrrAtomsAscending) {
  ASSERT_OK_AND_ASSIGN(Channel ch, Grr(3, 2.0));
  ASSERT_OK_AND_ASSIGN(LrLaw law, PairwiseLrLaw(ch, 0, 2));
  ASSERT_EQ(law.atoms.size(), 3u);
  EXPECT_DOUBLE_EQ(law.atoms[0].ratio, 0.5);
  EXPECT_DOUBLE_EQ(law.atoms[1].ratio, 1.0);
  EXPECT_DOUBLE_EQ(law.atoms[2].ratio, 2.0);
  EXPECT_DOUBLE_EQ(law.atoms[0].mass, 0.5);
  EXPECT_DOUBLE_EQ(law.atoms[2].mass, 0.25);
  EXPECT_EQ(law.atoms[0].levels, std::vector<int>{0});
  EXPECT_EQ(law.atoms[2].levels, std::vector<int>{2});
  EXPECT_NEAR(law.epsilon0, std::log(2.0), 1e-15);
}

TEST(LrLawTest, MergesProportionalColumns) {
  ASSERT_OK_AND_ASSIGN(Channel ch,
                       ValidateChannel(2, {}, {{0.1, 0.2, 0.7},
                                               {0.2, 0.4, 0.4}}));
  ASSERT_OK_AND_ASSIGN(LrLaw law, PairwiseLrLaw(ch, 0, 1));
  ASSERT_EQ(law.atoms.size(), 2u);
  EXPECT_NEAR(law.atoms[1].ratio, 2.0, 1e-15);
  EXPECT_NEAR(law.atoms[1].mass, 0.3, 1e-15);
  EXPECT_EQ(law.atoms[1].levels, (std::vector<int>{0, 1}));
}

TEST(MakeLrLawTest, ValidatesInput) {
  ASSERT_OK_AND_ASSIGN(LrLaw trivial, MakeLrLaw({{1.0, 1.0, {}}}));
  EXPECT_EQ(trivial.epsilon0, 0.0);
  EXPECT_EQ(ErrorName(MakeLrLaw({{2.0, 0.5, {}}, {0.5, 0.4, {}}})),
            "InvalidLaw");
  EXPECT_EQ(ErrorName(MakeLrLaw({{2.0, 0.5, {}}, {0.5, 0.5, {}}})),
            "InvalidLaw");  // mean 1.25
  EXPECT_EQ(ErrorName(MakeLrLaw({{2.0, 1.0 / 3, {}}, {0.5, 2.0 / 3, {}}},
                                0.1)),
            "InvalidLaw");  // ratio outside e^{+-eps0}
  ASSERT_OK_AND_ASSIGN(LrLaw law,
                       MakeLrLaw({{2.0, 1.0 / 3, {}}, {0.5, 2.0 / 3, {}}}));
  EXPECT_NEAR(law.epsilon0, std::log(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(law.atoms[0].ratio, 0.5);
}

TEST(ExactLrTest, SmallGrrValue) {
  // GRR(3, 2) from input 0 to 2: ratios (1/2, 1, 2); counts (1, 0, 1) give
  // (1/2 + 2) / 2 = 1.25.
  ASSERT_OK_AND_ASSIGN(Channel ch, Grr(3, 2.0));
  ASSERT_OK_AND_ASSIGN(double lr,
                       ExactLrFromHistogram(ch, 0, 2, Histogram{{1, 0, 1}}));
  EXPECT_DOUBLE_EQ(lr, 1.25);
  ASSERT_OK_AND_ASSIGN(LrLaw law, PairwiseLrLaw(ch, 0, 2));
  EXPECT_EQ(ErrorName(ExactLr(law, std::vector<int64_t>{1, 1})),
            "LengthMismatch");
  EXPECT_EQ(ErrorName(ExactLrFromHistogram(ch, 0, 2, Histogram{{1, 1}})),
            "LengthMismatch");
}

TEST(UniversalBoundTest, Values) {
  ASSERT_OK_AND_ASSIGN(double e_bound, UniversalBound(std::exp(1.0)));
  EXPECT_NEAR(e_bound, 1.0861612696304876, 1e-15);
  EXPECT_EQ(ErrorName(UniversalBound(1.0)), "BadLambda");
}

TEST(IsExtremalTest, HalfBlockOppositeVersusGrr) {
  ASSERT_OK_AND_ASSIGN(Channel hb, HalfBlock(6, 3.0));
  ASSERT_OK_AND_ASSIGN(LrLaw opposite, PairwiseLrLaw(hb, 1, 4));
  const ExtremalReport ext = IsExtremal(opposite, 3.0);
  EXPECT_TRUE(ext.extremal);
  EXPECT_NEAR(ext.gap, 0.0, 1e-12);
  ASSERT_OK_AND_ASSIGN(LrLaw adjacent, PairwiseLrLaw(hb, 1, 2));
  EXPECT_FALSE(IsExtremal(adjacent, 3.0).extremal);

  ASSERT_OK_AND_ASSIGN(Channel grr, Grr(3, 3.0));
  ASSERT_OK_AND_ASSIGN(LrLaw g, PairwiseLrLaw(grr, 0, 1));
  const ExtremalReport not_ext = IsExtremal(g, 3.0);
  EXPECT_FALSE(not_ext.extremal);
  EXPECT_GT(not_ext.gap, 0.1);
}

TEST(IsExtremalTest, BinaryRandomizedResponseIsExtremal) {
  ASSERT_OK_AND_ASSIGN(Channel rr, Grr(2, 4.0));
  ASSERT_OK_AND_ASSIGN(LrLaw law, PairwiseLrLaw(rr, 0, 1));
  EXPECT_TRUE(IsExtremal(law, 4.0).extremal);
}

// Properties over random channels.

class RandomChannelProperties : public ::testing::TestWithParam<int> {};

TEST_P(RandomChannelProperties, LawIdentitiesAndUniversalBound) {
  std::mt19937_64 rng(1000 + GetParam());
  std::uniform_int_distribution<int> dim(2, 6);
  std::uniform_real_distribution<double> spread(0.05, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Channel ch = RandomLdpChannel(rng, dim(rng), dim(rng), spread(rng));
    const double lambda = std::exp(LdpParameter(ch));
    const double bound = UniversalBound(lambda).value();
    for (int a = 0; a < ch.d(); ++a) {
      for (int b = 0; b < ch.d(); ++b) {
        if (a == b) continue;
        ASSERT_OK_AND_ASSIGN(LrLaw law, PairwiseLrLaw(ch, a, b));
        const double chi2 = PairwiseChi2(ch, a, b).value();
        EXPECT_NEAR(law.Mean(), 1.0, 1e-10);
        EXPECT_NEAR(law.Chi2(), chi2, 1e-10);
        // Bhatia-Davis with the law's own ratio range.
        const double r = law.RatioBound();
        EXPECT_LE(law.Chi2(), (r - 1.0) * (1.0 - 1.0 / r) + 1e-12);
        EXPECT_LE(chi2, bound + 1e-12);
        const ExtremalReport ext = IsExtremal(law, lambda);
        EXPECT_EQ(ext.extremal, std::abs(bound - chi2) <= 1e-9 * bound)
            << "chi2 " << chi2 << " bound " << bound;
        EXPECT_LE(r, lambda * (1.0 + 1e-12));
      }
    }
  }
}

TEST_P(RandomChannelProperties, QuotientLrMatchesFullHistogram) {
  std::mt19937_64 rng(2000 + GetParam());
  std::uniform_int_distribution<int> dim(2, 5);
  std::uniform_int_distribution<int> users(1, 6);
  for (int trial = 0; trial < 10; ++trial) {
    const Channel ch = RandomLdpChannel(rng, dim(rng), dim(rng));
    const int n = users(rng);
    for (int a = 0; a < ch.d(); ++a) {
      const int b = (a + 1) % ch.d();
      ASSERT_OK_AND_ASSIGN(LrLaw law, PairwiseLrLaw(ch, a, b));
      ForEachComposition(n, ch.num_outputs(),
                         [&](const std::vector<int64_t>& counts) {
                           const Histogram hist{counts};
                           const double full =
                               ExactLrFromHistogram(ch, a, b, hist).value();
                           const auto m = QuotientCounts(law, hist).value();
                           EXPECT_EQ(static_cast<int64_t>(n),
                                     std::accumulate(m.begin(), m.end(),
                                                     int64_t{0}));
                           EXPECT_NEAR(ExactLr(law, m).value(), full,
                                       1e-13 * full);
                         });
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Seeds, RandomChannelProperties,
                         ::testing::Range(0, 5));

TEST(ExtremalityTest, TwoPointLawsAreExtremal) {
  // Any channel with two outputs whose LR law is {1/l, l} attains the bound.
  for (double lambda : {1.5, 2.0, std::exp(1.0), 10.0}) {
    const double hi = lambda / (1.0 + lambda);
    ASSERT_OK_AND_ASSIGN(Channel ch, ValidateChannel(2, {}, {{hi, 1.0 - hi},
                                                            {1.0 - hi, hi}}));
    ASSERT_OK_AND_ASSIGN(LrLaw law, PairwiseLrLaw(ch, 0, 1));
    EXPECT_NEAR(law.Chi2(), UniversalBound(lambda).value(), 1e-12);
    EXPECT_TRUE(IsExtremal(law, lambda).extremal);
  }
}

}  // namespace
}  // namespace shuffle_privacy

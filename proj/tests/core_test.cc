// Copyright 2026 The clusterdp Authors
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

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "absl/strings/str_cat.h"
#include "clusterdp/extended_real.h"
#include "clusterdp/outcome_space.h"
#include "clusterdp/population.h"
#include "clusterdp/rng.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace clusterdp {
namespace {

using ::clusterdp::testing::MakePopulation;
using ::clusterdp::testing::StatusIs;
using ::clusterdp::testing::Vec;
using ::testing::ElementsAre;
using ::testing::HasSubstr;
using ::testing::IsEmpty;

TEST(ExtendedRealTest, ReciprocalAndOrdering) {
  EXPECT_TRUE(ExtendedReal(0.0).Reciprocal().is_infinite());
  EXPECT_EQ(ExtendedReal::Infinity().Reciprocal(), ExtendedReal(0.0));
  EXPECT_EQ(ExtendedReal(4.0).Reciprocal(), ExtendedReal(0.25));
  EXPECT_LT(ExtendedReal(1e300), ExtendedReal::Infinity());
  EXPECT_EQ(Min(ExtendedReal::Infinity(), 3.0), ExtendedReal(3.0));
  EXPECT_TRUE((ExtendedReal(1.0) + ExtendedReal::Infinity()).is_infinite());
  EXPECT_EQ(ExtendedReal::Infinity().ToString(), "inf");
  EXPECT_EQ(ExtendedReal(0.1).ToString(), "0.1");
}

TEST(OutcomeSpaceTest, RejectsBadValues) {
  EXPECT_THAT(OutcomeSpace::Create({1.0}),
              StatusIs(absl::StatusCode::kInvalidArgument, "at least 2"));
  EXPECT_THAT(OutcomeSpace::Create({0.0, 0.0}),
              StatusIs(absl::StatusCode::kInvalidArgument, "strictly"));
  EXPECT_THAT(OutcomeSpace::Create({1.0, 0.0}),
              StatusIs(absl::StatusCode::kInvalidArgument, "strictly"));
  EXPECT_THAT(OutcomeSpace::Create({0.0, INFINITY}),
              StatusIs(absl::StatusCode::kInvalidArgument, "finite"));
}

TEST(OutcomeSpaceTest, DerivedQuantities) {
  ASSERT_OK_AND_ASSIGN(OutcomeSpace space,
                       OutcomeSpace::Create({-3.0, 0.5, 2.0}));
  EXPECT_EQ(space.size(), 3);
  EXPECT_DOUBLE_EQ(space.max_abs(), 3.0);
  EXPECT_DOUBLE_EQ(space.sum_squares(), 9 + 0.25 + 4);
  EXPECT_DOUBLE_EQ(space.l2_norm(), std::sqrt(13.25));
  EXPECT_DOUBLE_EQ(space.mean(), -0.5 / 3);
  EXPECT_DOUBLE_EQ(space.mean_square(), 13.25 / 3);
  EXPECT_EQ(space.IndexOf(0.5), 1);
  EXPECT_EQ(space.IndexOf(0.4), std::nullopt);
  EXPECT_THAT(Vec(OutcomeSpace::IntegerRange(-1, 1).values()),
              ElementsAre(-1.0, 0.0, 1.0));
}

std::vector<PopulationRecord> Records(
    std::initializer_list<std::pair<const char*, double>> rows) {
  std::vector<PopulationRecord> out;
  int id = 0;
  for (const auto& [cluster, y] : rows) {
    out.push_back({absl::StrCat("u", id++), cluster, y, y, 0});
  }
  return out;
}

TEST(ValidatePopulationTest, WellFormedInputHasNoViolations) {
  const OutcomeSpace space = OutcomeSpace::IntegerRange(0, 1);
  auto records =
      Records({{"a", 0}, {"a", 1}, {"b", 1}, {"b", 0}, {"b", 1}});
  EXPECT_THAT(ValidatePopulation(records, space), IsEmpty());
}

TEST(ValidatePopulationTest, ReportsSmallClusterAndForeignOutcome) {
  const OutcomeSpace space = OutcomeSpace::IntegerRange(0, 1);
  auto small = Records({{"a", 0}, {"a", 1}, {"b", 1}});
  EXPECT_THAT(ValidatePopulation(small, space),
              ElementsAre(HasSubstr("cluster below minimum size 2")));
  auto foreign = Records({{"a", 0}, {"a", 7}});
  EXPECT_THAT(ValidatePopulation(foreign, space),
              ElementsAre(HasSubstr("outcome outside space"),
                          HasSubstr("outcome outside space")));
  auto duplicate = Records({{"a", 0}, {"a", 1}});
  duplicate[1].unit_id = "u0";
  EXPECT_THAT(ValidatePopulation(duplicate, space),
              ElementsAre(HasSubstr("duplicate unit")));
}

TEST(PopulationTest, FromRecordsDensifiesLabelsInOrder) {
  const OutcomeSpace space = OutcomeSpace::IntegerRange(0, 1);
  auto records = Records({{"x", 0}, {"y", 1}, {"x", 1}, {"y", 0}});
  ASSERT_OK_AND_ASSIGN(Population pop, Population::FromRecords(records, space));
  EXPECT_EQ(pop.num_clusters(), 2);
  EXPECT_THAT(Vec(pop.clusters()), ElementsAre(0, 1, 0, 1));
  EXPECT_EQ(pop.cluster_label(1), "y");
  EXPECT_THAT(Vec(pop.members(0)), ElementsAre(0, 2));
  EXPECT_EQ(pop.unit_id(3), "u3");
}

TEST(PopulationTest, AteAndSubset) {
  Population pop =
      MakePopulation(0, 3, {0, 0, 1, 1, 1}, {0, 1, 2, 0, 1}, {1, 1, 3, 2, 1});
  EXPECT_DOUBLE_EQ(pop.Ate(), (1 + 0 + 1 + 2 + 0) / 5.0);
  ASSERT_OK_AND_ASSIGN(Population sub, pop.Subset(std::vector<int>{0, 1, 3, 4}));
  EXPECT_EQ(sub.size(), 4);
  EXPECT_EQ(sub.unit_id(2), "u3");
  EXPECT_EQ(pop.Pooled().num_clusters(), 1);
  EXPECT_EQ(pop.Pooled().cluster_size(0), 5);
}

TEST(DesignTest, RejectsEmptyArms) {
  Population pop = MakePopulation(0, 1, {0, 0, 0}, {0, 0, 0}, {1, 1, 1});
  RngStream rng(1);
  EXPECT_THAT(DrawDesign(pop, ArmCounts{{0}, {3}}, rng),
              StatusIs(absl::StatusCode::kInvalidArgument, "treated count"));
  EXPECT_THAT(DrawDesign(pop, ArmCounts{{3}, {0}}, rng),
              StatusIs(absl::StatusCode::kInvalidArgument, "treated count"));
  EXPECT_THAT(CountsFromFractions(pop, std::vector<double>{0.01}),
              StatusIs(absl::StatusCode::kInvalidArgument, "treated count"));
}

TEST(DesignTest, PairClusterTreatsEachUnitHalfTheTime) {
  Population pop = MakePopulation(0, 1, {0, 0}, {0, 1}, {0, 1});
  const int kDraws = 20000;
  int first_treated = 0;
  for (int seed = 0; seed < kDraws; ++seed) {
    RngStream rng(seed);
    ASSERT_OK_AND_ASSIGN(Design d, DrawDesign(pop, BalancedCounts(pop), rng));
    ASSERT_EQ(d.z[0] + d.z[1], 1);
    first_treated += d.z[0];
  }
  EXPECT_NEAR(first_treated / double{kDraws}, 0.5,
              3 * std::sqrt(0.25 / kDraws));
}

TEST(DesignTest, AllSubsetsOfFourEquallyLikely) {
  Population pop =
      MakePopulation(0, 1, {0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0});
  const int kDraws = 60000;
  std::map<std::vector<uint8_t>, int> freq;
  RngStream rng(7);
  for (int r = 0; r < kDraws; ++r) {
    ASSERT_OK_AND_ASSIGN(Design d, DrawDesign(pop, ArmCounts{{2}, {2}}, rng));
    ++freq[d.z];
  }
  ASSERT_EQ(freq.size(), 6u);
  const double p = 1.0 / 6;
  for (const auto& [z, count] : freq) {
    EXPECT_NEAR(count / double{kDraws}, p, 3 * std::sqrt(p * (1 - p) / kDraws));
  }
}

TEST(DesignTest, ExactCountsAndDeterminism) {
  Population pop = MakePopulation(0, 1, {0, 0, 0, 1, 1, 1, 1, 1},
                                  {0, 0, 0, 0, 0, 0, 0, 0},
                                  {1, 1, 1, 1, 1, 1, 1, 1});
  ArmCounts counts{{1, 3}, {2, 2}};
  StreamFactory streams(99);
  RngStream a = streams.Stream(kAssignmentStream);
  RngStream b = streams.Stream(kAssignmentStream);
  ASSERT_OK_AND_ASSIGN(Design da, DrawDesign(pop, counts, a));
  ASSERT_OK_AND_ASSIGN(Design db, DrawDesign(pop, counts, b));
  EXPECT_EQ(da.z, db.z);
  int t0 = 0, t1 = 0;
  for (int i = 0; i < pop.size(); ++i) (pop.cluster(i) ? t1 : t0) += da.z[i];
  EXPECT_EQ(t0, 1);
  EXPECT_EQ(t1, 3);
}

TEST(ObservedDataTest, ObserveUsesAssignedArm) {
  Population pop = MakePopulation(0, 2, {0, 0}, {0, 1}, {2, 2});
  ASSERT_OK_AND_ASSIGN(Design d, DesignFromAssignment(pop, {1, 0}));
  ObservedData obs = Observe(pop, d);
  EXPECT_THAT(obs.y, ElementsAre(2, 1));
  EXPECT_EQ(obs.counts.treated[0], 1);
  EXPECT_THAT(MakeObservedData(OutcomeSpace::IntegerRange(0, 1), {0, 0},
                               {1, 1}, {0, 1}, {"a", "b"}, {"c"}),
              StatusIs(absl::StatusCode::kInvalidArgument,
                       "empty treatment arm in cluster"));
}

TEST(RngTest, NamedStreamsAreIndependentAndStable) {
  StreamFactory f(123);
  EXPECT_NE(f.DeriveSeed("laplace", 0), f.DeriveSeed("resampling", 0));
  EXPECT_NE(f.DeriveSeed("laplace", 0), f.DeriveSeed("laplace", 1));
  EXPECT_EQ(f.Child("rep", 4).DeriveSeed("x", 0),
            StreamFactory(123).Child("rep", 4).DeriveSeed("x", 0));
}

TEST(RngTest, LaplaceMoments) {
  RngStream rng(5);
  const int kDraws = 200000;
  const double b = 2.0;
  double sum = 0, sum_sq = 0, sum_abs = 0;
  for (int i = 0; i < kDraws; ++i) {
    const double x = rng.Laplace(b);
    sum += x;
    sum_sq += x * x;
    sum_abs += std::fabs(x);
  }
  // Var = 2 b^2 = 8, E|X| = b = 2, SD of the mean = sqrt(8 / n).
  EXPECT_NEAR(sum / kDraws, 0, 4 * std::sqrt(8.0 / kDraws));
  EXPECT_NEAR(sum_sq / kDraws, 8, 0.15);
  EXPECT_NEAR(sum_abs / kDraws, 2, 0.03);
  EXPECT_EQ(rng.Laplace(0.0), 0.0);
}

TEST(RngTest, StandardNormalMoments) {
  RngStream rng(11);
  const int kDraws = 200000;
  double sum = 0, sum_sq = 0;
  for (int i = 0; i < kDraws; ++i) {
    const double x = rng.StandardNormal();
    sum += x;
    sum_sq += x * x;
  }
  EXPECT_NEAR(sum / kDraws, 0, 4 / std::sqrt(kDraws));
  EXPECT_NEAR(sum_sq / kDraws, 1, 0.02);
}

}  // namespace
}  // namespace clusterdp

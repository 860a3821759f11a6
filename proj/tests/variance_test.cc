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

#include "clusterdp/variance.h"

#include <cmath>
#include <functional>
#include <vector>

#include "clusterdp/estimation.h"
#include "clusterdp/mechanisms.h"
#include "clusterdp/simdata.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace clusterdp {
namespace {

using ::clusterdp::testing::MakePopulation;
using ::clusterdp::testing::StatusIs;

// Calls `fn` with every assignment that has counts.treated[c] treated units
// in each cluster.
void ForEachAssignment(const Population& pop, const ArmCounts& counts,
                       const std::function<void(const Design&)>& fn) {
  std::vector<uint8_t> z(pop.size(), 0);
  std::function<void(int)> recurse = [&](int c) {
    if (c == pop.num_clusters()) {
      fn(Design{counts, z});
      return;
    }
    const std::span<const int> members = pop.members(c);
    const int m = static_cast<int>(members.size());
    for (int mask = 0; mask < (1 << m); ++mask) {
      if (__builtin_popcount(mask) != counts.treated[c]) continue;
      for (int j = 0; j < m; ++j) z[members[j]] = (mask >> j) & 1;
      recurse(c + 1);
    }
  };
  recurse(0);
}

double EnumeratedVariance(const Population& pop, const ArmCounts& counts) {
  std::vector<double> estimates;
  ForEachAssignment(pop, counts, [&](const Design& d) {
    estimates.push_back(TauNoDp(pop, d));
  });
  double mean = 0;
  for (double e : estimates) mean += e;
  mean /= estimates.size();
  double var = 0;
  for (double e : estimates) var += (e - mean) * (e - mean);
  return var / estimates.size();
}

Population RandomPopulation(RngStream& rng, int clusters, int min_size,
                            int max_size, int k) {
  std::vector<int> cluster, y0, y1;
  for (int c = 0; c < clusters; ++c) {
    const int size = min_size + rng.UniformIndex(max_size - min_size + 1);
    for (int i = 0; i < size; ++i) {
      cluster.push_back(c);
      y0.push_back(rng.UniformIndex(k));
      y1.push_back(rng.UniformIndex(k));
    }
  }
  absl::StatusOr<Population> pop = Population::Create(
      OutcomeSpace::IntegerRange(0, k - 1), cluster, y0, y1);
  return *std::move(pop);
}

ArmCounts RandomCounts(RngStream& rng, const Population& pop) {
  ArmCounts counts;
  for (int c = 0; c < pop.num_clusters(); ++c) {
    const int n = pop.cluster_size(c);
    counts.treated.push_back(1 + rng.UniformIndex(n - 1));
    counts.control.push_back(n - counts.treated.back());
  }
  return counts;
}

struct Moments {
  double mean;
  double variance;
};

Moments MomentsOf(const std::vector<double>& x) {
  double mean = 0;
  for (double v : x) mean += v;
  mean /= x.size();
  double var = 0;
  for (double v : x) var += (v - mean) * (v - mean);
  return {mean, var / (x.size() - 1)};
}

TEST(SampleVarianceTest, Examples) {
  ASSERT_OK_AND_ASSIGN(double pair, SampleVariance(std::vector<double>{1, 3}));
  EXPECT_DOUBLE_EQ(pair, 2.0);
  ASSERT_OK_AND_ASSIGN(double flat, SampleVariance(std::vector<double>{4, 4, 4}));
  EXPECT_DOUBLE_EQ(flat, 0.0);
  ASSERT_OK_AND_ASSIGN(double v, SampleVariance(std::vector<double>{0, 1, 2, 3}));
  EXPECT_DOUBLE_EQ(v, 5.0 / 3);
  EXPECT_THAT(SampleVariance(std::vector<double>{1}),
              StatusIs(absl::StatusCode::kInvalidArgument, ""));
}

TEST(HtVarianceTest, Examples) {
  Population pair = MakePopulation(0, 1, {0, 0}, {0, 1}, {0, 1});
  ArmCounts counts = BalancedCounts(pair);
  ASSERT_OK_AND_ASSIGN(double v, HtVariance(pair, counts));
  EXPECT_DOUBLE_EQ(v, 1.0);
  EXPECT_DOUBLE_EQ(EnumeratedVariance(pair, counts), 1.0);
  Population constant =
      MakePopulation(0, 5, {0, 0, 0, 1, 1, 1}, {1, 1, 1, 3, 3, 3},
                     {2, 2, 2, 5, 5, 5});
  ASSERT_OK_AND_ASSIGN(double zero, HtVariance(constant, BalancedCounts(constant)));
  EXPECT_DOUBLE_EQ(zero, 0.0);
}

TEST(HtVarianceTest, MatchesEnumerationOnRandomPopulations) {
  RngStream rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const Population pop = RandomPopulation(rng, 1 + trial % 2, 2, 6, 4);
    const ArmCounts counts = RandomCounts(rng, pop);
    ASSERT_OK_AND_ASSIGN(double formula, HtVariance(pop, counts));
    EXPECT_NEAR(formula, EnumeratedVariance(pop, counts), 1e-12);
  }
}

TEST(HomogeneityTest, Examples) {
  Population pop = MakePopulation(0, 1, {0, 0, 0, 0}, {0, 0, 1, 1}, {0, 0, 1, 1});
  ASSERT_OK_AND_ASSIGN(double phi0, Homogeneity(pop, BalancedCounts(pop), 0));
  EXPECT_DOUBLE_EQ(phi0, 1.0 / 6);
  Population constant =
      MakePopulation(0, 5, {0, 0, 1, 1}, {1, 1, 3, 3}, {2, 2, 5, 5});
  for (int arm : {0, 1}) {
    ASSERT_OK_AND_ASSIGN(double phi,
                         Homogeneity(constant, BalancedCounts(constant), arm));
    EXPECT_DOUBLE_EQ(phi, 0.0);
  }
}

TEST(HomogeneityTest, GmmWithFullClusterDependenceHasNoWithinClusterSpread) {
  GmmConfig config;
  config.beta = config.v;
  config.cluster_sizes = {10, 20, 30};
  RngStream rng(3);
  ASSERT_OK_AND_ASSIGN(Population pop, GenGmm(config, rng));
  for (int arm : {0, 1}) {
    ASSERT_OK_AND_ASSIGN(double phi, Homogeneity(pop, BalancedCounts(pop), arm));
    EXPECT_DOUBLE_EQ(phi, 0.0);
  }
}

MechanismParams Params(double gamma, ExtendedReal sigma, double lambda) {
  MechanismParams p;
  p.gamma = gamma;
  p.sigma = sigma;
  p.lambda = lambda;
  return p;
}

TEST(AOfXTest, GoldenValue) {
  const OutcomeSpace binary = OutcomeSpace::IntegerRange(0, 1);
  ASSERT_OK_AND_ASSIGN(double product, AOfX(10, binary, Params(0.1, 1.0, 0.0)));
  EXPECT_NEAR(product, 3.282801698980032, 1e-14);
  ASSERT_OK_AND_ASSIGN(double sum, AOfX(10, binary, Params(0.1, 1.0, 0.0),
                                              AOfXVariant::kSum));
  EXPECT_NEAR(sum, 3.829935315476704, 1e-14);
}

TEST(AOfXTest, Limits) {
  const OutcomeSpace space = OutcomeSpace::IntegerRange(-2, 3);
  ASSERT_OK_AND_ASSIGN(double zero, AOfX(5, space, Params(0.0, 0.0, 0.3)));
  EXPECT_EQ(zero, 0.0);
  ASSERT_OK_AND_ASSIGN(double tiny, AOfX(5, space, Params(0.0, 1e-9, 0.3)));
  EXPECT_LT(tiny, 1e-6);
  ASSERT_OK_AND_ASSIGN(double infinite,
                       AOfX(5, space, Params(0.1, ExtendedReal::Infinity(), 0.3)));
  ASSERT_OK_AND_ASSIGN(double huge, AOfX(5, space, Params(0.1, 1e9, 0.3)));
  EXPECT_TRUE(std::isfinite(infinite));
  EXPECT_NEAR(infinite, huge, 1e-6 * infinite);
  ASSERT_OK_AND_ASSIGN(double gamma_only, AOfX(5, space, Params(0.1, 0.0, 0.3)));
  ASSERT_OK_AND_ASSIGN(double small_sigma, AOfX(5, space, Params(0.1, 1e-6, 0.3)));
  EXPECT_NEAR(gamma_only, small_sigma, 1e-9 * gamma_only);
  EXPECT_THAT(AOfX(5, space, Params(0.1, 1.0, 1.0)),
              StatusIs(absl::StatusCode::kInvalidArgument, ""));
}

TEST(AOfXTest, NonDecreasingInGamma) {
  const OutcomeSpace space = OutcomeSpace::IntegerRange(0, 4);
  for (double sigma : {0.1, 1.0, 10.0}) {
    for (double x : {1.0, 7.0, 100.0}) {
      double previous = 0;
      for (int i = 0; i <= 200; ++i) {
        const double gamma = 0.2 * i / 200;
        ASSERT_OK_AND_ASSIGN(double a, AOfX(x, space, Params(gamma, sigma, 0.0)));
        EXPECT_GE(a, previous - 1e-12) << sigma << " " << x << " " << gamma;
        previous = a;
      }
    }
  }
}

TEST(VarianceBoundTest, TrivialEqualityAndComponents) {
  Population pop = MakePopulation(0, 2, {0, 0, 0, 0, 1, 1, 1},
                                  {0, 1, 2, 2, 1, 0, 0}, {1, 2, 2, 0, 2, 1, 0});
  const ArmCounts counts = BalancedCounts(pop);
  ASSERT_OK_AND_ASSIGN(VarianceReport report,
                       ClusterDpVarianceBound(pop, counts, Params(0, 0.0, 0)));
  ASSERT_OK_AND_ASSIGN(double ht, HtVariance(pop, counts));
  EXPECT_EQ(report.kind, VarianceKind::kUpperBound);
  EXPECT_DOUBLE_EQ(report.no_dp_variance, ht);
  EXPECT_DOUBLE_EQ(report.value, ht);
  EXPECT_DOUBLE_EQ(report.component("gap_bound"), 0.0);

  ASSERT_OK_AND_ASSIGN(VarianceReport noisy,
                       ClusterDpVarianceBound(pop, counts, Params(0.1, 2.0, 0.5)));
  ASSERT_OK_AND_ASSIGN(double phi0, Homogeneity(pop, counts, 0));
  ASSERT_OK_AND_ASSIGN(double phi1, Homogeneity(pop, counts, 1));
  EXPECT_DOUBLE_EQ(noisy.component("homogeneity_term"), 3 * (phi0 + phi1));
  double a_term = 0;
  for (int c = 0; c < 2; ++c) {
    const double w = pop.cluster_size(c) / 7.0;
    for (int arm : {0, 1}) {
      const double x = counts.count(c, arm);
      ASSERT_OK_AND_ASSIGN(double a, AOfX(x, pop.space(), Params(0.1, 2.0, 0.5)));
      a_term += w * w * a / x;
    }
  }
  EXPECT_NEAR(noisy.component("a_term"), a_term, 1e-12);
  EXPECT_NEAR(noisy.value, ht + 3 * (phi0 + phi1) + a_term, 1e-12);
  EXPECT_TRUE(std::isnan(noisy.component("missing")));
}

// Monte Carlo gap of the debiased estimator over (design, mechanism) draws.
Moments ClusterDpMcVariance(const Population& pop, const ArmCounts& counts,
                            const MechanismParams& params, int reps,
                            uint64_t seed) {
  std::vector<double> estimates(reps);
  StreamFactory root(seed);
  for (int r = 0; r < reps; ++r) {
    const StreamFactory streams = root.Child("rep", r);
    RngStream rng = streams.Stream(kAssignmentStream);
    absl::StatusOr<Design> d = DrawDesign(pop, counts, rng);
    absl::StatusOr<PrivatizedRelease> release =
        Privatize(Observe(pop, *d), params, streams);
    estimates[r] = TauQ(*release)->estimate;
  }
  return MomentsOf(estimates);
}

TEST(VarianceBoundTest, ContainsMonteCarloGapOnSmallPopulations) {
  RngStream rng(21);
  const MechanismParams params = Params(0.05, 1.0, 0.3);
  for (int trial = 0; trial < 10; ++trial) {
    const Population pop = RandomPopulation(rng, 2, 4, 8, 3);
    const ArmCounts counts = RandomCounts(rng, pop);
    ASSERT_OK_AND_ASSIGN(VarianceReport bound,
                         ClusterDpVarianceBound(pop, counts, params));
    const int kReps = 20000;
    const Moments mc = ClusterDpMcVariance(pop, counts, params, kReps, trial);
    const double gap = mc.variance - bound.no_dp_variance;
    const double se = mc.variance * std::sqrt(3.0 / kReps);
    EXPECT_GE(gap, -4 * se) << trial;
    EXPECT_LE(gap, bound.component("gap_bound") + 4 * se) << trial;
  }
}

TEST(UniformPriorVarianceTest, ZeroLambdaIsHt) {
  RngStream rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Population pop = RandomPopulation(rng, 3, 2, 7, 5);
    const ArmCounts counts = RandomCounts(rng, pop);
    ASSERT_OK_AND_ASSIGN(double ht, HtVariance(pop, counts));
    ASSERT_OK_AND_ASSIGN(double uniform, UniformPriorVariance(pop, counts, 0, true));
    EXPECT_NEAR(uniform, ht, 1e-12);
    ASSERT_OK_AND_ASSIGN(double pooled_ht,
                         HtVariance(pop.Pooled(), PooledCounts(counts)));
    ASSERT_OK_AND_ASSIGN(double pooled,
                         UniformPriorVariance(pop, counts, 0, false));
    EXPECT_NEAR(pooled, pooled_ht, 1e-12);
  }
  Population pop = MakePopulation(0, 1, {0, 0}, {0, 1}, {0, 1});
  EXPECT_THAT(UniformPriorVariance(pop, BalancedCounts(pop), 1.0, true),
              StatusIs(absl::StatusCode::kInvalidArgument, ""));
}

TEST(UniformPriorVarianceTest, BinaryReduction) {
  RngStream rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const Population pop = RandomPopulation(rng, 1 + trial % 3, 2, 9, 2);
    const ArmCounts counts = RandomCounts(rng, pop);
    const double lambda = 0.95 * rng.Uniform();
    const ArmCounts pooled = PooledCounts(counts);
    ASSERT_OK_AND_ASSIGN(double no_dp, HtVariance(pop.Pooled(), pooled));
    ASSERT_OK_AND_ASSIGN(double general,
                         UniformPriorVariance(pop, counts, lambda, false));
    EXPECT_NEAR(general,
                UniformPriorVarianceBinary(no_dp, pooled.control[0],
                                           pooled.treated[0], lambda),
                1e-12 * std::max(1.0, general));
  }
}

void ExpectUniformMatchesMonteCarlo(const Population& pop,
                                    const ArmCounts& counts, double lambda,
                                    bool stratified, uint64_t seed) {
  const Population design_pop = stratified ? pop : pop.Pooled();
  const ArmCounts design_counts = stratified ? counts : PooledCounts(counts);
  const int kReps = 200000;
  std::vector<double> estimates(kReps);
  StreamFactory root(seed);
  for (int r = 0; r < kReps; ++r) {
    const StreamFactory streams = root.Child("rep", r);
    RngStream rng = streams.Stream(kAssignmentStream);
    absl::StatusOr<Design> d = DrawDesign(design_pop, design_counts, rng);
    absl::StatusOr<PrivatizedRelease> release =
        UniformPriorDp(Observe(design_pop, *d), lambda, streams);
    estimates[r] = *TauUniform(*release, stratified);
  }
  ASSERT_OK_AND_ASSIGN(double formula,
                       UniformPriorVariance(pop, counts, lambda, stratified));
  EXPECT_NEAR(MomentsOf(estimates).variance, formula, 0.03 * formula)
      << "stratified " << stratified << " seed " << seed;
}

TEST(UniformPriorVarianceTest, MatchesMonteCarlo) {
  RngStream rng(7);
  for (int fixture = 0; fixture < 5; ++fixture) {
    const Population pop = RandomPopulation(rng, 3, 6, 6, 4);
    const ArmCounts counts = BalancedCounts(pop);
    for (bool stratified : {true, false}) {
      ExpectUniformMatchesMonteCarlo(pop, counts, 0.5, stratified, fixture);
    }
  }
}

TEST(UniformPriorVarianceTest, ReportComponents) {
  Population pop = MakePopulation(0, 3, {0, 0, 0, 0, 1, 1, 1, 1},
                                  {0, 1, 2, 3, 3, 2, 0, 0},
                                  {1, 2, 3, 3, 3, 3, 1, 0});
  ASSERT_OK_AND_ASSIGN(
      VarianceReport report,
      UniformPriorVarianceReport(pop, BalancedCounts(pop), 0.4, true));
  EXPECT_EQ(report.kind, VarianceKind::kExact);
  EXPECT_NEAR(report.value,
              report.no_dp_variance + report.component("resampling_term") +
                  report.component("cluster_term"),
              1e-12);
}

TEST(BaselineGapsTest, Examples) {
  const ArmCounts counts{{2}, {2}};
  ASSERT_OK_AND_ASSIGN(BaselineGapValues binary,
                       BaselineGaps(counts, OutcomeSpace::IntegerRange(0, 1), 1));
  EXPECT_DOUBLE_EQ(binary.noisy_ht, 0.5);
  EXPECT_DOUBLE_EQ(binary.noisy_histogram, 1.0);
  EXPECT_THAT(BaselineGaps(counts, OutcomeSpace::IntegerRange(0, 1), 0),
              StatusIs(absl::StatusCode::kInvalidArgument, ""));
}

TEST(BaselineGapsTest, NoisyHtDominates) {
  RngStream rng(8);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 2 + rng.UniformIndex(10);
    std::vector<double> values(k);
    for (double& v : values) v = 10 * rng.Uniform() - 5;
    absl::StatusOr<OutcomeSpace> space = OutcomeSpace::Create(values);
    if (!space.ok()) continue;
    ArmCounts counts;
    for (int c = 0; c < 1 + trial % 4; ++c) {
      counts.treated.push_back(1 + rng.UniformIndex(20));
      counts.control.push_back(1 + rng.UniformIndex(20));
    }
    ASSERT_OK_AND_ASSIGN(BaselineGapValues gaps,
                         BaselineGaps(counts, *space, 0.1 + rng.Uniform()));
    EXPECT_LE(gaps.noisy_ht, gaps.noisy_histogram * (1 + 1e-12));
  }
}

TEST(BaselineGapsTest, MatchesMonteCarloAddedVariance) {
  Population pop = MakePopulation(-1, 2, {0, 0, 0, 0, 0, 1, 1, 1},
                                  {-1, 0, 2, 1, 1, 2, 0, -1},
                                  {0, 0, 2, 2, 1, 2, 1, 0});
  ASSERT_OK_AND_ASSIGN(Design d,
                       DesignFromAssignment(pop, {1, 0, 1, 0, 0, 1, 0, 1}));
  const ObservedData obs = Observe(pop, d);
  const double eps = 0.7;
  ASSERT_OK_AND_ASSIGN(BaselineGapValues gaps,
                       BaselineGaps(d.counts, pop.space(), eps));
  const int kReps = 200000;
  std::vector<double> ht(kReps), hist(kReps);
  StreamFactory root(99);
  for (int r = 0; r < kReps; ++r) {
    const StreamFactory streams = root.Child("rep", r);
    ht[r] = NoisyHt(obs, eps, streams)->estimate;
    hist[r] = NoisyHistogram(obs, eps, streams)->estimate;
  }
  EXPECT_NEAR(MomentsOf(ht).variance, gaps.noisy_ht, 0.03 * gaps.noisy_ht);
  EXPECT_NEAR(MomentsOf(hist).variance, gaps.noisy_histogram,
              0.03 * gaps.noisy_histogram);
}

}  // namespace
}  // namespace clusterdp

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

#include "clusterdp/mechanisms.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "boost/math/distributions/chi_squared.hpp"
#include "clusterdp/accounting.h"
#include "clusterdp/estimation.h"
#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace clusterdp {
namespace {

using ::clusterdp::testing::MakePopulation;
using ::clusterdp::testing::StatusIs;
using ::clusterdp::testing::Vec;
using ::testing::DoubleNear;
using ::testing::ElementsAre;
using ::testing::Pointwise;

ObservedData ObserveAll(const Population& pop, std::vector<uint8_t> z) {
  absl::StatusOr<Design> d = DesignFromAssignment(pop, std::move(z));
  EXPECT_TRUE(d.ok()) << d.status();
  return Observe(pop, *d);
}

// n units in one cluster, all with outcome index y under both arms; the
// first half is treated.
ObservedData ConstantCluster(int k, int n, int y) {
  std::vector<int> cluster(n, 0), outcome(n, y);
  Population pop = MakePopulation(0, k - 1, cluster, outcome, outcome);
  std::vector<uint8_t> z(n, 0);
  std::fill(z.begin(), z.begin() + n / 2, 1);
  return ObserveAll(pop, z);
}

MechanismParams Params(MechanismKind kind, double gamma, ExtendedReal sigma,
                       double lambda) {
  MechanismParams p;
  p.kind = kind;
  p.gamma = gamma;
  p.sigma = sigma;
  p.lambda = lambda;
  return p;
}

std::vector<int> Frequencies(const PrivatizedRelease& release) {
  std::vector<int> freq(release.space.size(), 0);
  for (int y : release.y_tilde) ++freq[y];
  return freq;
}

TEST(EmpiricalHistogramTest, Counting) {
  Population pop = MakePopulation(0, 1, {0, 0, 0, 0, 0, 0, 0},
                                  {0, 0, 1, 0, 1, 1, 1}, {0, 0, 1, 0, 1, 1, 1});
  ObservedData obs = ObserveAll(pop, {1, 1, 1, 0, 0, 0, 0});
  ASSERT_OK_AND_ASSIGN(ArmHistogram treated, EmpiricalHistogram(obs, 0, 1));
  EXPECT_THAT(treated.p_hat, ElementsAre(2.0 / 3, 1.0 / 3));
  EXPECT_EQ(treated.n, 3);
  ASSERT_OK_AND_ASSIGN(ArmHistogram control, EmpiricalHistogram(obs, 0, 0));
  EXPECT_THAT(control.p_hat, ElementsAre(0.25, 0.75));
  ObservedData constant = ConstantCluster(3, 4, 2);
  ASSERT_OK_AND_ASSIGN(ArmHistogram indicator,
                       EmpiricalHistogram(constant, 0, 0));
  EXPECT_THAT(indicator.p_hat, ElementsAre(0.0, 0.0, 1.0));
}

TEST(EmpiricalHistogramTest, EmptyArmIsAnError) {
  ObservedData obs = ConstantCluster(2, 4, 0);
  obs.z = {0, 0, 0, 0};
  EXPECT_THAT(EmpiricalHistogram(obs, 0, 1),
              StatusIs(absl::StatusCode::kInvalidArgument,
                       "empty treatment arm in cluster"));
}

TEST(PerturbClipTest, InjectedNoise) {
  // sigma / n_ac = 1 makes the injected draws the additive noise itself.
  EXPECT_THAT(PerturbClip(std::vector<double>{0.9, 0.1}, 0.2, 1.0, 1,
                          std::vector<double>{0.3, -0.3}),
              Pointwise(DoubleNear(1e-15), {1.0, 0.2}));
  EXPECT_THAT(PerturbClip(std::vector<double>{0.5, 0.5}, 0.5, 1.0, 1,
                          std::vector<double>{-0.4, 0.6}),
              ElementsAre(0.5, 1.0));
  EXPECT_THAT(PerturbClip(std::vector<double>{0.7, 0.3, 0.0}, 0.1, 0.0, 5,
                          std::vector<double>{9.0, -9.0, 9.0}),
              ElementsAre(0.7, 0.3, 0.1));
}

TEST(PerturbClipTest, InfiniteSigmaIgnoresData) {
  std::vector<double> noise = {0.2, -1.5, 3.0};
  EXPECT_THAT(PerturbClip(std::vector<double>{0.0, 1.0, 0.0}, 0.1,
                          ExtendedReal::Infinity(), 3, noise),
              ElementsAre(1.0, 0.1, 1.0));
  EXPECT_THAT(PerturbClip(std::vector<double>{1.0, 0.0, 0.0}, 0.1,
                          ExtendedReal::Infinity(), 3, noise),
              ElementsAre(1.0, 0.1, 1.0));
}

TEST(RenormalizeTest, BothBranches) {
  EXPECT_THAT(Renormalize(std::vector<double>{0.5, 0.6}, 0.1),
              Pointwise(DoubleNear(1e-15), {0.4555555555555556,
                                            0.5444444444444444}));
  EXPECT_THAT(Renormalize(std::vector<double>{0.2, 0.3}, 0.1),
              Pointwise(DoubleNear(1e-15), {0.4666666666666667,
                                            0.5333333333333333}));
  EXPECT_THAT(Renormalize(std::vector<double>{0.25, 0.75}, 0.1),
              ElementsAre(0.25, 0.75));
  // K gamma = 1 with every entry at gamma: sum is exactly 1, no division.
  EXPECT_THAT(Renormalize(std::vector<double>{0.5, 0.5}, 0.5),
              ElementsAre(0.5, 0.5));
}

TEST(ClusterDpTest, PriorInvariantsOverManyRuns) {
  RngStream data_rng(3);
  for (int run = 0; run < 10000; ++run) {
    const int k = 2 + static_cast<int>(data_rng.UniformIndex(11));
    const int n = 4 + static_cast<int>(data_rng.UniformIndex(20));
    std::vector<int> cluster(n), y(n);
    std::vector<uint8_t> z(n);
    for (int i = 0; i < n; ++i) {
      cluster[i] = i % 2;
      y[i] = static_cast<int>(data_rng.UniformIndex(k));
      z[i] = (i / 2) % 2;
    }
    Population pop = MakePopulation(0, k - 1, cluster, y, y);
    ObservedData obs = ObserveAll(pop, z);
    const double gamma = data_rng.Uniform() / k;
    const ExtendedReal sigma =
        run % 7 == 0 ? ExtendedReal::Infinity() : 10 * data_rng.Uniform();
    MechanismParams params = Params(
        run % 2 ? MechanismKind::kClusterDp : MechanismKind::kClusterFreeDp,
        gamma, sigma, 0.5);
    ASSERT_OK_AND_ASSIGN(PrivatizedRelease release,
                         Privatize(obs, params, StreamFactory(run)));
    for (int c = 0; c < 2; ++c) {
      for (int a = 0; a < 2; ++a) {
        auto q = release.prior.row(c, a);
        for (double v : q) ASSERT_GE(v, gamma);
        ASSERT_NEAR(std::accumulate(q.begin(), q.end(), 0.0), 1.0, 1e-12);
      }
    }
  }
}

TEST(ClusterDpTest, ZeroLambdaReleasesTruth) {
  Population pop = MakePopulation(0, 4, {0, 0, 0, 1, 1, 1},
                                  {0, 1, 2, 3, 4, 0}, {1, 2, 3, 4, 0, 1});
  ObservedData obs = ObserveAll(pop, {1, 0, 1, 0, 1, 0});
  for (MechanismKind kind :
       {MechanismKind::kClusterDp, MechanismKind::kClusterFreeDp,
        MechanismKind::kUniformPriorDp}) {
    ASSERT_OK_AND_ASSIGN(
        PrivatizedRelease release,
        Privatize(obs, Params(kind, 0.05, 1.0, 0.0), StreamFactory(8)));
    EXPECT_EQ(release.y_tilde, obs.y);
  }
}

TEST(ClusterDpTest, GammaOneOverKForcesUniformPrior) {
  RngStream rng(17);
  for (int run = 0; run < 200; ++run) {
    const int k = 2 + run % 11;
    std::vector<int> cluster(12), y(12);
    std::vector<uint8_t> z(12);
    for (int i = 0; i < 12; ++i) {
      cluster[i] = i / 6;
      y[i] = static_cast<int>(rng.UniformIndex(k));
      z[i] = i % 2;
    }
    ObservedData obs = ObserveAll(MakePopulation(0, k - 1, cluster, y, y), z);
    const ExtendedReal sigma =
        run % 3 == 0 ? ExtendedReal::Infinity() : ExtendedReal(run * 0.1);
    ASSERT_OK_AND_ASSIGN(
        ProjectedPrior prior,
        ComputePrior(obs, Params(MechanismKind::kClusterDp, 1.0 / k, sigma, 0.5),
                     DrawLaplace(StreamFactory(run), 2 * 2 * k)));
    for (double v : prior.data()) EXPECT_NEAR(v, 1.0 / k, 1e-15);
  }
}

TEST(ClusterDpTest, FullResamplingWithUniformPriorIsUniform) {
  const int k = 4, n = 50000;
  ObservedData obs = ConstantCluster(k, n, 1);
  ASSERT_OK_AND_ASSIGN(
      PrivatizedRelease release,
      Privatize(obs, Params(MechanismKind::kClusterDp, 1.0 / k, 0.0, 1.0),
                StreamFactory(21)));
  const double p = 1.0 / k;
  for (int count : Frequencies(release)) {
    EXPECT_NEAR(count / double{n}, p, 3 * std::sqrt(p * (1 - p) / n));
  }
}

TEST(ClusterDpTest, GammaOneOverKMatchesUniformPriorInDistribution) {
  const int k = 5, n = 50000;
  std::vector<int> cluster(n, 0), y(n);
  std::vector<uint8_t> z(n);
  for (int i = 0; i < n; ++i) {
    y[i] = i % 3;
    z[i] = i % 2;
  }
  ObservedData obs = ObserveAll(MakePopulation(0, k - 1, cluster, y, y), z);
  ASSERT_OK_AND_ASSIGN(
      PrivatizedRelease cluster_dp,
      Privatize(obs, Params(MechanismKind::kClusterDp, 1.0 / k, 2.0, 0.6),
                StreamFactory(1)));
  ASSERT_OK_AND_ASSIGN(PrivatizedRelease uniform,
                       UniformPriorDp(obs, 0.6, StreamFactory(2)));
  // Two-sample chi-square homogeneity test over the K categories.
  std::vector<int> a = Frequencies(cluster_dp), b = Frequencies(uniform);
  double chi2 = 0;
  for (int j = 0; j < k; ++j) {
    const double expected = (a[j] + b[j]) / 2.0;
    chi2 += (a[j] - expected) * (a[j] - expected) / expected +
            (b[j] - expected) * (b[j] - expected) / expected;
  }
  boost::math::chi_squared dist(k - 1);
  EXPECT_GT(boost::math::cdf(boost::math::complement(dist, chi2)), 1e-3)
      << "chi2 = " << chi2;
}

TEST(ClusterDpTest, ClusterFreeSharesOnePriorPerArm) {
  Population pop = MakePopulation(0, 2, {0, 0, 0, 0, 1, 1, 1, 1},
                                  {0, 0, 1, 1, 2, 2, 2, 1},
                                  {0, 1, 1, 2, 2, 2, 1, 1});
  ObservedData obs = ObserveAll(pop, {1, 0, 1, 0, 1, 0, 1, 0});
  ASSERT_OK_AND_ASSIGN(
      PrivatizedRelease release,
      Privatize(obs, Params(MechanismKind::kClusterFreeDp, 0.05, 1.0, 0.5),
                StreamFactory(4)));
  for (int a = 0; a < 2; ++a) {
    EXPECT_EQ(Vec(release.prior.row(0, a)), Vec(release.prior.row(1, a)));
    EXPECT_EQ(Vec(release.debias.row(0, a)), Vec(release.debias.row(1, a)));
  }
  EXPECT_EQ(release.cluster, obs.cluster);
}

TEST(ClusterDpTest, SameSeedSameRelease) {
  Population pop = MakePopulation(0, 3, {0, 0, 0, 1, 1, 1},
                                  {0, 1, 2, 3, 3, 0}, {1, 2, 3, 3, 0, 1});
  ObservedData obs = ObserveAll(pop, {1, 0, 1, 0, 1, 0});
  MechanismParams params = Params(MechanismKind::kClusterDp, 0.1, 2.0, 0.7);
  ASSERT_OK_AND_ASSIGN(PrivatizedRelease a, Privatize(obs, params, StreamFactory(5)));
  ASSERT_OK_AND_ASSIGN(PrivatizedRelease b, Privatize(obs, params, StreamFactory(5)));
  EXPECT_EQ(a.y_tilde, b.y_tilde);
  EXPECT_EQ(a.prior, b.prior);
}

// Changing one unit's label moves every prior entry of its (cluster, arm) by
// at most 2 / n_ac when the Laplace noise is held fixed.
TEST(ClusterDpTest, NeighboringPriorsAreClose) {
  RngStream rng(29);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = std::vector<int>{2, 5, 12}[trial % 3];
    const int n = 4 + static_cast<int>(rng.UniformIndex(30));
    std::vector<int> cluster(n, 0), y(n);
    std::vector<uint8_t> z(n);
    for (int i = 0; i < n; ++i) {
      y[i] = static_cast<int>(rng.UniformIndex(k));
      z[i] = i % 2;
    }
    std::vector<int> y_neighbor = y;
    const int changed = static_cast<int>(rng.UniformIndex(n));
    y_neighbor[changed] =
        (y[changed] + 1 + static_cast<int>(rng.UniformIndex(k - 1))) % k;
    ObservedData obs = ObserveAll(MakePopulation(0, k - 1, cluster, y, y), z);
    ObservedData neighbor = ObserveAll(
        MakePopulation(0, k - 1, cluster, y_neighbor, y_neighbor), z);
    MechanismParams params = Params(MechanismKind::kClusterDp,
                                    rng.Uniform() / k, 5 * rng.Uniform(), 0.5);
    std::vector<double> noise = DrawLaplace(StreamFactory(trial), 2 * k);
    ASSERT_OK_AND_ASSIGN(ProjectedPrior q, ComputePrior(obs, params, noise));
    ASSERT_OK_AND_ASSIGN(ProjectedPrior q2, ComputePrior(neighbor, params, noise));
    const int arm = z[changed];
    const double n_ac = obs.counts.count(0, arm);
    for (int j = 0; j < k; ++j) {
      ASSERT_LE(std::abs(q.row(0, arm)[j] - q2.row(0, arm)[j]),
                2 / n_ac + 1e-12)
          << "trial " << trial;
    }
  }
}

// The resampling stage satisfies 1 - l + l q(y) <= e^eps_tilde l q(y) + delta
// for the delta the accountant reports.
TEST(ClusterDpTest, ResamplingRatioAudit) {
  RngStream rng(31);
  for (int trial = 0; trial < 500; ++trial) {
    const int k = 2 + trial % 9;
    const int n = 10;
    std::vector<int> cluster(n, 0), y(n);
    std::vector<uint8_t> z(n);
    for (int i = 0; i < n; ++i) {
      y[i] = static_cast<int>(rng.UniformIndex(k));
      z[i] = i % 2;
    }
    ObservedData obs = ObserveAll(MakePopulation(0, k - 1, cluster, y, y), z);
    MechanismParams params = Params(MechanismKind::kClusterDp,
                                    (0.01 + 0.99 * rng.Uniform()) / k,
                                    3 * rng.Uniform(), 0.05 + 0.9 * rng.Uniform());
    ASSERT_OK_AND_ASSIGN(PrivatizedRelease release,
                         Privatize(obs, params, StreamFactory(trial)));
    for (double eps_tilde : {0.1, 1.0, 3.0}) {
      const PrivacyReport report = ClusterDpEpsDelta(params, eps_tilde);
      const double l = params.lambda;
      for (int a = 0; a < 2; ++a) {
        for (double q : release.prior.row(0, a)) {
          EXPECT_LE(1 - l + l * q,
                    std::exp(eps_tilde) * l * q + report.delta + 1e-12);
        }
      }
    }
  }
}

TEST(UniformPriorDpTest, ResamplingProbability) {
  const int n = 50000;
  ObservedData obs = ConstantCluster(2, n, 1);
  ASSERT_OK_AND_ASSIGN(PrivatizedRelease release,
                       UniformPriorDp(obs, 0.5, StreamFactory(12)));
  const double p = 0.75;
  EXPECT_NEAR(Frequencies(release)[1] / double{n}, p,
              3 * std::sqrt(p * (1 - p) / n));
  ASSERT_OK_AND_ASSIGN(PrivatizedRelease full,
                       UniformPriorDp(ConstantCluster(3, n, 0), 1.0,
                                      StreamFactory(13)));
  for (int count : Frequencies(full)) {
    EXPECT_NEAR(count / double{n}, 1.0 / 3, 3 * std::sqrt(2.0 / 9 / n));
  }
  EXPECT_EQ(full.debias.num_clusters(), 0) << "lambda = 1 has no inverse";
}

ObservedData TwoByTwo() {
  Population pop = MakePopulation(0, 1, {0, 0, 0, 0}, {0, 1, 0, 1}, {1, 1, 0, 1});
  return ObserveAll(pop, {1, 1, 0, 0});
}

TEST(NoisyHtTest, InfiniteEpsilonIsExact) {
  ObservedData obs = TwoByTwo();
  ASSERT_OK_AND_ASSIGN(NoisyEstimate est,
                       NoisyHt(obs, ExtendedReal::Infinity(), StreamFactory(1)));
  EXPECT_DOUBLE_EQ(est.estimate, TauNoDp(obs));
  ASSERT_OK_AND_ASSIGN(
      NoisyEstimate hist,
      NoisyHistogram(obs, ExtendedReal::Infinity(), StreamFactory(1)));
  EXPECT_DOUBLE_EQ(hist.estimate, TauNoDp(obs));
}

TEST(NoisyHtTest, SensitivityUsesSmallerArm) {
  std::vector<int> cluster(12, 0), y(12, 3);
  Population pop = MakePopulation(-3, 6, cluster, y, y);
  ObservedData obs = ObserveAll(
      pop, {1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0});
  ASSERT_OK_AND_ASSIGN(NoisyEstimate est, NoisyHt(obs, 1.0, StreamFactory(1)));
  EXPECT_THAT(est.noise_scales, ElementsAre(6.0 / 5));
  EXPECT_THAT(NoisyHt(obs, 0.0, StreamFactory(1)),
              StatusIs(absl::StatusCode::kInvalidArgument, "epsilon"));
}

TEST(NoisyHtTest, AddedVarianceMatchesLaplace) {
  ObservedData obs = TwoByTwo();
  const double truth = TauNoDp(obs);
  const int kReps = 100000;
  double ss_ht = 0, ss_hist = 0;
  for (int r = 0; r < kReps; ++r) {
    ASSERT_OK_AND_ASSIGN(NoisyEstimate ht, NoisyHt(obs, 1.0, StreamFactory(r)));
    ASSERT_OK_AND_ASSIGN(NoisyEstimate hist,
                         NoisyHistogram(obs, 1.0, StreamFactory(r)));
    ss_ht += (ht.estimate - truth) * (ht.estimate - truth);
    ss_hist += (hist.estimate - truth) * (hist.estimate - truth);
  }
  // Laplace variance 2 b^2: b = 1/2 gives 0.5; four draws of b = 1/2 each
  // weighted by y in {0, 1} give 2 * (1/4 + 1/4) = 1.
  EXPECT_NEAR(ss_ht / kReps, 0.5, 0.5 * 0.03);
  EXPECT_NEAR(ss_hist / kReps, 1.0, 0.03);
}

}  // namespace
}  // namespace clusterdp

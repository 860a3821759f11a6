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

#ifndef CLUSTERDP_STATS_H_
#define CLUSTERDP_STATS_H_

#include <span>

namespace clusterdp {

double Mean(std::span<const double> x);

// An estimate with its standard error.
struct Estimate {
  double value = 0;
  double se = 0;
};

// Mean with the usual standard error s / sqrt(n).
Estimate MeanEstimate(std::span<const double> x);

// Sample variance (divisor n - 1) with a jackknife standard error.
Estimate VarianceJackknife(std::span<const double> x);

// Var(x) - Var(y) for paired samples, with a jackknife standard error that
// accounts for the pairing.
Estimate VarianceDifferenceJackknife(std::span<const double> x,
                                     std::span<const double> y);

// Var(x) / Var(y) for paired samples, with a jackknife standard error.
Estimate VarianceRatioJackknife(std::span<const double> x,
                                std::span<const double> y);

// Spearman rank correlation; ties get average ranks.
double Spearman(std::span<const double> x, std::span<const double> y);

struct TestResult {
  double statistic = 0;
  double p_value = 1;
};

// Anderson-Darling test of normality with estimated mean and variance. The
// statistic is the small-sample adjusted A*^2.
TestResult AndersonDarlingNormal(std::span<const double> x);

// Two-sided one-sample t-test of mean(x) = mu.
TestResult OneSampleTTest(std::span<const double> x, double mu);

}  // namespace clusterdp

#endif  // CLUSTERDP_STATS_H_

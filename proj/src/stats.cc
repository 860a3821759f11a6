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

#include "clusterdp/stats.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "boost/math/distributions/normal.hpp"
#include "boost/math/distributions/students_t.hpp"

namespace clusterdp {
namespace {

// Leave-one-out sample variances of x, from centered moments.
std::vector<double> LeaveOneOutVariances(std::span<const double> x) {
  const double n = x.size();
  const double mean = Mean(x);
  double ss = 0;
  for (double v : x) ss += (v - mean) * (v - mean);
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    const double a = x[i] - mean;
    out[i] = (ss - a * a * n / (n - 1)) / (n - 2);
  }
  return out;
}

double SampleVarianceOf(std::span<const double> x) {
  const double mean = Mean(x);
  double ss = 0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / (x.size() - 1);
}

double JackknifeSe(std::span<const double> leave_one_out) {
  const double n = leave_one_out.size();
  const double mean = Mean(leave_one_out);
  double ss = 0;
  for (double v : leave_one_out) ss += (v - mean) * (v - mean);
  return std::sqrt((n - 1) / n * ss);
}

std::vector<double> Ranks(std::span<const double> x) {
  std::vector<size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::ranges::stable_sort(order, [&](size_t a, size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double rank = (i + j) / 2.0 + 1;
    for (size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double Pearson(std::span<const double> x, std::span<const double> y) {
  const double mx = Mean(x), my = Mean(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double Mean(std::span<const double> x) {
  double sum = 0;
  for (double v : x) sum += v;
  return sum / x.size();
}

Estimate MeanEstimate(std::span<const double> x) {
  return {Mean(x), std::sqrt(SampleVarianceOf(x) / x.size())};
}

Estimate VarianceJackknife(std::span<const double> x) {
  return {SampleVarianceOf(x), JackknifeSe(LeaveOneOutVariances(x))};
}

Estimate VarianceDifferenceJackknife(std::span<const double> x,
                                     std::span<const double> y) {
  std::vector<double> vx = LeaveOneOutVariances(x);
  std::vector<double> vy = LeaveOneOutVariances(y);
  std::vector<double> diff(vx.size());
  for (size_t i = 0; i < vx.size(); ++i) diff[i] = vx[i] - vy[i];
  return {SampleVarianceOf(x) - SampleVarianceOf(y), JackknifeSe(diff)};
}

Estimate VarianceRatioJackknife(std::span<const double> x,
                                std::span<const double> y) {
  std::vector<double> vx = LeaveOneOutVariances(x);
  std::vector<double> vy = LeaveOneOutVariances(y);
  std::vector<double> ratio(vx.size());
  for (size_t i = 0; i < vx.size(); ++i) ratio[i] = vx[i] / vy[i];
  return {SampleVarianceOf(x) / SampleVarianceOf(y), JackknifeSe(ratio)};
}

double Spearman(std::span<const double> x, std::span<const double> y) {
  std::vector<double> rx = Ranks(x), ry = Ranks(y);
  return Pearson(rx, ry);
}

TestResult AndersonDarlingNormal(std::span<const double> x) {
  std::vector<double> sorted(x.begin(), x.end());
  std::ranges::sort(sorted);
  const double n = sorted.size();
  const double mean = Mean(sorted);
  const double sd = std::sqrt(SampleVarianceOf(sorted));
  const boost::math::normal standard;
  double sum = 0;
  for (size_t i = 0; i < sorted.size(); ++i) {
    const double lo = (sorted[i] - mean) / sd;
    const double hi = (sorted[sorted.size() - 1 - i] - mean) / sd;
    sum += (2.0 * i + 1) *
           (std::log(boost::math::cdf(standard, lo)) +
            std::log(boost::math::cdf(boost::math::complement(standard, hi))));
  }
  const double a2 = -n - sum / n;
  const double a = a2 * (1 + 0.75 / n + 2.25 / (n * n));
  // D'Agostino and Stephens (1986), Table 4.9.
  double p;
  if (a >= 0.6) {
    p = std::exp(1.2937 - 5.709 * a + 0.0186 * a * a);
  } else if (a >= 0.34) {
    p = std::exp(0.9177 - 4.279 * a - 1.38 * a * a);
  } else if (a >= 0.2) {
    p = 1 - std::exp(-8.318 + 42.796 * a - 59.938 * a * a);
  } else {
    p = 1 - std::exp(-13.436 + 101.14 * a - 223.73 * a * a);
  }
  return {a, std::clamp(p, 0.0, 1.0)};
}

TestResult OneSampleTTest(std::span<const double> x, double mu) {
  const Estimate m = MeanEstimate(x);
  const double t = (m.value - mu) / m.se;
  const boost::math::students_t dist(x.size() - 1.0);
  const double p = 2 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
  return {t, p};
}

}  // namespace clusterdp

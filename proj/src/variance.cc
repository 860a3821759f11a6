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

#include <algorithm>
#include <cmath>
#include <limits>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace clusterdp {
namespace {

absl::Status CheckCountsFor(const Population& pop, const ArmCounts& counts) {
  if (absl::Status s = CheckCounts(pop, counts); !s.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat("degenerate counts: ", s.message()));
  }
  return absl::OkStatus();
}

// Outcome values of cluster c under arm a (arm 2: unit-level effects).
std::vector<double> ClusterValues(const Population& pop, int c, int arm) {
  std::vector<double> out;
  for (int i : pop.members(c)) {
    if (arm == 2) {
      out.push_back(pop.y1(i) - pop.y0(i));
    } else {
      out.push_back(pop.outcome(i, arm));
    }
  }
  return out;
}

double Variance(std::span<const double> u) {
  double mean = 0;
  for (double v : u) mean += v;
  mean /= u.size();
  double ss = 0;
  for (double v : u) ss += (v - mean) * (v - mean);
  return ss / (u.size() - 1);
}

// gamma + (sigma/x)(e^{-gamma x/sigma} - e^{-x/sigma}).
double NoiseBracket(double x, double gamma, ExtendedReal sigma) {
  if (sigma.is_infinite()) return 1.0;
  const double s = sigma.value();
  if (s == 0) return gamma;
  return gamma + s / x * (std::exp(-gamma * x / s) - std::exp(-x / s));
}

}  // namespace

absl::StatusOr<double> SampleVariance(std::span<const double> u) {
  if (u.size() < 2) {
    return absl::InvalidArgumentError("sample variance needs length >= 2");
  }
  return Variance(u);
}

absl::StatusOr<double> HtVariance(const Population& pop,
                                  const ArmCounts& counts) {
  if (absl::Status s = CheckCountsFor(pop, counts); !s.ok()) return s;
  const double n = pop.size();
  double total = 0;
  for (int c = 0; c < pop.num_clusters(); ++c) {
    const double w = pop.cluster_size(c) / n;
    total += w * w *
             (Variance(ClusterValues(pop, c, 1)) / counts.treated[c] +
              Variance(ClusterValues(pop, c, 0)) / counts.control[c] -
              Variance(ClusterValues(pop, c, 2)) / pop.cluster_size(c));
  }
  return total;
}

absl::StatusOr<double> Homogeneity(const Population& pop,
                                   const ArmCounts& counts, int arm) {
  if (absl::Status s = CheckCountsFor(pop, counts); !s.ok()) return s;
  const double n = pop.size();
  double total = 0;
  for (int c = 0; c < pop.num_clusters(); ++c) {
    const double w = pop.cluster_size(c) / n;
    total += w * w * Variance(ClusterValues(pop, c, arm)) /
             counts.count(c, arm);
  }
  return total;
}

absl::StatusOr<double> AOfX(double x, const OutcomeSpace& space,
                            const MechanismParams& params,
                            AOfXVariant variant) {
  if (!(x >= 1)) return absl::InvalidArgumentError("A(x) needs x >= 1");
  const double lambda = params.lambda;
  if (!(lambda >= 0 && lambda < 1)) {
    return absl::InvalidArgumentError("A(x) needs lambda in [0, 1)");
  }
  const double k = space.size();
  const double b2 = space.max_abs() * space.max_abs();
  const double y2 = space.sum_squares();
  const double inv = 1 / ((1 - lambda) * (1 - lambda));
  const double spread = (lambda * std::sqrt(k) + 1) * (lambda * std::sqrt(k) + 1);
  const double clip = 1 - lambda * (k - 1) * params.gamma;
  double multiplier;
  if (variant == AOfXVariant::kProduct) {
    multiplier = b2 * (3 * inv + 2) + spread * inv * y2 * clip;
  } else {
    multiplier = 2 * b2 + (3 * b2 + spread + y2 * clip) * inv;
  }
  return 2 * k * NoiseBracket(x, params.gamma, params.sigma) * multiplier;
}

std::string_view VarianceKindName(VarianceKind kind) {
  switch (kind) {
    case VarianceKind::kExact:
      return "exact";
    case VarianceKind::kUpperBound:
      return "upper_bound";
    case VarianceKind::kMonteCarlo:
      return "monte_carlo";
  }
  return "unknown";
}

double VarianceReport::component(std::string_view name) const {
  for (const auto& [key, value] : components) {
    if (key == name) return value;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

absl::StatusOr<VarianceReport> ClusterDpVarianceBound(
    const Population& pop, const ArmCounts& counts,
    const MechanismParams& params, AOfXVariant variant) {
  absl::StatusOr<double> no_dp = HtVariance(pop, counts);
  if (!no_dp.ok()) return no_dp.status();
  absl::StatusOr<double> phi0 = Homogeneity(pop, counts, 0);
  absl::StatusOr<double> phi1 = Homogeneity(pop, counts, 1);
  if (!phi0.ok()) return phi0.status();
  if (!phi1.ok()) return phi1.status();
  const double lambda = params.lambda;
  if (!(lambda >= 0 && lambda < 1)) {
    return absl::InvalidArgumentError("variance bound needs lambda < 1");
  }
  const double homogeneity_term =
      (1 / ((1 - lambda) * (1 - lambda)) - 1) * (*phi0 + *phi1);
  const double n = pop.size();
  double a_term = 0;
  for (int a = 0; a < 2; ++a) {
    for (int c = 0; c < pop.num_clusters(); ++c) {
      const double w = pop.cluster_size(c) / n;
      const double x = counts.count(c, a);
      absl::StatusOr<double> ax = AOfX(x, pop.space(), params, variant);
      if (!ax.ok()) return ax.status();
      a_term += w * w * *ax / x;
    }
  }
  VarianceReport report;
  report.kind = VarianceKind::kUpperBound;
  report.no_dp_variance = *no_dp;
  report.value = *no_dp + homogeneity_term + a_term;
  report.components = {{"phi0", *phi0},
                       {"phi1", *phi1},
                       {"homogeneity_term", homogeneity_term},
                       {"a_term", a_term},
                       {"gap_bound", homogeneity_term + a_term}};
  return report;
}

ArmCounts PooledCounts(const ArmCounts& counts) {
  ArmCounts pooled;
  pooled.treated = {counts.total_treated()};
  pooled.control = {counts.total() - counts.total_treated()};
  return pooled;
}

absl::StatusOr<VarianceReport> UniformPriorVarianceReport(
    const Population& pop, const ArmCounts& counts, double lambda,
    bool stratified) {
  if (!stratified) {
    return UniformPriorVarianceReport(pop.Pooled(), PooledCounts(counts),
                                      lambda, true);
  }
  if (!(lambda >= 0 && lambda < 1)) {
    return absl::InvalidArgumentError("uniform-prior variance needs lambda < 1");
  }
  absl::StatusOr<double> no_dp = HtVariance(pop, counts);
  if (!no_dp.ok()) return no_dp.status();
  const OutcomeSpace& space = pop.space();
  const double y_bar = space.mean();
  const double scale = 1 / ((1 - lambda) * (1 - lambda));
  const double resampling =
      (lambda * space.mean_square() - lambda * lambda * y_bar * y_bar) * scale;
  const double n = pop.size();
  double resampling_term = 0;
  double cluster_term = 0;
  for (int c = 0; c < pop.num_clusters(); ++c) {
    const double nc = pop.cluster_size(c);
    const double w2 = nc * nc / (n * n);
    double mean[2] = {0, 0}, square[2] = {0, 0};
    for (int i : pop.members(c)) {
      for (int a = 0; a < 2; ++a) {
        const double y = pop.outcome(i, a);
        mean[a] += y / nc;
        square[a] += y * y / nc;
      }
    }
    const double n0 = counts.control[c], n1 = counts.treated[c];
    resampling_term += w2 * (1 / n0 + 1 / n1) * resampling;
    cluster_term +=
        w2 * (lambda / (1 - lambda) * (square[0] / n0 + square[1] / n1) -
              2 * lambda * y_bar / (1 - lambda) * (mean[0] / n0 + mean[1] / n1));
  }
  VarianceReport report;
  report.kind = VarianceKind::kExact;
  report.no_dp_variance = *no_dp;
  report.value = *no_dp + resampling_term + cluster_term;
  report.components = {{"resampling_term", resampling_term},
                       {"cluster_term", cluster_term}};
  return report;
}

absl::StatusOr<double> UniformPriorVariance(const Population& pop,
                                            const ArmCounts& counts,
                                            double lambda, bool stratified) {
  absl::StatusOr<VarianceReport> report =
      UniformPriorVarianceReport(pop, counts, lambda, stratified);
  if (!report.ok()) return report.status();
  return report->value;
}

double UniformPriorVarianceBinary(double no_dp_variance, int n0, int n1,
                                  double lambda) {
  const double n = n0 + n1;
  return no_dp_variance + n / (static_cast<double>(n0) * n1) *
                              (lambda / 2) * (1 - lambda / 2) /
                              ((1 - lambda) * (1 - lambda));
}

absl::StatusOr<BaselineGapValues> BaselineGaps(const ArmCounts& counts,
                                               const OutcomeSpace& space,
                                               double epsilon) {
  if (!(epsilon > 0)) return absl::InvalidArgumentError("epsilon must be positive");
  const double n = counts.total();
  BaselineGapValues gaps;
  for (int c = 0; c < counts.num_clusters(); ++c) {
    const double n0 = counts.control[c], n1 = counts.treated[c];
    if (n0 < 1 || n1 < 1) {
      return absl::InvalidArgumentError("degenerate counts: empty arm");
    }
    const double w = counts.cluster_size(c) / n;
    const double delta_c = space.max_abs() / std::min(n0, n1);
    gaps.noisy_ht += 2 * (w * delta_c / epsilon) * (w * delta_c / epsilon);
    gaps.noisy_histogram += w * w * (1 / (n0 * n0) + 1 / (n1 * n1));
  }
  gaps.noisy_histogram *= 2 / (epsilon * epsilon) * space.sum_squares();
  return gaps;
}

}  // namespace clusterdp

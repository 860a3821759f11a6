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
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "clusterdp/estimation.h"

namespace clusterdp {
namespace {

absl::Status EmptyArm(const ObservedData& obs, int c) {
  std::string label = obs.cluster_labels ? (*obs.cluster_labels)[c]
                                         : absl::StrCat(c);
  return absl::InvalidArgumentError(
      absl::StrCat("empty treatment arm in cluster '", label, "'"));
}

// Index of the first outcome whose cumulative prior mass exceeds u.
int InverseCdf(std::span<const double> prior, double u) {
  double cumulative = 0;
  int last_positive = 0;
  for (int j = 0; j < static_cast<int>(prior.size()); ++j) {
    if (prior[j] <= 0) continue;
    cumulative += prior[j];
    last_positive = j;
    if (u < cumulative) return j;
  }
  return last_positive;
}

ArmHistogram PooledHistogram(const ObservedData& obs, int arm) {
  ArmHistogram hist;
  hist.counts.assign(obs.space.size(), 0);
  for (int i = 0; i < obs.size(); ++i) {
    if (obs.z[i] == arm) {
      ++hist.counts[obs.y[i]];
      ++hist.n;
    }
  }
  hist.p_hat.resize(hist.counts.size());
  for (size_t y = 0; y < hist.counts.size(); ++y) {
    hist.p_hat[y] = static_cast<double>(hist.counts[y]) / hist.n;
  }
  return hist;
}

}  // namespace

absl::StatusOr<ArmHistogram> EmpiricalHistogram(const ObservedData& obs,
                                                int c, int arm) {
  ArmHistogram hist;
  hist.counts.assign(obs.space.size(), 0);
  for (int i = 0; i < obs.size(); ++i) {
    if (obs.cluster[i] == c && obs.z[i] == arm) {
      ++hist.counts[obs.y[i]];
      ++hist.n;
    }
  }
  if (hist.n == 0) return EmptyArm(obs, c);
  hist.p_hat.resize(hist.counts.size());
  for (size_t y = 0; y < hist.counts.size(); ++y) {
    hist.p_hat[y] = static_cast<double>(hist.counts[y]) / hist.n;
  }
  return hist;
}

std::vector<double> PerturbClip(std::span<const double> p_hat, double gamma,
                                ExtendedReal sigma, int n_ac,
                                std::span<const double> noise) {
  std::vector<double> q(p_hat.size());
  for (size_t y = 0; y < p_hat.size(); ++y) {
    double v = p_hat[y];
    if (sigma.is_infinite()) {
      if (noise[y] > 0) v = 1;
      if (noise[y] < 0) v = gamma;
    } else {
      v += sigma.value() / n_ac * noise[y];
    }
    q[y] = std::clamp(v, gamma, 1.0);
  }
  return q;
}

std::vector<double> Renormalize(std::span<const double> q, double gamma) {
  const int k = static_cast<int>(q.size());
  const double sum = std::accumulate(q.begin(), q.end(), 0.0);
  std::vector<double> out(q.begin(), q.end());
  if (sum == 1.0) return out;
  // sum(zeta) > 0 here: sum(q) > 1 with every q_y = gamma would need
  // K gamma > 1, and sum(q) < 1 with every q_y = 1 would need K < 1.
  if (sum > 1.0) {
    double zeta_sum = 0;
    for (double v : q) zeta_sum += v - gamma;
    const double keep = std::max(0.0, 1.0 - k * gamma) / zeta_sum;
    for (int y = 0; y < k; ++y) out[y] = gamma + (q[y] - gamma) * keep;
  } else {
    double zeta_sum = 0;
    for (double v : q) zeta_sum += 1.0 - v;
    const double fill = (1.0 - sum) / zeta_sum;
    for (int y = 0; y < k; ++y) out[y] = q[y] + (1.0 - q[y]) * fill;
  }
  return out;
}

MechanismNoise DrawMechanismNoise(const StreamFactory& streams,
                                  int num_prior_groups, int num_outcomes,
                                  int num_units) {
  MechanismNoise noise;
  noise.laplace = DrawLaplace(streams, num_prior_groups * 2 * num_outcomes);
  RngStream rng = streams.Stream(kResamplingStream);
  noise.resample.resize(num_units);
  noise.draw.resize(num_units);
  for (int i = 0; i < num_units; ++i) {
    noise.resample[i] = rng.Uniform();
    noise.draw[i] = rng.Uniform();
  }
  return noise;
}

std::vector<double> DrawLaplace(const StreamFactory& streams, int count) {
  RngStream rng = streams.Stream(kLaplaceStream);
  std::vector<double> out(count);
  for (double& w : out) w = rng.Laplace(1.0);
  return out;
}

absl::StatusOr<ProjectedPrior> ComputePrior(const ObservedData& obs,
                                            const MechanismParams& params,
                                            std::span<const double> laplace) {
  if (absl::Status s = ValidateParams(params, obs.space.size()); !s.ok()) {
    return s;
  }
  const int k = obs.space.size();
  ProjectedPrior prior(obs.num_clusters, k);
  if (params.kind == MechanismKind::kUniformPriorDp) {
    for (int c = 0; c < obs.num_clusters; ++c) {
      for (int a = 0; a < 2; ++a) std::ranges::fill(prior.mutable_row(c, a), 1.0 / k);
    }
    return prior;
  }
  const double gamma = std::min(params.gamma, 1.0 / k);
  const bool pooled = params.kind == MechanismKind::kClusterFreeDp;
  const int groups = pooled ? 1 : obs.num_clusters;
  if (laplace.size() != static_cast<size_t>(groups) * 2 * k) {
    return absl::InvalidArgumentError(absl::StrCat(
        "expected ", groups * 2 * k, " Laplace draws, got ", laplace.size()));
  }
  for (int g = 0; g < groups; ++g) {
    for (int a = 0; a < 2; ++a) {
      ArmHistogram hist;
      if (pooled) {
        hist = PooledHistogram(obs, a);
        if (hist.n == 0) return EmptyArm(obs, 0);
      } else {
        absl::StatusOr<ArmHistogram> h = EmpiricalHistogram(obs, g, a);
        if (!h.ok()) return h.status();
        hist = *std::move(h);
      }
      std::vector<double> q = Renormalize(
          PerturbClip(hist.p_hat, gamma, params.sigma, hist.n,
                      laplace.subspan((static_cast<size_t>(g) * 2 + a) * k, k)),
          gamma);
      if (pooled) {
        for (int c = 0; c < obs.num_clusters; ++c) {
          std::ranges::copy(q, prior.mutable_row(c, a).begin());
        }
      } else {
        std::ranges::copy(q, prior.mutable_row(g, a).begin());
      }
    }
  }
  return prior;
}

absl::StatusOr<PrivatizedRelease> Resample(const ObservedData& obs,
                                           const MechanismParams& params,
                                           ProjectedPrior prior,
                                           std::span<const double> resample,
                                           std::span<const double> draw) {
  if (resample.size() != static_cast<size_t>(obs.size()) ||
      draw.size() != static_cast<size_t>(obs.size())) {
    return absl::InvalidArgumentError("one resampling draw needed per unit");
  }
  PrivatizedRelease release;
  release.space = obs.space;
  release.params = params;
  release.num_clusters = obs.num_clusters;
  release.unit_ids = obs.unit_ids;
  release.cluster_labels = obs.cluster_labels;
  release.cluster = obs.cluster;
  release.z = obs.z;
  release.y_tilde.resize(obs.size());
  for (int i = 0; i < obs.size(); ++i) {
    release.y_tilde[i] =
        resample[i] < params.lambda
            ? InverseCdf(prior.row(obs.cluster[i], obs.z[i]), draw[i])
            : obs.y[i];
  }
  if (params.lambda < 1) {
    absl::StatusOr<ArmTable> debias =
        DebiasTable(obs.space, prior, params.lambda);
    if (!debias.ok()) return debias.status();
    release.debias = *std::move(debias);
  }
  release.prior = std::move(prior);
  return release;
}

absl::StatusOr<PrivatizedRelease> ClusterDpWithNoise(
    const ObservedData& obs, const MechanismParams& params,
    const MechanismNoise& noise) {
  absl::StatusOr<ProjectedPrior> prior = ComputePrior(obs, params, noise.laplace);
  if (!prior.ok()) return prior.status();
  return Resample(obs, params, *std::move(prior), noise.resample, noise.draw);
}

absl::StatusOr<PrivatizedRelease> Privatize(const ObservedData& obs,
                                            const MechanismParams& params,
                                            const StreamFactory& streams) {
  if (!UsesPrior(params.kind)) {
    return absl::InvalidArgumentError(absl::StrCat(
        std::string(KindName(params.kind)), " releases a scalar, not privatized outcomes"));
  }
  int groups = 0;
  if (params.kind == MechanismKind::kClusterDp) groups = obs.num_clusters;
  if (params.kind == MechanismKind::kClusterFreeDp) groups = 1;
  MechanismNoise noise =
      DrawMechanismNoise(streams, groups, obs.space.size(), obs.size());
  return ClusterDpWithNoise(obs, params, noise);
}

absl::StatusOr<PrivatizedRelease> ClusterDp(const ObservedData& obs,
                                            const MechanismParams& params,
                                            const StreamFactory& streams) {
  if (params.kind != MechanismKind::kClusterDp &&
      params.kind != MechanismKind::kClusterFreeDp) {
    return absl::InvalidArgumentError(
        "expected cluster-dp or cluster-free-dp parameters");
  }
  return Privatize(obs, params, streams);
}

absl::StatusOr<PrivatizedRelease> UniformPriorDp(const ObservedData& obs,
                                                 double lambda,
                                                 const StreamFactory& streams) {
  MechanismParams params;
  params.kind = MechanismKind::kUniformPriorDp;
  params.gamma = 1.0 / obs.space.size();
  params.sigma = ExtendedReal::Infinity();
  params.lambda = lambda;
  return Privatize(obs, params, streams);
}

absl::StatusOr<NoisyEstimate> NoisyHtWithNoise(const ObservedData& obs,
                                               ExtendedReal epsilon,
                                               std::span<const double> noise) {
  if (epsilon.is_finite() && !(epsilon.value() > 0)) {
    return absl::InvalidArgumentError("epsilon must be positive");
  }
  if (noise.size() != static_cast<size_t>(obs.num_clusters)) {
    return absl::InvalidArgumentError("one Laplace draw needed per cluster");
  }
  std::vector<double> values(obs.size());
  for (int i = 0; i < obs.size(); ++i) values[i] = obs.space.value(obs.y[i]);
  NoisyEstimate out;
  out.estimate =
      StratifiedDifference(obs.cluster, obs.z, values, obs.counts);
  const double n = obs.size();
  for (int c = 0; c < obs.num_clusters; ++c) {
    const int m = std::min(obs.counts.treated[c], obs.counts.control[c]);
    if (m < 1) return EmptyArm(obs, c);
    const double sensitivity = obs.space.max_abs() / m;
    const double scale =
        epsilon.is_infinite() ? 0.0 : sensitivity / epsilon.value();
    out.noise_scales.push_back(scale);
    // The cluster's contrast enters with weight n_c / n, and so does its
    // noise term.
    out.estimate += obs.counts.cluster_size(c) / n * scale * noise[c];
  }
  return out;
}

absl::StatusOr<NoisyEstimate> NoisyHistogramWithNoise(
    const ObservedData& obs, ExtendedReal epsilon,
    std::span<const double> noise) {
  if (epsilon.is_finite() && !(epsilon.value() > 0)) {
    return absl::InvalidArgumentError("epsilon must be positive");
  }
  const int k = obs.space.size();
  if (noise.size() != static_cast<size_t>(obs.num_clusters) * 2 * k) {
    return absl::InvalidArgumentError(
        "one Laplace draw needed per (cluster, arm, outcome)");
  }
  NoisyEstimate out;
  const double n = obs.size();
  for (int c = 0; c < obs.num_clusters; ++c) {
    double contrast = 0;
    for (int a = 0; a < 2; ++a) {
      absl::StatusOr<ArmHistogram> hist = EmpiricalHistogram(obs, c, a);
      if (!hist.ok()) return hist.status();
      const double scale =
          epsilon.is_infinite() ? 0.0 : 1.0 / (hist->n * epsilon.value());
      out.noise_scales.push_back(scale);
      double mean = 0;
      for (int y = 0; y < k; ++y) {
        const double p = hist->p_hat[y] +
                         scale * noise[(static_cast<size_t>(c) * 2 + a) * k + y];
        mean += obs.space.value(y) * p;
      }
      contrast += a == 1 ? mean : -mean;
    }
    out.estimate += obs.counts.cluster_size(c) / n * contrast;
  }
  return out;
}

absl::StatusOr<NoisyEstimate> NoisyHt(const ObservedData& obs,
                                      ExtendedReal epsilon,
                                      const StreamFactory& streams) {
  return NoisyHtWithNoise(obs, epsilon,
                          DrawLaplace(streams, obs.num_clusters));
}

absl::StatusOr<NoisyEstimate> NoisyHistogram(const ObservedData& obs,
                                             ExtendedReal epsilon,
                                             const StreamFactory& streams) {
  return NoisyHistogramWithNoise(
      obs, epsilon,
      DrawLaplace(streams, obs.num_clusters * 2 * obs.space.size()));
}

}  // namespace clusterdp

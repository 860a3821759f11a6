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

#include "clusterdp/estimation.h"

#include <algorithm>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"

namespace clusterdp {
namespace {

absl::Status CheckLambda(double lambda) {
  if (!(lambda >= 0 && lambda <= 1)) {
    return absl::InvalidArgumentError("lambda must lie in [0, 1]");
  }
  if (lambda == 1) {
    return absl::FailedPreconditionError("randomization matrix singular");
  }
  return absl::OkStatus();
}

std::vector<double> Values(const OutcomeSpace& space,
                           std::span<const int> indices) {
  std::vector<double> values(indices.size());
  for (size_t i = 0; i < indices.size(); ++i) {
    values[i] = space.value(indices[i]);
  }
  return values;
}

ArmCounts CountsOf(std::span<const int> cluster, std::span<const uint8_t> z,
                   int num_clusters) {
  ArmCounts counts;
  counts.treated.assign(num_clusters, 0);
  counts.control.assign(num_clusters, 0);
  for (size_t i = 0; i < cluster.size(); ++i) {
    (z[i] ? counts.treated : counts.control)[cluster[i]]++;
  }
  return counts;
}

}  // namespace

absl::StatusOr<Eigen::MatrixXd> BuildQ(std::span<const double> prior,
                                       double lambda) {
  if (absl::Status s = CheckLambda(lambda); !s.ok()) return s;
  const int k = static_cast<int>(prior.size());
  Eigen::MatrixXd q(k, k);
  for (int row = 0; row < k; ++row) {
    for (int col = 0; col < k; ++col) {
      q(row, col) = lambda * prior[row] + (row == col ? 1 - lambda : 0.0);
    }
  }
  return q;
}

absl::StatusOr<Eigen::MatrixXd> InvertQ(std::span<const double> prior,
                                        double lambda) {
  if (absl::Status s = CheckLambda(lambda); !s.ok()) return s;
  const int k = static_cast<int>(prior.size());
  Eigen::MatrixXd inv(k, k);
  for (int row = 0; row < k; ++row) {
    for (int col = 0; col < k; ++col) {
      inv(row, col) =
          ((row == col ? 1.0 : 0.0) - lambda * prior[row]) / (1 - lambda);
    }
  }
  return inv;
}

absl::StatusOr<std::vector<double>> DebiasRow(const OutcomeSpace& space,
                                              std::span<const double> prior,
                                              double lambda) {
  if (absl::Status s = CheckLambda(lambda); !s.ok()) return s;
  if (static_cast<int>(prior.size()) != space.size()) {
    return absl::InvalidArgumentError("prior length differs from K");
  }
  double prior_mean = 0;
  for (int j = 0; j < space.size(); ++j) {
    prior_mean += space.value(j) * prior[j];
  }
  std::vector<double> row(space.size());
  for (int j = 0; j < space.size(); ++j) {
    row[j] = (space.value(j) - lambda * prior_mean) / (1 - lambda);
  }
  return row;
}

absl::StatusOr<double> DebiasValue(const OutcomeSpace& space,
                                   std::span<const double> prior,
                                   double lambda, int y_tilde) {
  if (y_tilde < 0 || y_tilde >= space.size()) {
    return absl::OutOfRangeError(absl::StrCat("outcome index ", y_tilde));
  }
  absl::StatusOr<std::vector<double>> row = DebiasRow(space, prior, lambda);
  if (!row.ok()) return row.status();
  return (*row)[y_tilde];
}

absl::StatusOr<ArmTable> DebiasTable(const OutcomeSpace& space,
                                     const ProjectedPrior& prior,
                                     double lambda) {
  ArmTable table(prior.num_clusters(), space.size());
  for (int c = 0; c < prior.num_clusters(); ++c) {
    for (int a = 0; a < 2; ++a) {
      absl::StatusOr<std::vector<double>> row =
          DebiasRow(space, prior.row(c, a), lambda);
      if (!row.ok()) return row.status();
      std::ranges::copy(*row, table.mutable_row(c, a).begin());
    }
  }
  return table;
}

double StratifiedDifference(std::span<const int> cluster,
                            std::span<const uint8_t> z,
                            std::span<const double> values,
                            const ArmCounts& counts,
                            std::vector<double>* per_cluster) {
  const int num_clusters = counts.num_clusters();
  std::vector<double> treated(num_clusters, 0.0), control(num_clusters, 0.0);
  for (size_t i = 0; i < values.size(); ++i) {
    (z[i] ? treated : control)[cluster[i]] += values[i];
  }
  const double n = counts.total();
  double total = 0;
  if (per_cluster != nullptr) per_cluster->assign(num_clusters, 0.0);
  for (int c = 0; c < num_clusters; ++c) {
    const double contribution =
        counts.cluster_size(c) / n *
        (treated[c] / counts.treated[c] - control[c] / counts.control[c]);
    if (per_cluster != nullptr) (*per_cluster)[c] = contribution;
    total += contribution;
  }
  return total;
}

absl::StatusOr<TauEstimate> TauQ(const PrivatizedRelease& release) {
  const ArmTable& debias = release.debias;
  if (debias.num_clusters() != release.num_clusters ||
      debias.num_outcomes() != release.space.size()) {
    return absl::FailedPreconditionError("missing debias row");
  }
  std::vector<double> values(release.size());
  for (int i = 0; i < release.size(); ++i) {
    values[i] =
        debias.row(release.cluster[i], release.z[i])[release.y_tilde[i]];
  }
  const ArmCounts counts = release.Counts();
  for (int c = 0; c < counts.num_clusters(); ++c) {
    if (counts.treated[c] < 1 || counts.control[c] < 1) {
      return absl::FailedPreconditionError(
          absl::StrCat("empty treatment arm in cluster ", c));
    }
  }
  TauEstimate out;
  out.estimate = StratifiedDifference(release.cluster, release.z, values,
                                      counts, &out.cluster_contributions);
  return out;
}

double TauNoDp(const ObservedData& obs) {
  return StratifiedDifference(obs.cluster, obs.z, Values(obs.space, obs.y),
                              obs.counts);
}

double TauNoDpUnstratified(const ObservedData& obs) {
  std::vector<int> pooled(obs.size(), 0);
  return StratifiedDifference(pooled, obs.z, Values(obs.space, obs.y),
                              CountsOf(pooled, obs.z, 1));
}

double TauNoDp(const Population& pop, const Design& design) {
  return TauNoDp(Observe(pop, design));
}

double TauNoDpUnstratified(const Population& pop, const Design& design) {
  return TauNoDpUnstratified(Observe(pop, design));
}

absl::StatusOr<double> TauUniform(const PrivatizedRelease& release,
                                  bool stratified) {
  const double lambda = release.params.lambda;
  if (absl::Status s = CheckLambda(lambda); !s.ok()) return s;
  std::vector<double> values = Values(release.space, release.y_tilde);
  double diff;
  if (stratified) {
    diff = StratifiedDifference(release.cluster, release.z, values,
                                release.Counts());
  } else {
    std::vector<int> pooled(release.size(), 0);
    diff = StratifiedDifference(pooled, release.z, values,
                                CountsOf(pooled, release.z, 1));
  }
  return diff / (1 - lambda);
}

ArmCounts PrivatizedRelease::Counts() const {
  return CountsOf(cluster, z, num_clusters);
}

}  // namespace clusterdp

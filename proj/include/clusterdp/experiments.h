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

#ifndef CLUSTERDP_EXPERIMENTS_H_
#define CLUSTERDP_EXPERIMENTS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "clusterdp/accounting.h"
#include "clusterdp/extended_real.h"
#include "clusterdp/params.h"
#include "clusterdp/population.h"
#include "clusterdp/simdata.h"
#include "clusterdp/stats.h"
#include "clusterdp/variance.h"
#include "json.hpp"

namespace clusterdp {

inline constexpr std::string_view kVersion = "0.1.0";

// A tidy result table. Cells are preformatted so that output is
// byte-identical across runs.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string ToCsv() const;
};

struct ExperimentOutput {
  std::string name;
  // (file stem, table) pairs, written as <stem>.csv.
  std::vector<std::pair<std::string, Table>> tables;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<std::string> warnings;
};

struct RunOptions {
  uint64_t seed = 0;
  int threads = 1;
};

struct PopulationSource {
  enum class Kind { kGmm, kGraph, kCsv };
  Kind kind = Kind::kGmm;
  GmmConfig gmm;
  GraphPopConfig graph;
  std::string path;
  std::string outcomes;
};

// The GMM source at desk scale (clusters of 125, 250 and 500 units).
PopulationSource DeskGmm();

absl::StatusOr<PopulationSource> ParsePopulationSource(const nlohmann::json& j);
// Same, but the source kind defaults to that of `defaults`, and fields not
// named in `j` are taken from `defaults` when the kinds agree.
absl::StatusOr<PopulationSource> ParsePopulationSource(
    const nlohmann::json& j, const PopulationSource& defaults);

// Generates or reads the population, using the "population" stream of
// `streams` for generators.
absl::StatusOr<Population> LoadPopulation(const PopulationSource& source,
                                          const StreamFactory& streams);

// Monte Carlo variance and bias of one estimator, with jackknife and
// standard-error bars.
struct McSummary {
  Estimate variance;
  Estimate bias;
};

McSummary Summarize(const std::vector<double>& estimates, double truth);

// ---------------------------------------------------------------------------
// Variance sweep: mechanisms calibrated to the same (epsilon, delta) over a
// grid of truncation levels and Laplace scales.

struct VarianceSweepConfig {
  PopulationSource population = DeskGmm();
  std::vector<std::string> mechanisms = {"cluster-dp", "cluster-free-dp",
                                         "uniform-prior-dp"};
  std::vector<double> epsilons = {0.2};
  double delta = 1e-4;
  std::vector<ExtendedReal> sigmas = {10.0};
  std::vector<double> gamma_over_k = {0.1, 0.25, 0.5, 0.75, 1.0};
  int reps = 500;
};

struct SweepRow {
  std::string mechanism;  // a mechanism kind name or "no-dp"
  std::string estimator;  // "debiased", "stratified" or "unstratified"
  double epsilon_target = 0;
  double delta_target = 0;
  double gamma_over_k = 0;
  MechanismParams params;
  std::optional<PrivacyReport> privacy;
  std::string status = "ok";  // calibration failures are recorded here
  McSummary mc;
  std::optional<VarianceKind> theory_kind;
  double theory = 0;
  std::vector<double> estimates;
};

// var(lower) - var(higher) on paired replications.
struct Comparison {
  double epsilon = 0;
  ExtendedReal sigma;
  double gamma_over_k = 0;
  std::string lower;
  std::string higher;
  Estimate difference;
};

struct VarianceSweepResult {
  int num_units = 0;
  int num_outcomes = 0;
  double ate = 0;
  double phi0 = 0;
  double phi1 = 0;
  std::vector<SweepRow> rows;
  std::vector<Comparison> comparisons;
};

absl::StatusOr<VarianceSweepConfig> ParseVarianceSweepConfig(
    const nlohmann::json& j);
// The graph experiment is the same sweep over a community-graph population.
absl::StatusOr<VarianceSweepConfig> ParseGraphSweepConfig(
    const nlohmann::json& j);
absl::StatusOr<VarianceSweepResult> RunVarianceSweep(
    const VarianceSweepConfig& config, const RunOptions& options);

// ---------------------------------------------------------------------------
// Homogeneity sweep: Var(Cluster-DP) / Var(Cluster-Free-DP) against beta.

struct HomogeneitySweepConfig {
  PopulationSource population = DeskGmm();
  std::vector<double> betas = {0, 1, 2, 3, 4, 4.5};
  std::vector<double> lambdas = {0.5, 0.8};
  double gamma_over_k = 0.1;
  // Desk-scale arms are 4x smaller than full scale; 2.5 keeps the prior
  // noise sigma / n_ac at its full-scale level for sigma = 10.
  ExtendedReal sigma = 2.5;
  int reps = 500;
};

struct HomogeneityRow {
  double beta = 0;
  double lambda = 0;
  double phi0 = 0;
  double phi1 = 0;
  McSummary cluster_dp;
  McSummary cluster_free;
  Estimate ratio;
};

struct HomogeneitySweepResult {
  std::vector<HomogeneityRow> rows;
  // Spearman correlation of beta against the ratio, per lambda.
  std::vector<std::pair<double, double>> spearman;
};

absl::StatusOr<HomogeneitySweepConfig> ParseHomogeneitySweepConfig(
    const nlohmann::json& j);
absl::StatusOr<HomogeneitySweepResult> RunHomogeneitySweep(
    const HomogeneitySweepConfig& config, const RunOptions& options);

// ---------------------------------------------------------------------------
// Bound validation: Monte Carlo variance gap of the debiased Cluster-DP
// estimator against the homogeneity term and the full upper bound.

struct BoundValidationConfig {
  PopulationSource population = DeskGmm();
  std::vector<double> betas = {0, 2, 4, 4.5};
  double lambda = 0.8;
  double gamma = 0.02;
  ExtendedReal sigma = 10.0;
  int reps = 500;
};

struct BoundRow {
  double beta = 0;
  double no_dp_variance = 0;
  Estimate gap;
  double lower = 0;  // homogeneity term of the bound
  double bound = 0;
  bool contained = false;  // -2 SE <= gap <= bound
};

absl::StatusOr<BoundValidationConfig> ParseBoundValidationConfig(
    const nlohmann::json& j);
absl::StatusOr<std::vector<BoundRow>> RunBoundValidation(
    const BoundValidationConfig& config, const RunOptions& options);

// ---------------------------------------------------------------------------
// Distribution check: samples of tau_hat - tau, normality and bias tests.

struct DistributionConfig {
  PopulationSource population = DeskGmm();
  MechanismParams params = {.kind = MechanismKind::kClusterDp,
                            .gamma = 0.02,
                            .sigma = 10.0,
                            .lambda = 0.8};
  int reps = 500;
};

struct DistributionResult {
  double ate = 0;
  std::vector<double> errors;
  Estimate mean_error;
  TestResult normality;
  TestResult bias_test;
};

absl::StatusOr<DistributionConfig> ParseDistributionConfig(
    const nlohmann::json& j);
absl::StatusOr<DistributionResult> RunDistributionCheck(
    const DistributionConfig& config, const RunOptions& options);

// ---------------------------------------------------------------------------
// Baseline bias: mechanism noise is drawn once per realization on a
// superpopulation and held fixed while subpopulations and assignments are
// redrawn.

struct BaselineBiasConfig {
  PopulationSource population = [] {
    PopulationSource s;
    s.gmm.cluster_sizes = {500, 1000, 2000};
    return s;
  }();
  std::vector<int> subsample_sizes = {125, 250, 500};
  std::vector<double> epsilons = {0.25, 0.5, 1, 2, 4};
  double delta = 0;
  double gamma_over_k = 0.1;
  ExtendedReal sigma = 10.0;
  int noise_realizations = 50;
  int subpopulations = 500;
};

struct BiasRow {
  double epsilon = 0;
  std::string estimator;  // "cluster-dp", "noisy-ht" or "noisy-histogram"
  std::string status = "ok";
  double lambda = 0;
  std::vector<double> biases;  // one per noise realization
  Estimate bias;
  Estimate abs_bias;
};

struct BaselineBiasResult {
  double ate = 0;
  std::vector<BiasRow> rows;
  std::vector<std::string> warnings;
};

absl::StatusOr<BaselineBiasConfig> ParseBaselineBiasConfig(
    const nlohmann::json& j);
absl::StatusOr<BaselineBiasResult> RunBaselineBias(
    const BaselineBiasConfig& config, const RunOptions& options);

// ---------------------------------------------------------------------------

std::vector<std::string> ExperimentNames();

// Parses `config` for the named experiment, runs it and tabulates the result.
absl::StatusOr<ExperimentOutput> RunExperiment(std::string_view name,
                                               const nlohmann::json& config,
                                               const RunOptions& options);

// FNV-1a hash of the compact JSON serialization, as 16 hex digits.
std::string ConfigHash(const nlohmann::json& config);

// Writes every table as <dir>/<stem>.csv and a manifest.json carrying the
// config, its hash, the seed, the thread count, the software version, the
// runtime and the summary.
absl::Status WriteExperimentOutput(const ExperimentOutput& output,
                                   const nlohmann::json& config,
                                   const RunOptions& options,
                                   double runtime_ms, const std::string& dir);

}  // namespace clusterdp

#endif  // CLUSTERDP_EXPERIMENTS_H_

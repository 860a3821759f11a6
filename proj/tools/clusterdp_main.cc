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

// Command-line front end: population generation, privatization, estimation,
// accounting, variance analysis and the experiment harness.

#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "clusterdp/accounting.h"
#include "clusterdp/csv_io.h"
#include "clusterdp/estimation.h"
#include "clusterdp/experiments.h"
#include "clusterdp/mechanisms.h"
#include "clusterdp/simdata.h"
#include "clusterdp/variance.h"
#include "json.hpp"

namespace clusterdp {
namespace {

using Json = nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitInfeasible = 3;

int Fail(const absl::Status& status) {
  std::cerr << "error: " << status.message() << "\n";
  if (status.code() == absl::StatusCode::kFailedPrecondition) {
    return kExitInfeasible;
  }
  if (status.code() == absl::StatusCode::kInvalidArgument ||
      status.code() == absl::StatusCode::kNotFound) {
    return kExitInvalid;
  }
  return kExitError;
}

Json ToJson(ExtendedReal v) {
  if (v.is_infinite()) return "inf";
  return v.value();
}

Json ReportJson(const PrivacyReport& r) {
  return {{"epsilon", ToJson(r.epsilon)},
          {"delta", r.delta},
          {"prior_budget", ToJson(r.prior_budget)},
          {"resampling_budget", ToJson(r.resampling_budget)}};
}

Json VarianceJson(const VarianceReport& r) {
  Json components = Json::object();
  for (const auto& [name, value] : r.components) components[name] = value;
  return {{"kind", std::string(VarianceKindName(r.kind))},
          {"no_dp_variance", r.no_dp_variance},
          {"value", r.value},
          {"components", components}};
}

absl::StatusOr<ExtendedReal> ParseSigma(const std::string& text) {
  if (text == "inf") return ExtendedReal::Infinity();
  double v;
  if (!absl::SimpleAtod(text, &v)) {
    return absl::InvalidArgumentError(
        absl::StrCat("sigma must be a number or 'inf', got '", text, "'"));
  }
  return ExtendedReal(v);
}

absl::Status WriteFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  out << contents;
  if (!out) return absl::InvalidArgumentError(absl::StrCat("cannot write ", path));
  return absl::OkStatus();
}

// Mechanism flags shared by privatize, account, calibrate and analyze.
struct MechanismFlags {
  std::string mechanism = "cluster-dp";
  double gamma = 0;
  std::string sigma = "0";
  double lambda = 0;
  std::optional<double> epsilon;
  double delta = 0;

  void Register(CLI::App* app, bool with_targets) {
    app->add_option("--mechanism", mechanism,
                    "cluster-dp, cluster-free-dp, uniform-prior-dp, noisy-ht "
                    "or noisy-histogram")
        ->capture_default_str();
    app->add_option("--gamma", gamma, "truncation threshold")
        ->capture_default_str();
    app->add_option("--sigma", sigma, "Laplace scale, or 'inf'")
        ->capture_default_str();
    app->add_option("--lambda", lambda, "resampling probability")
        ->capture_default_str();
    if (with_targets) {
      app->add_option("--epsilon", epsilon,
                      "target epsilon; calibrates lambda when set");
      app->add_option("--delta", delta, "target delta")->capture_default_str();
    }
  }

  // Parameters, calibrated to (epsilon, delta) when a target was given.
  absl::StatusOr<MechanismParams> Params(int num_outcomes) const {
    absl::StatusOr<MechanismKind> kind = ParseKind(mechanism);
    if (!kind.ok()) return kind.status();
    absl::StatusOr<ExtendedReal> s = ParseSigma(sigma);
    if (!s.ok()) return s.status();
    MechanismParams params;
    params.kind = *kind;
    params.gamma = gamma;
    params.sigma = *s;
    params.lambda = lambda;
    if (params.kind == MechanismKind::kUniformPriorDp) {
      params.gamma = 1.0 / num_outcomes;
      params.sigma = ExtendedReal::Infinity();
    }
    if (epsilon.has_value()) {
      absl::StatusOr<MechanismParams> calibrated =
          Calibrate(params, *epsilon, delta, num_outcomes);
      if (!calibrated.ok()) return calibrated.status();
      params = *calibrated;
    }
    if (absl::Status st = ValidateParams(params, num_outcomes); !st.ok()) {
      return st;
    }
    return params;
  }
};

// --------------------------------------------------------------------------

struct GenerateFlags {
  double beta = 4.5;
  double v = 5;
  int k_prime = 5;
  int tau = 1;
  std::vector<int> sizes = {125, 250, 500};
  std::vector<int> communities = GraphPopConfig().community_sizes;
  double p_in = GraphPopConfig().p_in;
  double p_out = GraphPopConfig().p_out;
  std::vector<double> graph_beta = {1, 1, 1, 1};
  double graph_v = GraphPopConfig().v;
  int levels = GraphPopConfig().levels;
  double graph_tau = 1;
  uint64_t seed = 0;
  std::string out;
};

int RunGenerateGmm(const GenerateFlags& f) {
  GmmConfig config;
  config.beta = f.beta;
  config.v = f.v;
  config.k_prime = f.k_prime;
  config.tau = f.tau;
  config.cluster_sizes = f.sizes;
  RngStream rng = StreamFactory(f.seed).Stream("population");
  absl::StatusOr<Population> pop = GenGmm(config, rng);
  if (!pop.ok()) return Fail(pop.status());
  std::ostringstream csv;
  WritePopulationCsv(*pop, csv);
  if (absl::Status s = WriteFile(f.out, csv.str()); !s.ok()) return Fail(s);
  std::cout << Json({{"units", pop->size()},
                     {"clusters", pop->num_clusters()},
                     {"outcomes", absl::StrCat(-f.k_prime, ":", f.k_prime + 1)},
                     {"ate", pop->Ate()}})
                   .dump()
            << "\n";
  return kExitOk;
}

int RunGenerateGraph(const GenerateFlags& f) {
  GraphPopConfig config;
  config.community_sizes = f.communities;
  config.p_in = f.p_in;
  config.p_out = f.p_out;
  if (f.graph_beta.size() != 4) {
    return Fail(absl::InvalidArgumentError("--beta needs 4 coefficients"));
  }
  std::copy(f.graph_beta.begin(), f.graph_beta.end(), config.beta.begin());
  config.v = f.graph_v;
  config.levels = f.levels;
  config.tau = f.graph_tau;
  RngStream rng = StreamFactory(f.seed).Stream("population");
  absl::StatusOr<GraphPopulation> graph = GenGraphPopulation(config, rng);
  if (!graph.ok()) return Fail(graph.status());
  std::ostringstream csv;
  WritePopulationCsv(graph->population, csv);
  if (absl::Status s = WriteFile(f.out, csv.str()); !s.ok()) return Fail(s);
  std::cout << Json({{"units", graph->population.size()},
                     {"clusters", graph->population.num_clusters()},
                     {"outcomes", absl::StrCat(0, ":", f.levels - 1)},
                     {"edges", graph->num_edges},
                     {"realized_tau", graph->realized_tau}})
                   .dump()
            << "\n";
  return kExitOk;
}

// --------------------------------------------------------------------------

struct DataFlags {
  std::string population;
  std::string observed;
  std::string outcomes;
  uint64_t seed = 0;

  void Register(CLI::App* app) {
    app->add_option("--population", population,
                    "population CSV (unit_id,cluster,y0,y1)");
    app->add_option("--observed", observed,
                    "observed-data CSV (unit_id,cluster,z,y)");
    app->add_option("--outcomes", outcomes,
                    "outcome space: 'lo:hi' or a comma-separated list")
        ->required();
    app->add_option("--seed", seed, "master seed")->capture_default_str();
  }

  // Observed data: read directly, or observed from the population under a
  // balanced completely randomized design drawn from the seed.
  absl::StatusOr<ObservedData> Load() const {
    absl::StatusOr<OutcomeSpace> space = ParseOutcomeSpace(outcomes);
    if (!space.ok()) return space.status();
    if (population.empty() == observed.empty()) {
      return absl::InvalidArgumentError(
          "give exactly one of --population and --observed");
    }
    if (!observed.empty()) return ReadObservedFile(observed, *space);
    absl::StatusOr<Population> pop = ReadPopulationFile(population, *space);
    if (!pop.ok()) return pop.status();
    RngStream rng = StreamFactory(seed).Stream(kAssignmentStream);
    absl::StatusOr<Design> design = DrawDesign(*pop, BalancedCounts(*pop), rng);
    if (!design.ok()) return design.status();
    return Observe(*pop, *design);
  }
};

int RunPrivatize(const DataFlags& data, const MechanismFlags& mech,
                 const std::string& out, const std::string& sidecar) {
  absl::StatusOr<ObservedData> obs = data.Load();
  if (!obs.ok()) return Fail(obs.status());
  absl::StatusOr<MechanismParams> params = mech.Params(obs->space.size());
  if (!params.ok()) return Fail(params.status());
  const StreamFactory streams(data.seed);
  if (!UsesPrior(params->kind)) {
    absl::StatusOr<NoisyEstimate> est =
        params->kind == MechanismKind::kNoisyHt
            ? NoisyHt(*obs, params->epsilon, streams)
            : NoisyHistogram(*obs, params->epsilon, streams);
    if (!est.ok()) return Fail(est.status());
    std::cout << Json({{"mechanism", std::string(KindName(params->kind))},
                       {"epsilon", ToJson(params->epsilon)},
                       {"estimate", est->estimate},
                       {"noise_scales", est->noise_scales}})
                     .dump(2)
              << "\n";
    return kExitOk;
  }
  if (out.empty() || sidecar.empty()) {
    return Fail(absl::InvalidArgumentError(
        "--out and --sidecar are required for outcome-releasing mechanisms"));
  }
  absl::StatusOr<PrivatizedRelease> release = Privatize(*obs, *params, streams);
  if (!release.ok()) return Fail(release.status());
  std::ostringstream csv;
  WriteReleaseCsv(*release, csv);
  if (absl::Status s = WriteFile(out, csv.str()); !s.ok()) return Fail(s);
  if (absl::Status s = WriteFile(sidecar, ReleaseSidecarJson(*release));
      !s.ok()) {
    return Fail(s);
  }
  absl::StatusOr<PrivacyReport> report = Account(*params, obs->space.size());
  if (!report.ok()) return Fail(report.status());
  std::cout << Json({{"units", release->size()},
                     {"lambda", params->lambda},
                     {"pure_privacy", ReportJson(*report)}})
                   .dump(2)
            << "\n";
  return kExitOk;
}

int RunEstimate(const std::string& release_path,
                const std::string& sidecar_path) {
  absl::StatusOr<PrivatizedRelease> release =
      ReadReleaseFiles(release_path, sidecar_path);
  if (!release.ok()) return Fail(release.status());
  absl::StatusOr<TauEstimate> est = TauQ(*release);
  if (!est.ok()) return Fail(est.status());
  Json clusters = Json::array();
  for (int c = 0; c < release->num_clusters; ++c) {
    clusters.push_back({{"cluster", (*release->cluster_labels)[c]},
                        {"contribution", est->cluster_contributions[c]}});
  }
  std::cout << Json({{"mechanism", std::string(KindName(release->params.kind))},
                     {"estimate", est->estimate},
                     {"clusters", clusters}})
                   .dump(2)
            << "\n";
  return kExitOk;
}

int RunAccount(const MechanismFlags& mech, int k,
               std::optional<double> eps_tilde) {
  absl::StatusOr<MechanismParams> params = mech.Params(k);
  if (!params.ok()) return Fail(params.status());
  absl::StatusOr<PrivacyReport> report = Account(*params, k, eps_tilde);
  if (!report.ok()) return Fail(report.status());
  std::cout << ReportJson(*report).dump(2) << "\n";
  return kExitOk;
}

int RunCalibrate(const MechanismFlags& mech, int k) {
  if (!mech.epsilon.has_value()) {
    return Fail(absl::InvalidArgumentError("--epsilon is required"));
  }
  absl::StatusOr<MechanismParams> params = mech.Params(k);
  if (!params.ok()) return Fail(params.status());
  std::optional<double> eps_tilde;
  if (params->kind == MechanismKind::kClusterDp ||
      params->kind == MechanismKind::kClusterFreeDp) {
    eps_tilde = *mech.epsilon - PriorBudget(params->gamma, params->sigma).value();
  } else if (params->kind == MechanismKind::kUniformPriorDp) {
    eps_tilde = *mech.epsilon;
  }
  absl::StatusOr<PrivacyReport> report = Account(*params, k, eps_tilde);
  if (!report.ok()) return Fail(report.status());
  std::cout << Json({{"lambda", params->lambda}, {"report", ReportJson(*report)}})
                   .dump(2)
            << "\n";
  return kExitOk;
}

int RunAnalyze(const std::string& population, const std::string& outcomes,
               const MechanismFlags& mech, bool sum_form) {
  absl::StatusOr<OutcomeSpace> space = ParseOutcomeSpace(outcomes);
  if (!space.ok()) return Fail(space.status());
  absl::StatusOr<Population> pop = ReadPopulationFile(population, *space);
  if (!pop.ok()) return Fail(pop.status());
  absl::StatusOr<MechanismParams> params = mech.Params(space->size());
  if (!params.ok()) return Fail(params.status());
  const ArmCounts counts = BalancedCounts(*pop);
  absl::StatusOr<double> phi0 = Homogeneity(*pop, counts, 0);
  absl::StatusOr<double> phi1 = Homogeneity(*pop, counts, 1);
  if (!phi0.ok()) return Fail(phi0.status());
  if (!phi1.ok()) return Fail(phi1.status());
  Json out = {{"mechanism", std::string(KindName(params->kind))},
              {"phi0", *phi0},
              {"phi1", *phi1}};
  switch (params->kind) {
    case MechanismKind::kClusterDp:
    case MechanismKind::kClusterFreeDp: {
      const bool pooled = params->kind == MechanismKind::kClusterFreeDp;
      absl::StatusOr<VarianceReport> report = ClusterDpVarianceBound(
          *pop, counts, *params,
          sum_form ? AOfXVariant::kSum : AOfXVariant::kProduct);
      if (!report.ok()) return Fail(report.status());
      out["variance"] = VarianceJson(*report);
      if (pooled) {
        out["note"] = "bound evaluated with the cluster-level prior terms";
      }
      break;
    }
    case MechanismKind::kUniformPriorDp: {
      for (bool stratified : {true, false}) {
        absl::StatusOr<VarianceReport> report = UniformPriorVarianceReport(
            *pop, counts, params->lambda, stratified);
        if (!report.ok()) return Fail(report.status());
        out[stratified ? "variance" : "variance_unstratified"] =
            VarianceJson(*report);
      }
      break;
    }
    default: {
      absl::StatusOr<double> ht = HtVariance(*pop, counts);
      if (!ht.ok()) return Fail(ht.status());
      absl::StatusOr<BaselineGapValues> gaps =
          BaselineGaps(counts, *space, params->epsilon.value());
      if (!gaps.ok()) return Fail(gaps.status());
      const double gap = params->kind == MechanismKind::kNoisyHt
                             ? gaps->noisy_ht
                             : gaps->noisy_histogram;
      out["variance"] = {{"kind", "exact"},
                         {"no_dp_variance", *ht},
                         {"value", *ht + gap},
                         {"components", {{"noise_gap", gap}}}};
      break;
    }
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int RunExperimentCommand(const std::string& name, const std::string& config_path,
                         const RunOptions& options, const std::string& out) {
  Json config = Json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      return Fail(absl::InvalidArgumentError(
          absl::StrCat("cannot open ", config_path)));
    }
    try {
      config = Json::parse(in);
    } catch (const Json::exception& e) {
      return Fail(absl::InvalidArgumentError(
          absl::StrCat("malformed config: ", e.what())));
    }
  }
  const auto start = std::chrono::steady_clock::now();
  absl::StatusOr<ExperimentOutput> output =
      RunExperiment(name, config, options);
  if (!output.ok()) return Fail(output.status());
  const double runtime_ms = std::chrono::duration<double, std::milli>(
                                std::chrono::steady_clock::now() - start)
                                .count();
  for (const std::string& w : output->warnings) {
    std::cerr << "warning: " << w << "\n";
  }
  if (absl::Status s =
          WriteExperimentOutput(*output, config, options, runtime_ms, out);
      !s.ok()) {
    return Fail(s);
  }
  std::cout << Json({{"experiment", output->name},
                     {"out", out},
                     {"runtime_ms", runtime_ms},
                     {"summary", output->summary}})
                   .dump(2)
            << "\n";
  return kExitOk;
}

int Main(int argc, char** argv) {
  CLI::App app{"Cluster-level label-DP mechanisms for randomized experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  int exit_code = kExitOk;

  GenerateFlags gen;
  CLI::App* generate = app.add_subcommand("generate", "generate a population");
  generate->require_subcommand(1);
  CLI::App* gmm = generate->add_subcommand("gmm", "Gaussian-mixture clusters");
  gmm->add_option("--beta", gen.beta, "cluster dependence")->capture_default_str();
  gmm->add_option("--v", gen.v, "response variance")->capture_default_str();
  gmm->add_option("--kprime", gen.k_prime, "half-width K'")->capture_default_str();
  gmm->add_option("--tau", gen.tau, "additive effect (0 or 1)")
      ->capture_default_str();
  gmm->add_option("--sizes", gen.sizes, "cluster sizes")
      ->delimiter(',')
      ->capture_default_str();
  gmm->add_option("--seed", gen.seed, "master seed")->capture_default_str();
  gmm->add_option("--out", gen.out, "output CSV")->required();
  gmm->callback([&] { exit_code = RunGenerateGmm(gen); });
  CLI::App* graph = generate->add_subcommand("graph", "community graph");
  graph->add_option("--communities", gen.communities, "community sizes")
      ->delimiter(',')
      ->capture_default_str();
  graph->add_option("--pin", gen.p_in, "within-community edge probability")
      ->capture_default_str();
  graph->add_option("--pout", gen.p_out, "cross-community edge probability")
      ->capture_default_str();
  graph->add_option("--beta", gen.graph_beta, "4 feature coefficients")
      ->delimiter(',')
      ->capture_default_str();
  graph->add_option("--v", gen.graph_v, "noise standard deviation")
      ->capture_default_str();
  graph->add_option("--k", gen.levels, "quantization levels")
      ->capture_default_str();
  graph->add_option("--tau", gen.graph_tau, "additive effect")
      ->capture_default_str();
  graph->add_option("--seed", gen.seed, "master seed")->capture_default_str();
  graph->add_option("--out", gen.out, "output CSV")->required();
  graph->callback([&] { exit_code = RunGenerateGraph(gen); });

  DataFlags privatize_data;
  MechanismFlags privatize_mech;
  std::string release_out, sidecar_out;
  CLI::App* privatize =
      app.add_subcommand("privatize", "release privatized outcomes");
  privatize_data.Register(privatize);
  privatize_mech.Register(privatize, /*with_targets=*/true);
  privatize->add_option("--out", release_out, "release CSV");
  privatize->add_option("--sidecar", sidecar_out, "release JSON sidecar");
  privatize->callback([&] {
    exit_code =
        RunPrivatize(privatize_data, privatize_mech, release_out, sidecar_out);
  });

  std::string release_in, sidecar_in;
  CLI::App* estimate = app.add_subcommand("estimate", "debiased estimate");
  estimate->add_option("--release", release_in, "release CSV")->required();
  estimate->add_option("--sidecar", sidecar_in, "release JSON sidecar")
      ->required();
  estimate->callback([&] { exit_code = RunEstimate(release_in, sidecar_in); });

  MechanismFlags account_mech;
  int account_k = 2;
  std::optional<double> eps_tilde;
  CLI::App* account = app.add_subcommand("account", "privacy report");
  account_mech.Register(account, /*with_targets=*/false);
  account->add_option("--k", account_k, "number of outcomes")->required();
  account->add_option("--eps-tilde", eps_tilde,
                      "resampling budget for the (epsilon, delta) form");
  account->callback(
      [&] { exit_code = RunAccount(account_mech, account_k, eps_tilde); });

  MechanismFlags calibrate_mech;
  int calibrate_k = 2;
  CLI::App* calibrate =
      app.add_subcommand("calibrate", "lambda for a target (epsilon, delta)");
  calibrate_mech.Register(calibrate, /*with_targets=*/true);
  calibrate->add_option("--k", calibrate_k, "number of outcomes")->required();
  calibrate->callback(
      [&] { exit_code = RunCalibrate(calibrate_mech, calibrate_k); });

  MechanismFlags analyze_mech;
  std::string analyze_pop, analyze_outcomes;
  bool sum_form = false;
  CLI::App* analyze = app.add_subcommand("analyze", "variance report");
  analyze->add_option("--population", analyze_pop, "population CSV")
      ->required();
  analyze->add_option("--outcomes", analyze_outcomes, "outcome space")
      ->required();
  analyze_mech.Register(analyze, /*with_targets=*/true);
  analyze->add_flag("--a-sum-form", sum_form,
                    "add the spread and |y|^2 factors of A(x) instead of multiplying them");
  analyze->callback([&] {
    exit_code =
        RunAnalyze(analyze_pop, analyze_outcomes, analyze_mech, sum_form);
  });

  std::string experiment_name, config_path, experiment_out = ".";
  RunOptions options;
  CLI::App* experiment = app.add_subcommand("experiment", "run an experiment");
  experiment->add_option("name", experiment_name, "experiment name")
      ->required()
      ->check(CLI::IsMember(ExperimentNames()));
  experiment->add_option("--config", config_path, "JSON config");
  experiment->add_option("--seed", options.seed, "master seed")
      ->capture_default_str();
  experiment->add_option("--out", experiment_out, "output directory")
      ->capture_default_str();
  experiment->add_option("--threads", options.threads, "worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  experiment->callback([&] {
    exit_code =
        RunExperimentCommand(experiment_name, config_path, options,
                             experiment_out);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }
  return exit_code;
}

}  // namespace
}  // namespace clusterdp

int main(int argc, char** argv) { return clusterdp::Main(argc, argv); }

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

#include "clusterdp/experiments.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <span>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "clusterdp/csv_io.h"
#include "clusterdp/estimation.h"
#include "clusterdp/mechanisms.h"
#include "clusterdp/parallel.h"

namespace clusterdp {
namespace {

using Json = nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string Fmt(double v) { return std::isnan(v) ? "" : FormatDouble(v); }
std::string Fmt(ExtendedReal v) { return v.ToString(); }
std::string Fmt(int v) { return absl::StrCat(v); }

// ---------------------------------------------------------------------------
// Config parsing.

absl::Status CheckKeys(const Json& j, std::span<const std::string_view> allowed,
                       std::string_view where) {
  if (!j.is_object()) {
    return absl::InvalidArgumentError(
        absl::StrCat(std::string(where), ": expected a JSON object"));
  }
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat(std::string(where), ": unknown key '", key, "'"));
    }
  }
  return absl::OkStatus();
}

absl::Status KeyError(std::string_view key, std::string_view what) {
  return absl::InvalidArgumentError(
      absl::StrCat("config key '", std::string(key), "': ", std::string(what)));
}

absl::Status ParseSigma(const Json& v, std::string_view key, ExtendedReal* out) {
  if (v.is_string() && v.get<std::string>() == "inf") {
    *out = ExtendedReal::Infinity();
    return absl::OkStatus();
  }
  if (!v.is_number()) return KeyError(key, "expected a number or \"inf\"");
  *out = v.get<double>();
  return absl::OkStatus();
}

// Reads j[key] into *out when present.
template <typename T>
absl::Status Read(const Json& j, std::string_view key, T* out) {
  const std::string k(key);
  if (!j.contains(k)) return absl::OkStatus();
  const Json& v = j.at(k);
  if constexpr (std::is_same_v<T, int>) {
    if (!v.is_number_integer()) return KeyError(key, "expected an integer");
    *out = v.get<int>();
  } else if constexpr (std::is_same_v<T, double>) {
    if (!v.is_number()) return KeyError(key, "expected a number");
    *out = v.get<double>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) return KeyError(key, "expected a string");
    *out = v.get<std::string>();
  } else if constexpr (std::is_same_v<T, ExtendedReal>) {
    return ParseSigma(v, key, out);
  } else {
    if (!v.is_array()) return KeyError(key, "expected an array");
    T items;
    for (const Json& item : v) {
      typename T::value_type x;
      Json wrapper = {{k, item}};
      if (absl::Status s = Read(wrapper, key, &x); !s.ok()) return s;
      items.push_back(x);
    }
    if (items.empty()) return KeyError(key, "expected a non-empty array");
    *out = std::move(items);
  }
  return absl::OkStatus();
}

#define CDP_RETURN_IF_ERROR(expr)          \
  do {                                     \
    if (absl::Status _s = (expr); !_s.ok()) \
      return _s;                           \
  } while (0)

absl::Status RequirePositive(int value, std::string_view key) {
  if (value < 1) return KeyError(key, "must be at least 1");
  return absl::OkStatus();
}

absl::Status ParseGmm(const Json& j, GmmConfig* gmm) {
  CDP_RETURN_IF_ERROR(Read(j, "beta", &gmm->beta));
  CDP_RETURN_IF_ERROR(Read(j, "v", &gmm->v));
  CDP_RETURN_IF_ERROR(Read(j, "k_prime", &gmm->k_prime));
  CDP_RETURN_IF_ERROR(Read(j, "tau", &gmm->tau));
  CDP_RETURN_IF_ERROR(Read(j, "cluster_sizes", &gmm->cluster_sizes));
  return ValidateGmmConfig(*gmm);
}

absl::Status ParseGraph(const Json& j, GraphPopConfig* graph) {
  CDP_RETURN_IF_ERROR(Read(j, "community_sizes", &graph->community_sizes));
  CDP_RETURN_IF_ERROR(Read(j, "p_in", &graph->p_in));
  CDP_RETURN_IF_ERROR(Read(j, "p_out", &graph->p_out));
  CDP_RETURN_IF_ERROR(Read(j, "v", &graph->v));
  CDP_RETURN_IF_ERROR(Read(j, "levels", &graph->levels));
  CDP_RETURN_IF_ERROR(Read(j, "tau", &graph->tau));
  std::vector<double> beta(graph->beta.begin(), graph->beta.end());
  CDP_RETURN_IF_ERROR(Read(j, "beta", &beta));
  if (beta.size() != 4) return KeyError("beta", "expected 4 coefficients");
  std::copy(beta.begin(), beta.end(), graph->beta.begin());
  return ValidateGraphConfig(*graph);
}

absl::StatusOr<PopulationSource> ParseSourceOr(const Json& j,
                                               std::string_view key,
                                               PopulationSource fallback) {
  const std::string k(key);
  if (!j.contains(k)) return fallback;
  return ParsePopulationSource(j.at(k), std::move(fallback));
}

// ---------------------------------------------------------------------------
// Replication.

using Estimator = std::function<absl::StatusOr<double>(
    const ObservedData& obs, const StreamFactory& rep)>;

// Runs `reps` replications. Replication r draws one assignment from its own
// streams and evaluates every estimator on it, so estimates are paired
// across estimators. Returns estimates[e][r].
absl::StatusOr<std::vector<std::vector<double>>> Replicate(
    const Population& pop, const ArmCounts& counts,
    std::span<const Estimator> estimators, int reps, const StreamFactory& root,
    int threads) {
  std::vector<std::vector<double>> out(estimators.size(),
                                       std::vector<double>(reps));
  std::vector<absl::Status> errors(reps);
  ParallelFor(reps, threads, [&](int r) {
    const StreamFactory rep = root.Child("rep", r);
    RngStream rng = rep.Stream(kAssignmentStream);
    absl::StatusOr<Design> design = DrawDesign(pop, counts, rng);
    if (!design.ok()) {
      errors[r] = design.status();
      return;
    }
    const ObservedData obs = Observe(pop, *design);
    for (size_t e = 0; e < estimators.size(); ++e) {
      absl::StatusOr<double> value = estimators[e](obs, rep);
      if (!value.ok()) {
        errors[r] = value.status();
        return;
      }
      out[e][r] = *value;
    }
  });
  for (const absl::Status& s : errors) {
    if (!s.ok()) return s;
  }
  return out;
}

Estimator NoDpEstimator(bool stratified) {
  return [stratified](const ObservedData& obs,
                      const StreamFactory&) -> absl::StatusOr<double> {
    return stratified ? TauNoDp(obs) : TauNoDpUnstratified(obs);
  };
}

// Debiased estimate from a Cluster-DP or Cluster-Free-DP release drawn from
// the child streams (label, index) of the replication.
Estimator DebiasedEstimator(MechanismParams params, std::string label,
                            int index) {
  return [params, label = std::move(label), index](
             const ObservedData& obs,
             const StreamFactory& rep) -> absl::StatusOr<double> {
    absl::StatusOr<PrivatizedRelease> release =
        Privatize(obs, params, rep.Child(label, index));
    if (!release.ok()) return release.status();
    absl::StatusOr<TauEstimate> est = TauQ(*release);
    if (!est.ok()) return est.status();
    return est->estimate;
  };
}

Estimator UniformEstimator(double lambda, bool stratified, int index) {
  return [=](const ObservedData& obs,
             const StreamFactory& rep) -> absl::StatusOr<double> {
    absl::StatusOr<PrivatizedRelease> release =
        UniformPriorDp(obs, lambda, rep.Child("uniform-prior-dp", index));
    if (!release.ok()) return release.status();
    return TauUniform(*release, stratified);
  };
}

absl::StatusOr<Population> GmmWithBeta(const PopulationSource& source,
                                       double beta,
                                       const StreamFactory& streams) {
  if (source.kind != PopulationSource::Kind::kGmm) {
    return absl::InvalidArgumentError(
        "a beta sweep needs a gmm population source");
  }
  PopulationSource with_beta = source;
  with_beta.gmm.beta = beta;
  return LoadPopulation(with_beta, streams);
}

}  // namespace

std::string Table::ToCsv() const {
  std::string out = absl::StrJoin(columns, ",");
  out += "\n";
  for (const auto& row : rows) {
    out += absl::StrJoin(row, ",");
    out += "\n";
  }
  return out;
}

PopulationSource DeskGmm() {
  PopulationSource source;
  source.gmm.cluster_sizes = {125, 250, 500};
  return source;
}

absl::StatusOr<PopulationSource> ParsePopulationSource(const Json& j) {
  return ParsePopulationSource(j, DeskGmm());
}

absl::StatusOr<PopulationSource> ParsePopulationSource(
    const Json& j, const PopulationSource& defaults) {
  PopulationSource source;
  std::string kind = "gmm";
  if (defaults.kind == PopulationSource::Kind::kGraph) kind = "graph";
  if (defaults.kind == PopulationSource::Kind::kCsv) kind = "csv";
  if (j.is_object()) CDP_RETURN_IF_ERROR(Read(j, "source", &kind));
  if (kind == "gmm") {
    static constexpr std::string_view kKeys[] = {
        "source", "beta", "v", "k_prime", "tau", "cluster_sizes"};
    CDP_RETURN_IF_ERROR(CheckKeys(j, kKeys, "population"));
    source = defaults.kind == PopulationSource::Kind::kGmm ? defaults
                                                           : DeskGmm();
    CDP_RETURN_IF_ERROR(ParseGmm(j, &source.gmm));
  } else if (kind == "graph") {
    static constexpr std::string_view kKeys[] = {
        "source", "community_sizes", "p_in", "p_out", "beta",
        "v",      "levels",          "tau"};
    CDP_RETURN_IF_ERROR(CheckKeys(j, kKeys, "population"));
    if (defaults.kind == PopulationSource::Kind::kGraph) source = defaults;
    source.kind = PopulationSource::Kind::kGraph;
    CDP_RETURN_IF_ERROR(ParseGraph(j, &source.graph));
  } else if (kind == "csv") {
    static constexpr std::string_view kKeys[] = {"source", "path", "outcomes"};
    CDP_RETURN_IF_ERROR(CheckKeys(j, kKeys, "population"));
    source.kind = PopulationSource::Kind::kCsv;
    CDP_RETURN_IF_ERROR(Read(j, "path", &source.path));
    CDP_RETURN_IF_ERROR(Read(j, "outcomes", &source.outcomes));
    if (source.path.empty() || source.outcomes.empty()) {
      return absl::InvalidArgumentError(
          "population: csv source needs 'path' and 'outcomes'");
    }
  } else {
    return KeyError("source", absl::StrCat("unknown population source '",
                                           kind, "'"));
  }
  return source;
}

absl::StatusOr<Population> LoadPopulation(const PopulationSource& source,
                                          const StreamFactory& streams) {
  RngStream rng = streams.Stream("population");
  switch (source.kind) {
    case PopulationSource::Kind::kGmm:
      return GenGmm(source.gmm, rng);
    case PopulationSource::Kind::kGraph: {
      absl::StatusOr<GraphPopulation> graph =
          GenGraphPopulation(source.graph, rng);
      if (!graph.ok()) return graph.status();
      return std::move(graph->population);
    }
    case PopulationSource::Kind::kCsv: {
      absl::StatusOr<OutcomeSpace> space = ParseOutcomeSpace(source.outcomes);
      if (!space.ok()) return space.status();
      return ReadPopulationFile(source.path, *space);
    }
  }
  return absl::InternalError("unreachable");
}

McSummary Summarize(const std::vector<double>& estimates, double truth) {
  McSummary s;
  s.variance = VarianceJackknife(estimates);
  s.bias = MeanEstimate(estimates);
  s.bias.value -= truth;
  return s;
}

// ---------------------------------------------------------------------------
// Variance sweep.

namespace {

absl::StatusOr<VarianceSweepConfig> ParseSweep(const Json& j,
                                               VarianceSweepConfig config) {
  static constexpr std::string_view kKeys[] = {
      "population", "mechanisms", "epsilons", "delta",
      "sigmas",     "gamma_over_k", "reps"};
  CDP_RETURN_IF_ERROR(CheckKeys(j, kKeys, "config"));
  absl::StatusOr<PopulationSource> source =
      ParseSourceOr(j, "population", config.population);
  if (!source.ok()) return source.status();
  config.population = *std::move(source);
  CDP_RETURN_IF_ERROR(Read(j, "mechanisms", &config.mechanisms));
  for (const std::string& m : config.mechanisms) {
    absl::StatusOr<MechanismKind> kind = ParseKind(m);
    if (!kind.ok()) return kind.status();
    if (!UsesPrior(*kind)) {
      return KeyError("mechanisms",
                      absl::StrCat("'", m, "' does not release outcomes"));
    }
  }
  CDP_RETURN_IF_ERROR(Read(j, "epsilons", &config.epsilons));
  CDP_RETURN_IF_ERROR(Read(j, "delta", &config.delta));
  CDP_RETURN_IF_ERROR(Read(j, "sigmas", &config.sigmas));
  CDP_RETURN_IF_ERROR(Read(j, "gamma_over_k", &config.gamma_over_k));
  CDP_RETURN_IF_ERROR(Read(j, "reps", &config.reps));
  CDP_RETURN_IF_ERROR(RequirePositive(config.reps, "reps"));
  for (double g : config.gamma_over_k) {
    if (!(g >= 0 && g <= 1)) return KeyError("gamma_over_k", "must lie in [0, 1]");
  }
  return config;
}

bool Wants(const VarianceSweepConfig& config, std::string_view mechanism) {
  return std::find(config.mechanisms.begin(), config.mechanisms.end(),
                   mechanism) != config.mechanisms.end();
}

}  // namespace

absl::StatusOr<VarianceSweepConfig> ParseVarianceSweepConfig(const Json& j) {
  return ParseSweep(j, VarianceSweepConfig());
}

absl::StatusOr<VarianceSweepConfig> ParseGraphSweepConfig(const Json& j) {
  VarianceSweepConfig config;
  config.population.kind = PopulationSource::Kind::kGraph;
  config.population.graph.community_sizes = {100, 110, 120, 130, 140,
                                             150, 160, 170, 180, 190};
  config.mechanisms = {"cluster-dp", "cluster-free-dp"};
  config.epsilons = {0.5, 1, 2, 4, 8};
  config.sigmas = {5.0};
  config.gamma_over_k = {0.1};
  return ParseSweep(j, config);
}

absl::StatusOr<VarianceSweepResult> RunVarianceSweep(
    const VarianceSweepConfig& config, const RunOptions& options) {
  const StreamFactory root(options.seed);
  absl::StatusOr<Population> pop = LoadPopulation(config.population, root);
  if (!pop.ok()) return pop.status();
  const ArmCounts counts = BalancedCounts(*pop);
  const int k = pop->space().size();

  VarianceSweepResult result;
  result.num_units = pop->size();
  result.num_outcomes = k;
  result.ate = pop->Ate();
  absl::StatusOr<double> phi0 = Homogeneity(*pop, counts, 0);
  absl::StatusOr<double> phi1 = Homogeneity(*pop, counts, 1);
  absl::StatusOr<double> ht = HtVariance(*pop, counts);
  if (!phi0.ok()) return phi0.status();
  if (!phi1.ok()) return phi1.status();
  if (!ht.ok()) return ht.status();
  result.phi0 = *phi0;
  result.phi1 = *phi1;

  std::vector<Estimator> estimators;
  std::vector<int> row_estimator;  // estimator index per row, or -1
  auto add_row = [&](SweepRow row, std::optional<Estimator> estimator) {
    row_estimator.push_back(estimator ? static_cast<int>(estimators.size())
                                      : -1);
    if (estimator) estimators.push_back(*std::move(estimator));
    result.rows.push_back(std::move(row));
  };

  for (bool stratified : {true, false}) {
    SweepRow row;
    row.mechanism = "no-dp";
    row.estimator = stratified ? "stratified" : "unstratified";
    row.gamma_over_k = kNaN;
    row.epsilon_target = kNaN;
    row.delta_target = kNaN;
    if (stratified) {
      row.theory_kind = VarianceKind::kExact;
      row.theory = *ht;
    }
    add_row(std::move(row), NoDpEstimator(stratified));
  }

  // Row indices used to assemble the comparisons.
  struct Point {
    double epsilon;
    ExtendedReal sigma;
    double gamma_over_k;
    int cluster_dp = -1;
    int cluster_free = -1;
    int uniform = -1;
  };
  std::vector<Point> points;
  int point_index = 0;
  for (size_t ei = 0; ei < config.epsilons.size(); ++ei) {
    const double eps = config.epsilons[ei];
    int uniform_row = -1;
    if (Wants(config, "uniform-prior-dp")) {
      MechanismParams params;
      params.kind = MechanismKind::kUniformPriorDp;
      params.gamma = 1.0 / k;
      params.sigma = ExtendedReal::Infinity();
      absl::StatusOr<MechanismParams> calibrated =
          Calibrate(params, eps, config.delta, k);
      for (bool stratified : {true, false}) {
        SweepRow row;
        row.mechanism = "uniform-prior-dp";
        row.estimator = stratified ? "stratified" : "unstratified";
        row.epsilon_target = eps;
        row.delta_target = config.delta;
        row.gamma_over_k = 1;
        row.params = params;
        std::optional<Estimator> estimator;
        if (!calibrated.ok()) {
          row.status = std::string(calibrated.status().message());
        } else {
          row.params = *calibrated;
          absl::StatusOr<PrivacyReport> privacy = Account(row.params, k, eps);
          if (!privacy.ok()) return privacy.status();
          row.privacy = *privacy;
          if (stratified) {
            absl::StatusOr<double> theory =
                UniformPriorVariance(*pop, counts, row.params.lambda, true);
            if (!theory.ok()) return theory.status();
            row.theory_kind = VarianceKind::kExact;
            row.theory = *theory;
            uniform_row = static_cast<int>(result.rows.size());
          }
          estimator = UniformEstimator(row.params.lambda, stratified,
                                       static_cast<int>(ei));
        }
        add_row(std::move(row), std::move(estimator));
      }
    }
    for (const ExtendedReal sigma : config.sigmas) {
      for (const double g : config.gamma_over_k) {
        Point point{eps, sigma, g};
        point.uniform = uniform_row;
        for (MechanismKind kind :
             {MechanismKind::kClusterDp, MechanismKind::kClusterFreeDp}) {
          if (!Wants(config, KindName(kind))) continue;
          SweepRow row;
          row.mechanism = std::string(KindName(kind));
          row.estimator = "debiased";
          row.epsilon_target = eps;
          row.delta_target = config.delta;
          row.gamma_over_k = g;
          row.params.kind = kind;
          row.params.gamma = g / k;
          row.params.sigma = sigma;
          absl::StatusOr<MechanismParams> calibrated =
              Calibrate(row.params, eps, config.delta, k);
          std::optional<Estimator> estimator;
          if (!calibrated.ok()) {
            row.status = std::string(calibrated.status().message());
          } else {
            row.params = *calibrated;
            const double eps_tilde =
                eps - PriorBudget(row.params.gamma, sigma).value();
            absl::StatusOr<PrivacyReport> privacy =
                Account(row.params, k, eps_tilde);
            if (!privacy.ok()) return privacy.status();
            row.privacy = *privacy;
            if (kind == MechanismKind::kClusterDp) {
              absl::StatusOr<VarianceReport> bound =
                  ClusterDpVarianceBound(*pop, counts, row.params);
              if (!bound.ok()) return bound.status();
              row.theory_kind = bound->kind;
              row.theory = bound->value;
            }
            (kind == MechanismKind::kClusterDp ? point.cluster_dp
                                               : point.cluster_free) =
                static_cast<int>(result.rows.size());
            estimator = DebiasedEstimator(row.params, row.mechanism,
                                          point_index);
          }
          add_row(std::move(row), std::move(estimator));
        }
        points.push_back(point);
        ++point_index;
      }
    }
  }

  absl::StatusOr<std::vector<std::vector<double>>> estimates =
      Replicate(*pop, counts, estimators, config.reps,
                root.Child("replications", 0), options.threads);
  if (!estimates.ok()) return estimates.status();
  for (size_t i = 0; i < result.rows.size(); ++i) {
    if (row_estimator[i] < 0) continue;
    SweepRow& row = result.rows[i];
    row.estimates = std::move((*estimates)[row_estimator[i]]);
    row.mc = Summarize(row.estimates, result.ate);
  }

  for (const Point& p : points) {
    const std::pair<int, int> pairs[] = {{p.cluster_dp, p.cluster_free},
                                         {p.cluster_free, p.uniform},
                                         {p.cluster_dp, p.uniform}};
    for (const auto& [a, b] : pairs) {
      if (a < 0 || b < 0) continue;
      Comparison c;
      c.epsilon = p.epsilon;
      c.sigma = p.sigma;
      c.gamma_over_k = p.gamma_over_k;
      c.lower = result.rows[a].mechanism;
      c.higher = result.rows[b].mechanism;
      c.difference = VarianceDifferenceJackknife(result.rows[a].estimates,
                                                 result.rows[b].estimates);
      result.comparisons.push_back(std::move(c));
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Homogeneity sweep.

absl::StatusOr<HomogeneitySweepConfig> ParseHomogeneitySweepConfig(
    const Json& j) {
  static constexpr std::string_view kKeys[] = {
      "population", "betas", "lambdas", "gamma_over_k", "sigma", "reps"};
  CDP_RETURN_IF_ERROR(CheckKeys(j, kKeys, "config"));
  HomogeneitySweepConfig config;
  absl::StatusOr<PopulationSource> source =
      ParseSourceOr(j, "population", config.population);
  if (!source.ok()) return source.status();
  config.population = *std::move(source);
  CDP_RETURN_IF_ERROR(Read(j, "betas", &config.betas));
  CDP_RETURN_IF_ERROR(Read(j, "lambdas", &config.lambdas));
  CDP_RETURN_IF_ERROR(Read(j, "gamma_over_k", &config.gamma_over_k));
  CDP_RETURN_IF_ERROR(Read(j, "sigma", &config.sigma));
  CDP_RETURN_IF_ERROR(Read(j, "reps", &config.reps));
  CDP_RETURN_IF_ERROR(RequirePositive(config.reps, "reps"));
  return config;
}

absl::StatusOr<HomogeneitySweepResult> RunHomogeneitySweep(
    const HomogeneitySweepConfig& config, const RunOptions& options) {
  const StreamFactory root(options.seed);
  HomogeneitySweepResult result;
  for (const double beta : config.betas) {
    // Every beta reuses the population stream, so the populations differ
    // only through beta.
    absl::StatusOr<Population> pop =
        GmmWithBeta(config.population, beta, root);
    if (!pop.ok()) return pop.status();
    const ArmCounts counts = BalancedCounts(*pop);
    const int k = pop->space().size();
    absl::StatusOr<double> phi0 = Homogeneity(*pop, counts, 0);
    absl::StatusOr<double> phi1 = Homogeneity(*pop, counts, 1);
    if (!phi0.ok()) return phi0.status();
    if (!phi1.ok()) return phi1.status();
    std::vector<Estimator> estimators;
    for (size_t li = 0; li < config.lambdas.size(); ++li) {
      for (MechanismKind kind :
           {MechanismKind::kClusterDp, MechanismKind::kClusterFreeDp}) {
        MechanismParams params;
        params.kind = kind;
        params.gamma = config.gamma_over_k / k;
        params.sigma = config.sigma;
        params.lambda = config.lambdas[li];
        if (absl::Status s = ValidateParams(params, k); !s.ok()) return s;
        estimators.push_back(DebiasedEstimator(
            params, std::string(KindName(kind)), static_cast<int>(li)));
      }
    }
    absl::StatusOr<std::vector<std::vector<double>>> estimates =
        Replicate(*pop, counts, estimators, config.reps,
                  root.Child("replications", 0), options.threads);
    if (!estimates.ok()) return estimates.status();
    for (size_t li = 0; li < config.lambdas.size(); ++li) {
      const std::vector<double>& cdp = (*estimates)[2 * li];
      const std::vector<double>& cfdp = (*estimates)[2 * li + 1];
      HomogeneityRow row;
      row.beta = beta;
      row.lambda = config.lambdas[li];
      row.phi0 = *phi0;
      row.phi1 = *phi1;
      row.cluster_dp = Summarize(cdp, pop->Ate());
      row.cluster_free = Summarize(cfdp, pop->Ate());
      row.ratio = VarianceRatioJackknife(cdp, cfdp);
      result.rows.push_back(std::move(row));
    }
  }
  for (const double lambda : config.lambdas) {
    std::vector<double> betas, ratios;
    for (const HomogeneityRow& row : result.rows) {
      if (row.lambda != lambda) continue;
      betas.push_back(row.beta);
      ratios.push_back(row.ratio.value);
    }
    result.spearman.emplace_back(
        lambda, betas.size() >= 2 ? Spearman(betas, ratios) : kNaN);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Bound validation.

absl::StatusOr<BoundValidationConfig> ParseBoundValidationConfig(
    const Json& j) {
  static constexpr std::string_view kKeys[] = {
      "population", "betas", "lambda", "gamma", "sigma", "reps"};
  CDP_RETURN_IF_ERROR(CheckKeys(j, kKeys, "config"));
  BoundValidationConfig config;
  absl::StatusOr<PopulationSource> source =
      ParseSourceOr(j, "population", config.population);
  if (!source.ok()) return source.status();
  config.population = *std::move(source);
  CDP_RETURN_IF_ERROR(Read(j, "betas", &config.betas));
  CDP_RETURN_IF_ERROR(Read(j, "lambda", &config.lambda));
  CDP_RETURN_IF_ERROR(Read(j, "gamma", &config.gamma));
  CDP_RETURN_IF_ERROR(Read(j, "sigma", &config.sigma));
  CDP_RETURN_IF_ERROR(Read(j, "reps", &config.reps));
  CDP_RETURN_IF_ERROR(RequirePositive(config.reps, "reps"));
  return config;
}

absl::StatusOr<std::vector<BoundRow>> RunBoundValidation(
    const BoundValidationConfig& config, const RunOptions& options) {
  const StreamFactory root(options.seed);
  std::vector<BoundRow> rows;
  for (const double beta : config.betas) {
    absl::StatusOr<Population> pop =
        GmmWithBeta(config.population, beta, root);
    if (!pop.ok()) return pop.status();
    const ArmCounts counts = BalancedCounts(*pop);
    MechanismParams params;
    params.gamma = config.gamma;
    params.sigma = config.sigma;
    params.lambda = config.lambda;
    if (absl::Status s = ValidateParams(params, pop->space().size()); !s.ok()) {
      return s;
    }
    absl::StatusOr<VarianceReport> bound =
        ClusterDpVarianceBound(*pop, counts, params);
    if (!bound.ok()) return bound.status();
    const Estimator estimator[] = {DebiasedEstimator(params, "cluster-dp", 0)};
    absl::StatusOr<std::vector<std::vector<double>>> estimates =
        Replicate(*pop, counts, estimator, config.reps,
                  root.Child("replications", 0), options.threads);
    if (!estimates.ok()) return estimates.status();
    BoundRow row;
    row.beta = beta;
    row.no_dp_variance = bound->no_dp_variance;
    row.gap = VarianceJackknife((*estimates)[0]);
    row.gap.value -= bound->no_dp_variance;
    row.lower = bound->component("homogeneity_term");
    row.bound = bound->component("gap_bound");
    row.contained =
        row.gap.value >= -2 * row.gap.se && row.gap.value <= row.bound;
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Distribution check.

absl::StatusOr<DistributionConfig> ParseDistributionConfig(const Json& j) {
  static constexpr std::string_view kKeys[] = {
      "population", "mechanism", "gamma", "sigma", "lambda", "reps"};
  CDP_RETURN_IF_ERROR(CheckKeys(j, kKeys, "config"));
  DistributionConfig config;
  absl::StatusOr<PopulationSource> source =
      ParseSourceOr(j, "population", config.population);
  if (!source.ok()) return source.status();
  config.population = *std::move(source);
  std::string mechanism(KindName(config.params.kind));
  CDP_RETURN_IF_ERROR(Read(j, "mechanism", &mechanism));
  absl::StatusOr<MechanismKind> kind = ParseKind(mechanism);
  if (!kind.ok()) return kind.status();
  if (*kind != MechanismKind::kClusterDp &&
      *kind != MechanismKind::kClusterFreeDp) {
    return KeyError("mechanism", "expected cluster-dp or cluster-free-dp");
  }
  config.params.kind = *kind;
  CDP_RETURN_IF_ERROR(Read(j, "gamma", &config.params.gamma));
  CDP_RETURN_IF_ERROR(Read(j, "sigma", &config.params.sigma));
  CDP_RETURN_IF_ERROR(Read(j, "lambda", &config.params.lambda));
  CDP_RETURN_IF_ERROR(Read(j, "reps", &config.reps));
  if (config.reps < 2) return KeyError("reps", "must be at least 2");
  return config;
}

absl::StatusOr<DistributionResult> RunDistributionCheck(
    const DistributionConfig& config, const RunOptions& options) {
  const StreamFactory root(options.seed);
  absl::StatusOr<Population> pop = LoadPopulation(config.population, root);
  if (!pop.ok()) return pop.status();
  if (absl::Status s = ValidateParams(config.params, pop->space().size());
      !s.ok()) {
    return s;
  }
  const Estimator estimator[] = {DebiasedEstimator(
      config.params, std::string(KindName(config.params.kind)), 0)};
  absl::StatusOr<std::vector<std::vector<double>>> estimates =
      Replicate(*pop, BalancedCounts(*pop), estimator, config.reps,
                root.Child("replications", 0), options.threads);
  if (!estimates.ok()) return estimates.status();
  DistributionResult result;
  result.ate = pop->Ate();
  for (double e : (*estimates)[0]) result.errors.push_back(e - result.ate);
  result.mean_error = MeanEstimate(result.errors);
  result.normality = AndersonDarlingNormal(result.errors);
  result.bias_test = OneSampleTTest(result.errors, 0);
  return result;
}

// ---------------------------------------------------------------------------
// Baseline bias.

absl::StatusOr<BaselineBiasConfig> ParseBaselineBiasConfig(const Json& j) {
  static constexpr std::string_view kKeys[] = {
      "population",   "subsample_sizes",    "epsilons",      "delta",
      "gamma_over_k", "sigma",              "noise_realizations",
      "subpopulations"};
  CDP_RETURN_IF_ERROR(CheckKeys(j, kKeys, "config"));
  BaselineBiasConfig config;
  absl::StatusOr<PopulationSource> source =
      ParseSourceOr(j, "population", config.population);
  if (!source.ok()) return source.status();
  config.population = *std::move(source);
  CDP_RETURN_IF_ERROR(Read(j, "subsample_sizes", &config.subsample_sizes));
  CDP_RETURN_IF_ERROR(Read(j, "epsilons", &config.epsilons));
  CDP_RETURN_IF_ERROR(Read(j, "delta", &config.delta));
  CDP_RETURN_IF_ERROR(Read(j, "gamma_over_k", &config.gamma_over_k));
  CDP_RETURN_IF_ERROR(Read(j, "sigma", &config.sigma));
  CDP_RETURN_IF_ERROR(
      Read(j, "noise_realizations", &config.noise_realizations));
  CDP_RETURN_IF_ERROR(Read(j, "subpopulations", &config.subpopulations));
  CDP_RETURN_IF_ERROR(
      RequirePositive(config.noise_realizations, "noise_realizations"));
  CDP_RETURN_IF_ERROR(RequirePositive(config.subpopulations, "subpopulations"));
  return config;
}

absl::StatusOr<BaselineBiasResult> RunBaselineBias(
    const BaselineBiasConfig& config, const RunOptions& options) {
  const StreamFactory root(options.seed);
  absl::StatusOr<Population> super = LoadPopulation(config.population, root);
  if (!super.ok()) return super.status();
  const int k = super->space().size();
  const int num_clusters = super->num_clusters();
  if (static_cast<int>(config.subsample_sizes.size()) != num_clusters) {
    return absl::InvalidArgumentError(
        absl::StrCat("subsample_sizes needs one entry per cluster (",
                     num_clusters, ")"));
  }

  BaselineBiasResult result;
  result.ate = super->Ate();
  int sub_n = 0;
  for (int s : config.subsample_sizes) sub_n += s;
  if (sub_n < 10 * std::max(k, num_clusters)) {
    result.warnings.push_back(absl::StrCat(
        "subpopulation size ", sub_n, " is below 10 * max(K, C) = ",
        10 * std::max(k, num_clusters),
        "; the conditional-bias comparison assumes n >> K and n >> C"));
  }

  // Subpopulations and their assignments are shared by every realization.
  struct Draw {
    std::vector<int> units;  // superpopulation indices
    ObservedData obs;
    double ate = 0;
  };
  std::vector<Draw> draws(config.subpopulations);
  std::vector<absl::Status> errors(config.subpopulations);
  ParallelFor(config.subpopulations, options.threads, [&](int s) {
    const StreamFactory streams = root.Child("subpopulation", s);
    RngStream rng = streams.Stream("subsample");
    absl::StatusOr<std::vector<int>> units =
        SubsampleIndices(*super, config.subsample_sizes, rng);
    if (!units.ok()) {
      errors[s] = units.status();
      return;
    }
    absl::StatusOr<Population> sub = super->Subset(*units);
    if (!sub.ok()) {
      errors[s] = sub.status();
      return;
    }
    RngStream assignment = streams.Stream(kAssignmentStream);
    absl::StatusOr<Design> design =
        DrawDesign(*sub, BalancedCounts(*sub), assignment);
    if (!design.ok()) {
      errors[s] = design.status();
      return;
    }
    draws[s] = {*std::move(units), Observe(*sub, *design), sub->Ate()};
  });
  for (const absl::Status& s : errors) {
    if (!s.ok()) return s;
  }

  enum { kClusterDpRow, kNoisyHtRow, kNoisyHistogramRow, kNumEstimators };
  static constexpr std::string_view kNames[] = {"cluster-dp", "noisy-ht",
                                                "noisy-histogram"};
  const int num_eps = static_cast<int>(config.epsilons.size());
  std::vector<MechanismParams> params(num_eps);
  std::vector<std::string> status(num_eps, "ok");
  for (int e = 0; e < num_eps; ++e) {
    params[e].gamma = config.gamma_over_k / k;
    params[e].sigma = config.sigma;
    absl::StatusOr<MechanismParams> calibrated =
        Calibrate(params[e], config.epsilons[e], config.delta, k);
    if (calibrated.ok()) {
      params[e] = *calibrated;
    } else {
      status[e] = std::string(calibrated.status().message());
    }
  }

  // biases[(e * kNumEstimators + estimator) * R + m]
  const int realizations = config.noise_realizations;
  std::vector<double> biases(num_eps * kNumEstimators * realizations, kNaN);
  std::vector<absl::Status> noise_errors(realizations);
  ParallelFor(realizations, options.threads, [&](int m) {
    const StreamFactory noise = root.Child("noise", m);
    for (int e = 0; e < num_eps; ++e) {
      const double eps = config.epsilons[e];
      const bool cluster_dp_ok = status[e] == "ok";
      const MechanismNoise cdp_noise =
          DrawMechanismNoise(noise.Child("cluster-dp", e), num_clusters, k,
                             super->size());
      const std::vector<double> ht_noise =
          DrawLaplace(noise.Child("noisy-ht", e), num_clusters);
      const std::vector<double> hist_noise =
          DrawLaplace(noise.Child("noisy-histogram", e), num_clusters * 2 * k);
      double sums[kNumEstimators] = {0, 0, 0};
      MechanismNoise local;
      local.laplace = cdp_noise.laplace;
      for (const Draw& draw : draws) {
        if (cluster_dp_ok) {
          local.resample.clear();
          local.draw.clear();
          for (int u : draw.units) {
            local.resample.push_back(cdp_noise.resample[u]);
            local.draw.push_back(cdp_noise.draw[u]);
          }
          absl::StatusOr<PrivatizedRelease> release =
              ClusterDpWithNoise(draw.obs, params[e], local);
          absl::StatusOr<TauEstimate> est =
              release.ok() ? TauQ(*release)
                           : absl::StatusOr<TauEstimate>(release.status());
          if (!est.ok()) {
            noise_errors[m] = est.status();
            return;
          }
          sums[kClusterDpRow] += est->estimate - draw.ate;
        }
        absl::StatusOr<NoisyEstimate> ht =
            NoisyHtWithNoise(draw.obs, eps, ht_noise);
        absl::StatusOr<NoisyEstimate> hist =
            NoisyHistogramWithNoise(draw.obs, eps, hist_noise);
        if (!ht.ok() || !hist.ok()) {
          noise_errors[m] = ht.ok() ? hist.status() : ht.status();
          return;
        }
        sums[kNoisyHtRow] += ht->estimate - draw.ate;
        sums[kNoisyHistogramRow] += hist->estimate - draw.ate;
      }
      for (int t = 0; t < kNumEstimators; ++t) {
        if (t == kClusterDpRow && !cluster_dp_ok) continue;
        biases[(e * kNumEstimators + t) * realizations + m] =
            sums[t] / draws.size();
      }
    }
  });
  for (const absl::Status& s : noise_errors) {
    if (!s.ok()) return s;
  }

  for (int e = 0; e < num_eps; ++e) {
    for (int t = 0; t < kNumEstimators; ++t) {
      BiasRow row;
      row.epsilon = config.epsilons[e];
      row.estimator = std::string(kNames[t]);
      if (t == kClusterDpRow) {
        row.status = status[e];
        row.lambda = params[e].lambda;
      }
      if (row.status == "ok") {
        const double* begin = &biases[(e * kNumEstimators + t) * realizations];
        row.biases.assign(begin, begin + realizations);
        std::vector<double> abs_biases;
        for (double b : row.biases) abs_biases.push_back(std::abs(b));
        row.bias = MeanEstimate(row.biases);
        row.abs_bias = MeanEstimate(abs_biases);
      }
      result.rows.push_back(std::move(row));
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Tabulation and dispatch.

namespace {

std::string TheoryKind(const std::optional<VarianceKind>& kind) {
  return kind ? std::string(VarianceKindName(*kind)) : "none";
}

ExperimentOutput TabulateSweep(std::string name,
                               const VarianceSweepResult& result,
                               const RunOptions& options,
                               const std::string& hash) {
  ExperimentOutput out;
  out.name = name;
  Table rows;
  rows.columns = {"mechanism",    "estimator",   "epsilon_target",
                  "delta_target", "gamma_over_k", "gamma",
                  "sigma",        "lambda",      "epsilon",
                  "delta",        "status",      "reps",
                  "mc_variance",  "mc_variance_se", "mc_bias",
                  "mc_bias_se",   "theory_kind", "theory_value",
                  "phi0",         "phi1",        "seed",
                  "config_hash"};
  for (const SweepRow& row : result.rows) {
    const bool has_params = row.mechanism != "no-dp";
    const bool has_mc = !row.estimates.empty();
    rows.rows.push_back({
        row.mechanism,
        row.estimator,
        Fmt(row.epsilon_target),
        Fmt(row.delta_target),
        Fmt(row.gamma_over_k),
        has_params ? Fmt(row.params.gamma) : "",
        has_params ? Fmt(row.params.sigma) : "",
        has_params && row.status == "ok" ? Fmt(row.params.lambda) : "",
        row.privacy ? Fmt(row.privacy->epsilon) : "",
        row.privacy ? Fmt(row.privacy->delta) : "",
        "\"" + row.status + "\"",
        Fmt(static_cast<int>(row.estimates.size())),
        has_mc ? Fmt(row.mc.variance.value) : "",
        has_mc ? Fmt(row.mc.variance.se) : "",
        has_mc ? Fmt(row.mc.bias.value) : "",
        has_mc ? Fmt(row.mc.bias.se) : "",
        TheoryKind(row.theory_kind),
        row.theory_kind ? Fmt(row.theory) : "",
        Fmt(result.phi0),
        Fmt(result.phi1),
        absl::StrCat(options.seed),
        hash,
    });
  }
  Table comparisons;
  comparisons.columns = {"epsilon", "sigma", "gamma_over_k", "lower",
                         "higher",  "variance_difference",
                         "variance_difference_se", "separation_se",
                         "seed", "config_hash"};
  Json ordered = Json::array();
  for (const Comparison& c : result.comparisons) {
    const double separation = -c.difference.value / c.difference.se;
    comparisons.rows.push_back({Fmt(c.epsilon), Fmt(c.sigma),
                                Fmt(c.gamma_over_k), c.lower, c.higher,
                                Fmt(c.difference.value), Fmt(c.difference.se),
                                Fmt(separation), absl::StrCat(options.seed),
                                hash});
    ordered.push_back({{"epsilon", c.epsilon},
                       {"sigma", c.sigma.ToString()},
                       {"gamma_over_k", c.gamma_over_k},
                       {"lower", c.lower},
                       {"higher", c.higher},
                       {"separation_se", separation}});
  }
  std::string stem = name;
  std::replace(stem.begin(), stem.end(), '-', '_');
  out.tables.emplace_back(stem, std::move(rows));
  out.tables.emplace_back(stem + "_comparisons", std::move(comparisons));
  out.summary = {{"num_units", result.num_units},
                 {"num_outcomes", result.num_outcomes},
                 {"ate", result.ate},
                 {"phi0", result.phi0},
                 {"phi1", result.phi1},
                 {"comparisons", ordered}};
  return out;
}

ExperimentOutput TabulateHomogeneity(const HomogeneitySweepResult& result,
                                     const RunOptions& options,
                                     const std::string& hash) {
  ExperimentOutput out;
  out.name = "homogeneity";
  Table rows;
  rows.columns = {"beta", "lambda", "phi0", "phi1",
                  "cluster_dp_variance", "cluster_dp_variance_se",
                  "cluster_free_variance", "cluster_free_variance_se",
                  "variance_ratio", "variance_ratio_se", "seed",
                  "config_hash"};
  for (const HomogeneityRow& row : result.rows) {
    rows.rows.push_back(
        {Fmt(row.beta), Fmt(row.lambda), Fmt(row.phi0), Fmt(row.phi1),
         Fmt(row.cluster_dp.variance.value), Fmt(row.cluster_dp.variance.se),
         Fmt(row.cluster_free.variance.value),
         Fmt(row.cluster_free.variance.se), Fmt(row.ratio.value),
         Fmt(row.ratio.se), absl::StrCat(options.seed), hash});
  }
  Table trend;
  trend.columns = {"lambda", "spearman_beta_ratio", "seed", "config_hash"};
  Json spearman = Json::array();
  for (const auto& [lambda, rho] : result.spearman) {
    trend.rows.push_back(
        {Fmt(lambda), Fmt(rho), absl::StrCat(options.seed), hash});
    spearman.push_back({{"lambda", lambda}, {"spearman", rho}});
  }
  out.tables.emplace_back("homogeneity", std::move(rows));
  out.tables.emplace_back("homogeneity_trend", std::move(trend));
  out.summary = {{"spearman", spearman}};
  return out;
}

ExperimentOutput TabulateBounds(const std::vector<BoundRow>& rows_in,
                                const RunOptions& options,
                                const std::string& hash) {
  ExperimentOutput out;
  out.name = "bound-validation";
  Table rows;
  rows.columns = {"beta", "no_dp_variance", "mc_gap", "mc_gap_se",
                  "homogeneity_term", "bound", "contained", "seed",
                  "config_hash"};
  bool all = true;
  for (const BoundRow& row : rows_in) {
    all = all && row.contained;
    rows.rows.push_back({Fmt(row.beta), Fmt(row.no_dp_variance),
                         Fmt(row.gap.value), Fmt(row.gap.se), Fmt(row.lower),
                         Fmt(row.bound), row.contained ? "true" : "false",
                         absl::StrCat(options.seed), hash});
  }
  out.tables.emplace_back("bound_validation", std::move(rows));
  out.summary = {{"all_contained", all}};
  return out;
}

ExperimentOutput TabulateDistribution(const DistributionResult& result,
                                      const RunOptions& options,
                                      const std::string& hash) {
  ExperimentOutput out;
  out.name = "distribution";
  Table samples;
  samples.columns = {"rep", "error"};
  for (size_t r = 0; r < result.errors.size(); ++r) {
    samples.rows.push_back({absl::StrCat(r), Fmt(result.errors[r])});
  }
  Table summary;
  summary.columns = {"reps", "ate", "mean_error", "mean_error_se",
                     "anderson_darling", "anderson_darling_p", "t_statistic",
                     "t_p", "seed", "config_hash"};
  summary.rows.push_back(
      {Fmt(static_cast<int>(result.errors.size())), Fmt(result.ate),
       Fmt(result.mean_error.value), Fmt(result.mean_error.se),
       Fmt(result.normality.statistic), Fmt(result.normality.p_value),
       Fmt(result.bias_test.statistic), Fmt(result.bias_test.p_value),
       absl::StrCat(options.seed), hash});
  out.tables.emplace_back("distribution", std::move(summary));
  out.tables.emplace_back("distribution_samples", std::move(samples));
  out.summary = {{"mean_error", result.mean_error.value},
                 {"mean_error_se", result.mean_error.se},
                 {"anderson_darling_p", result.normality.p_value},
                 {"t_p", result.bias_test.p_value}};
  return out;
}

ExperimentOutput TabulateBias(const BaselineBiasResult& result,
                              const RunOptions& options,
                              const std::string& hash) {
  ExperimentOutput out;
  out.name = "baseline-bias";
  Table summary;
  summary.columns = {"epsilon", "estimator", "status", "lambda", "bias",
                     "bias_se", "abs_bias", "abs_bias_se", "seed",
                     "config_hash"};
  Table realizations;
  realizations.columns = {"epsilon", "estimator", "realization",
                          "conditional_bias"};
  for (const BiasRow& row : result.rows) {
    const bool ok = row.status == "ok";
    summary.rows.push_back(
        {Fmt(row.epsilon), row.estimator, "\"" + row.status + "\"",
         row.estimator == "cluster-dp" && ok ? Fmt(row.lambda) : "",
         ok ? Fmt(row.bias.value) : "", ok ? Fmt(row.bias.se) : "",
         ok ? Fmt(row.abs_bias.value) : "", ok ? Fmt(row.abs_bias.se) : "",
         absl::StrCat(options.seed), hash});
    for (size_t m = 0; m < row.biases.size(); ++m) {
      realizations.rows.push_back({Fmt(row.epsilon), row.estimator,
                                   absl::StrCat(m), Fmt(row.biases[m])});
    }
  }
  out.tables.emplace_back("baseline_bias", std::move(summary));
  out.tables.emplace_back("baseline_bias_realizations",
                          std::move(realizations));
  out.warnings = result.warnings;
  out.summary = {{"ate", result.ate}};
  return out;
}

}  // namespace

std::vector<std::string> ExperimentNames() {
  return {"variance-sweep", "homogeneity",  "graph",
          "distribution",   "bound-validation", "baseline-bias"};
}

std::string ConfigHash(const Json& config) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : config.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return absl::StrFormat("%016x", h);
}

absl::StatusOr<ExperimentOutput> RunExperiment(std::string_view name,
                                               const Json& config,
                                               const RunOptions& options) {
  const Json& j = config.is_null() ? Json::object() : config;
  const std::string hash = ConfigHash(j);
  if (name == "variance-sweep" || name == "graph") {
    absl::StatusOr<VarianceSweepConfig> parsed =
        name == "graph" ? ParseGraphSweepConfig(j) : ParseVarianceSweepConfig(j);
    if (!parsed.ok()) return parsed.status();
    absl::StatusOr<VarianceSweepResult> result =
        RunVarianceSweep(*parsed, options);
    if (!result.ok()) return result.status();
    return TabulateSweep(std::string(name), *result, options, hash);
  }
  if (name == "homogeneity") {
    absl::StatusOr<HomogeneitySweepConfig> parsed =
        ParseHomogeneitySweepConfig(j);
    if (!parsed.ok()) return parsed.status();
    absl::StatusOr<HomogeneitySweepResult> result =
        RunHomogeneitySweep(*parsed, options);
    if (!result.ok()) return result.status();
    return TabulateHomogeneity(*result, options, hash);
  }
  if (name == "bound-validation") {
    absl::StatusOr<BoundValidationConfig> parsed =
        ParseBoundValidationConfig(j);
    if (!parsed.ok()) return parsed.status();
    absl::StatusOr<std::vector<BoundRow>> result =
        RunBoundValidation(*parsed, options);
    if (!result.ok()) return result.status();
    return TabulateBounds(*result, options, hash);
  }
  if (name == "distribution") {
    absl::StatusOr<DistributionConfig> parsed = ParseDistributionConfig(j);
    if (!parsed.ok()) return parsed.status();
    absl::StatusOr<DistributionResult> result =
        RunDistributionCheck(*parsed, options);
    if (!result.ok()) return result.status();
    return TabulateDistribution(*result, options, hash);
  }
  if (name == "baseline-bias") {
    absl::StatusOr<BaselineBiasConfig> parsed = ParseBaselineBiasConfig(j);
    if (!parsed.ok()) return parsed.status();
    absl::StatusOr<BaselineBiasResult> result =
        RunBaselineBias(*parsed, options);
    if (!result.ok()) return result.status();
    return TabulateBias(*result, options, hash);
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown experiment '", std::string(name), "'; expected one of ",
                   absl::StrJoin(ExperimentNames(), ", ")));
}

absl::Status WriteExperimentOutput(const ExperimentOutput& output,
                                   const Json& config,
                                   const RunOptions& options,
                                   double runtime_ms, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    return absl::InvalidArgumentError(
        absl::StrCat("cannot create ", dir, ": ", ec.message()));
  }
  Json files = Json::array();
  for (const auto& [stem, table] : output.tables) {
    const std::string path = (std::filesystem::path(dir) / (stem + ".csv"));
    std::ofstream out(path, std::ios::binary);
    out << table.ToCsv();
    if (!out) return absl::InvalidArgumentError(absl::StrCat("cannot write ", path));
    files.push_back(stem + ".csv");
  }
  const Json manifest = {
      {"experiment", output.name},
      {"version", std::string(kVersion)},
      {"seed", options.seed},
      {"threads", options.threads},
      {"config", config.is_null() ? Json::object() : config},
      {"config_hash", ConfigHash(config.is_null() ? Json::object() : config)},
      {"runtime_ms", runtime_ms},
      {"files", files},
      {"warnings", output.warnings},
      {"summary", output.summary},
  };
  const std::string path = std::filesystem::path(dir) / "manifest.json";
  std::ofstream out(path, std::ios::binary);
  out << manifest.dump(2) << "\n";
  if (!out) return absl::InvalidArgumentError(absl::StrCat("cannot write ", path));
  return absl::OkStatus();
}

}  // namespace clusterdp

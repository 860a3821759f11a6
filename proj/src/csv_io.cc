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

#include "clusterdp/csv_io.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "absl/status/status.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "clusterdp/estimation.h"
#include "clusterdp/extended_real.h"
#include "json.hpp"

namespace clusterdp {
namespace {

using ::nlohmann::json;

struct Row {
  int line = 0;
  std::vector<std::string> fields;
};

absl::StatusOr<std::vector<Row>> ReadRows(
    std::istream& in, const std::vector<std::string>& header) {
  std::string text;
  int line = 0;
  std::vector<Row> rows;
  std::vector<std::string> errors;
  bool seen_header = false;
  const std::string expected = absl::StrJoin(header, ",");
  while (std::getline(in, text)) {
    ++line;
    absl::string_view view = absl::StripAsciiWhitespace(text);
    if (view.empty()) continue;
    if (!seen_header) {
      if (view != expected) {
        return absl::InvalidArgumentError(absl::StrCat(
            "line ", line, ": expected header '", expected, "'"));
      }
      seen_header = true;
      continue;
    }
    Row row{line, absl::StrSplit(view, ',')};
    if (row.fields.size() != header.size()) {
      errors.push_back(absl::StrCat("line ", line, ": malformed row (expected ",
                                    header.size(), " fields, got ",
                                    row.fields.size(), ")"));
      continue;
    }
    for (std::string& f : row.fields) {
      f = std::string(absl::StripAsciiWhitespace(f));
    }
    rows.push_back(std::move(row));
  }
  if (!seen_header) return absl::InvalidArgumentError("missing header");
  if (!errors.empty()) {
    return absl::InvalidArgumentError(absl::StrJoin(errors, "; "));
  }
  return rows;
}

bool ParseNumber(const std::string& text, double* out) {
  return absl::SimpleAtod(text, out) && std::isfinite(*out);
}

absl::StatusOr<std::ifstream> Open(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  return in;
}

json NumberOrInf(ExtendedReal x) {
  if (x.is_infinite()) return "inf";
  return x.value();
}

absl::StatusOr<ExtendedReal> ReadExtended(const json& j) {
  if (j.is_string() && j.get<std::string>() == "inf") {
    return ExtendedReal::Infinity();
  }
  if (j.is_number()) return ExtendedReal(j.get<double>());
  return absl::InvalidArgumentError("expected a number or \"inf\"");
}

}  // namespace

absl::StatusOr<std::vector<PopulationRecord>> ParsePopulationCsv(
    std::istream& in) {
  absl::StatusOr<std::vector<Row>> rows =
      ReadRows(in, {"unit_id", "cluster", "y0", "y1"});
  if (!rows.ok()) return rows.status();
  std::vector<PopulationRecord> records;
  std::vector<std::string> errors;
  for (const Row& row : *rows) {
    PopulationRecord r{row.fields[0], row.fields[1], 0, 0, row.line};
    if (r.unit_id.empty() || r.cluster.empty() ||
        !ParseNumber(row.fields[2], &r.y0) ||
        !ParseNumber(row.fields[3], &r.y1)) {
      errors.push_back(absl::StrCat("line ", row.line, ": malformed row"));
      continue;
    }
    records.push_back(std::move(r));
  }
  if (!errors.empty()) {
    return absl::InvalidArgumentError(absl::StrJoin(errors, "; "));
  }
  return records;
}

absl::StatusOr<Population> ReadPopulationCsv(std::istream& in,
                                             const OutcomeSpace& space) {
  absl::StatusOr<std::vector<PopulationRecord>> records =
      ParsePopulationCsv(in);
  if (!records.ok()) return records.status();
  return Population::FromRecords(*records, space);
}

absl::StatusOr<Population> ReadPopulationFile(const std::string& path,
                                              const OutcomeSpace& space) {
  absl::StatusOr<std::ifstream> in = Open(path);
  if (!in.ok()) return in.status();
  return ReadPopulationCsv(*in, space);
}

void WritePopulationCsv(const Population& pop, std::ostream& out) {
  out << "unit_id,cluster,y0,y1\n";
  for (int i = 0; i < pop.size(); ++i) {
    out << pop.unit_id(i) << ',' << pop.cluster_label(pop.cluster(i)) << ','
        << FormatDouble(pop.y0(i)) << ',' << FormatDouble(pop.y1(i)) << '\n';
  }
}

absl::StatusOr<ObservedData> ReadObservedCsv(std::istream& in,
                                             const OutcomeSpace& space) {
  absl::StatusOr<std::vector<Row>> rows =
      ReadRows(in, {"unit_id", "cluster", "z", "y"});
  if (!rows.ok()) return rows.status();
  std::unordered_map<std::string, int> dense;
  std::unordered_set<std::string> seen;
  std::vector<std::string> labels, ids, errors;
  std::vector<int> cluster, y;
  std::vector<uint8_t> z;
  for (const Row& row : *rows) {
    double value;
    const std::string& zf = row.fields[2];
    if (row.fields[0].empty() || row.fields[1].empty() ||
        (zf != "0" && zf != "1") || !ParseNumber(row.fields[3], &value)) {
      errors.push_back(absl::StrCat("line ", row.line, ": malformed row"));
      continue;
    }
    std::optional<int> index = space.IndexOf(value);
    if (!index.has_value()) {
      errors.push_back(absl::StrCat("line ", row.line,
                                    ": outcome outside space (",
                                    FormatDouble(value), ")"));
      continue;
    }
    if (!seen.insert(row.fields[0]).second) {
      errors.push_back(absl::StrCat("line ", row.line, ": duplicate unit '",
                                    row.fields[0], "'"));
      continue;
    }
    auto [it, inserted] =
        dense.emplace(row.fields[1], static_cast<int>(labels.size()));
    if (inserted) labels.push_back(row.fields[1]);
    ids.push_back(row.fields[0]);
    cluster.push_back(it->second);
    z.push_back(zf == "1");
    y.push_back(*index);
  }
  if (!errors.empty()) {
    return absl::InvalidArgumentError(absl::StrJoin(errors, "; "));
  }
  return MakeObservedData(space, std::move(cluster), std::move(z),
                          std::move(y), std::move(ids), std::move(labels));
}

absl::StatusOr<ObservedData> ReadObservedFile(const std::string& path,
                                              const OutcomeSpace& space) {
  absl::StatusOr<std::ifstream> in = Open(path);
  if (!in.ok()) return in.status();
  return ReadObservedCsv(*in, space);
}

void WriteObservedCsv(const ObservedData& obs, std::ostream& out) {
  out << "unit_id,cluster,z,y\n";
  for (int i = 0; i < obs.size(); ++i) {
    out << (*obs.unit_ids)[i] << ',' << (*obs.cluster_labels)[obs.cluster[i]]
        << ',' << int{obs.z[i]} << ',' << FormatDouble(obs.space.value(obs.y[i]))
        << '\n';
  }
}

void WriteReleaseCsv(const PrivatizedRelease& release, std::ostream& out) {
  out << "unit_id,cluster,z,y_tilde\n";
  for (int i = 0; i < release.size(); ++i) {
    out << (*release.unit_ids)[i] << ','
        << (*release.cluster_labels)[release.cluster[i]] << ','
        << int{release.z[i]} << ','
        << FormatDouble(release.space.value(release.y_tilde[i])) << '\n';
  }
}

std::string ReleaseSidecarJson(const PrivatizedRelease& release) {
  json j;
  j["mechanism"] = std::string(KindName(release.params.kind));
  j["gamma"] = release.params.gamma;
  j["sigma"] = NumberOrInf(release.params.sigma);
  j["lambda"] = release.params.lambda;
  j["outcomes"] = std::vector<double>(release.space.values().begin(),
                                      release.space.values().end());
  j["clusters"] = *release.cluster_labels;
  json arms = json::array();
  const bool has_debias = release.debias.num_clusters() == release.num_clusters;
  for (int c = 0; c < release.num_clusters; ++c) {
    for (int a = 0; a < 2; ++a) {
      json entry;
      entry["cluster"] = (*release.cluster_labels)[c];
      entry["arm"] = a;
      auto prior = release.prior.row(c, a);
      entry["prior"] = std::vector<double>(prior.begin(), prior.end());
      if (has_debias) {
        auto row = release.debias.row(c, a);
        entry["debias"] = std::vector<double>(row.begin(), row.end());
      }
      arms.push_back(std::move(entry));
    }
  }
  j["arms"] = std::move(arms);
  return j.dump(2) + "\n";
}

absl::StatusOr<PrivatizedRelease> ReadRelease(std::istream& csv,
                                              std::istream& sidecar) {
  json j = json::parse(sidecar, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    return absl::InvalidArgumentError("sidecar is not valid JSON");
  }
  PrivatizedRelease release;
  try {
    absl::StatusOr<OutcomeSpace> space =
        OutcomeSpace::Create(j.at("outcomes").get<std::vector<double>>());
    if (!space.ok()) return space.status();
    release.space = *std::move(space);
    absl::StatusOr<MechanismKind> kind =
        ParseKind(j.at("mechanism").get<std::string>());
    if (!kind.ok()) return kind.status();
    release.params.kind = *kind;
    release.params.gamma = j.at("gamma").get<double>();
    absl::StatusOr<ExtendedReal> sigma = ReadExtended(j.at("sigma"));
    if (!sigma.ok()) return sigma.status();
    release.params.sigma = *sigma;
    release.params.lambda = j.at("lambda").get<double>();
    auto labels = j.at("clusters").get<std::vector<std::string>>();
    release.num_clusters = static_cast<int>(labels.size());
    const int k = release.space.size();
    release.prior = ProjectedPrior(release.num_clusters, k);
    release.debias = ArmTable(release.num_clusters, k);
    std::unordered_map<std::string, int> dense;
    for (int c = 0; c < release.num_clusters; ++c) dense[labels[c]] = c;
    std::vector<std::vector<bool>> seen(release.num_clusters,
                                        std::vector<bool>(2, false));
    for (const json& entry : j.at("arms")) {
      auto it = dense.find(entry.at("cluster").get<std::string>());
      const int a = entry.at("arm").get<int>();
      if (it == dense.end() || (a != 0 && a != 1)) {
        return absl::InvalidArgumentError("sidecar arm entry out of range");
      }
      auto prior = entry.at("prior").get<std::vector<double>>();
      if (static_cast<int>(prior.size()) != k) {
        return absl::InvalidArgumentError("sidecar prior length differs from K");
      }
      std::ranges::copy(prior, release.prior.mutable_row(it->second, a).begin());
      if (!entry.contains("debias")) {
        return absl::FailedPreconditionError("missing debias row");
      }
      auto row = entry.at("debias").get<std::vector<double>>();
      if (static_cast<int>(row.size()) != k) {
        return absl::InvalidArgumentError("sidecar debias length differs from K");
      }
      std::ranges::copy(row, release.debias.mutable_row(it->second, a).begin());
      seen[it->second][a] = true;
    }
    for (int c = 0; c < release.num_clusters; ++c) {
      if (!seen[c][0] || !seen[c][1]) {
        return absl::FailedPreconditionError(
            absl::StrCat("missing debias row for cluster '", labels[c], "'"));
      }
    }
    release.cluster_labels =
        std::make_shared<const std::vector<std::string>>(std::move(labels));

    absl::StatusOr<std::vector<Row>> rows =
        ReadRows(csv, {"unit_id", "cluster", "z", "y_tilde"});
    if (!rows.ok()) return rows.status();
    std::vector<std::string> ids, errors;
    for (const Row& row : *rows) {
      double value;
      auto it = dense.find(row.fields[1]);
      const std::string& zf = row.fields[2];
      std::optional<int> index;
      if (ParseNumber(row.fields[3], &value)) {
        index = release.space.IndexOf(value);
      }
      if (it == dense.end() || (zf != "0" && zf != "1") || !index) {
        errors.push_back(absl::StrCat("line ", row.line, ": malformed row"));
        continue;
      }
      ids.push_back(row.fields[0]);
      release.cluster.push_back(it->second);
      release.z.push_back(zf == "1");
      release.y_tilde.push_back(*index);
    }
    if (!errors.empty()) {
      return absl::InvalidArgumentError(absl::StrJoin(errors, "; "));
    }
    release.unit_ids =
        std::make_shared<const std::vector<std::string>>(std::move(ids));
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed sidecar: ", e.what()));
  }
  return release;
}

absl::StatusOr<PrivatizedRelease> ReadReleaseFiles(
    const std::string& csv_path, const std::string& sidecar_path) {
  absl::StatusOr<std::ifstream> csv = Open(csv_path);
  if (!csv.ok()) return csv.status();
  absl::StatusOr<std::ifstream> sidecar = Open(sidecar_path);
  if (!sidecar.ok()) return sidecar.status();
  return ReadRelease(*csv, *sidecar);
}

absl::StatusOr<OutcomeSpace> ParseOutcomeSpace(const std::string& spec) {
  std::vector<std::string> range = absl::StrSplit(spec, ':');
  if (range.size() == 2) {
    int lo, hi;
    if (!absl::SimpleAtoi(range[0], &lo) || !absl::SimpleAtoi(range[1], &hi) ||
        hi <= lo) {
      return absl::InvalidArgumentError(
          absl::StrCat("bad outcome range '", spec, "'"));
    }
    return OutcomeSpace::IntegerRange(lo, hi);
  }
  std::vector<double> values;
  for (absl::string_view part : absl::StrSplit(spec, ',')) {
    double v;
    if (!ParseNumber(std::string(absl::StripAsciiWhitespace(part)), &v)) {
      return absl::InvalidArgumentError(
          absl::StrCat("bad outcome value '", part, "'"));
    }
    values.push_back(v);
  }
  return OutcomeSpace::Create(std::move(values));
}

}  // namespace clusterdp

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

#ifndef CLUSTERDP_CSV_IO_H_
#define CLUSTERDP_CSV_IO_H_

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "clusterdp/outcome_space.h"
#include "clusterdp/population.h"
#include "clusterdp/release.h"

namespace clusterdp {

// Population files: header `unit_id,cluster,y0,y1`, one unit per row.
// Malformed rows are reported with their line numbers.
absl::StatusOr<std::vector<PopulationRecord>> ParsePopulationCsv(
    std::istream& in);
absl::StatusOr<Population> ReadPopulationCsv(std::istream& in,
                                             const OutcomeSpace& space);
absl::StatusOr<Population> ReadPopulationFile(const std::string& path,
                                              const OutcomeSpace& space);
void WritePopulationCsv(const Population& pop, std::ostream& out);

// Observed-data files: header `unit_id,cluster,z,y`.
absl::StatusOr<ObservedData> ReadObservedCsv(std::istream& in,
                                             const OutcomeSpace& space);
absl::StatusOr<ObservedData> ReadObservedFile(const std::string& path,
                                              const OutcomeSpace& space);
void WriteObservedCsv(const ObservedData& obs, std::ostream& out);

// Releases: a CSV `unit_id,cluster,z,y_tilde` plus a JSON sidecar carrying
// the outcome space, the parameters, and the prior and debias row of every
// (cluster, arm). Both outputs are byte-stable.
void WriteReleaseCsv(const PrivatizedRelease& release, std::ostream& out);
std::string ReleaseSidecarJson(const PrivatizedRelease& release);
absl::StatusOr<PrivatizedRelease> ReadRelease(std::istream& csv,
                                              std::istream& sidecar);
absl::StatusOr<PrivatizedRelease> ReadReleaseFiles(
    const std::string& csv_path, const std::string& sidecar_path);

// "a,b,c" -> values, or "lo:hi" -> the integers lo..hi.
absl::StatusOr<OutcomeSpace> ParseOutcomeSpace(const std::string& spec);

}  // namespace clusterdp

#endif  // CLUSTERDP_CSV_IO_H_

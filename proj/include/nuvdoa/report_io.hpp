// SPDX-License-Identifier: Apache-2.0
//
// nuvdoa: sparse Bayesian direction-of-arrival estimation for uniform linear arrays
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// JSON / JSONL / CSV serialization of configs, reports, spectra and
// calibration tables. Doubles are written in shortest round-trip form, so a
// report reloads bit-identically; non-finite values are written as null.

#ifndef NUVDOA_REPORT_IO_HPP
#define NUVDOA_REPORT_IO_HPP

#include "nuvdoa/harness.hpp"

#include "json.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace nuvdoa
{

inline constexpr int kSchemaVersion = 1;

/// Starts from the ScenarioConfig defaults and applies the keys present.
/// Unknown keys, wrong types and a newer schema_version throw ConfigError.
ScenarioConfig config_from_json(const nlohmann::json &j);
nlohmann::json config_to_json(const ScenarioConfig &config);
ScenarioConfig load_config(const std::filesystem::path &path);

nlohmann::json record_to_json(const TrialRecord &record);
TrialRecord record_from_json(const nlohmann::json &j);

/// Per report: one header line (cell settings and aggregates), then one line
/// per trial.
void write_reports_jsonl(std::ostream &out, const std::vector<RunReport> &reports);
/// Throws ConfigError when the stored aggregates disagree with the records.
std::vector<RunReport> read_reports_jsonl(std::istream &in);

/// method,snr_db,L,K,trials,rmse_deg,median_abs_error_deg,detection_rate,runtime_ms_mean
void write_aggregate_csv(std::ostream &out, const std::vector<RunReport> &reports);

/// angle_deg,magnitude
void write_spectrum_csv(std::ostream &out, const Spectrum &spectrum);

/// One header line with the scenario, then one line per snapshot with the
/// real and imaginary parts of the N sensor samples.
void write_snapshots_jsonl(std::ostream &out, const Scenario &scenario, std::uint64_t seed,
                           const SnapshotBatch &batch);

nlohmann::json error_table_to_json(const ErrorStdTable &table);
ErrorStdTable error_table_from_json(const nlohmann::json &j);

nlohmann::json sigma2_table_to_json(const Sigma2Table &table);
Sigma2Table sigma2_table_from_json(const nlohmann::json &j);
nlohmann::json sigma2_choices_to_json(const std::vector<Sigma2Choice> &choices,
                                      const std::vector<double> &candidates);

nlohmann::json read_json_file(const std::filesystem::path &path);
void write_json_file(const std::filesystem::path &path, const nlohmann::json &j);

} // namespace nuvdoa

#endif

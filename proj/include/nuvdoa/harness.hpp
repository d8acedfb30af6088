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

// Monte-Carlo experiment runner: scenario configuration, per-trial execution
// of any estimator, report aggregation and the two calibration sweeps that
// produce the epsilon and sigma2 tables.
//
// Every trial is a pure function of (config, trial_index): its seed is
// config.seed + trial_index and all randomness (DoA draw, snapshots) is derived
// from it. Trials run on a worker pool but land in fixed slots, so reports
// do not depend on the worker count.

#ifndef NUVDOA_HARNESS_HPP
#define NUVDOA_HARNESS_HPP

#include "nuvdoa/hierarchical.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nuvdoa
{

enum class Method
{
    nuv_doa,
    nuv_ssr_flat,
    bartlett,
    mvdr,
    music,
    root_music,
};

const char *to_string(Method method);
/// Throws ConfigError for unknown names.
Method method_from_string(const std::string &name);

struct Sigma2Entry
{
    double snr_db = 0.0;
    double sigma2 = 1.0;

    bool operator==(const Sigma2Entry &) const = default;
};

/// Calibrated sigma2 per SNR. Lookup interpolates log(sigma2) linearly in
/// SNR and clamps to the end entries outside the table.
class Sigma2Table
{
public:
    Sigma2Table() = default;
    explicit Sigma2Table(std::vector<Sigma2Entry> entries);

    double lookup(double snr_db) const;
    const std::vector<Sigma2Entry> &entries() const { return entries_; }

    bool operator==(const Sigma2Table &) const = default;

private:
    std::vector<Sigma2Entry> entries_;
};

/// Built-in calibration tables (N = 16, L = 100, coarse step 0.1 deg).
const ErrorStdTable &default_error_table();
const Sigma2Table &default_sigma2_table();

struct DoaSampling
{
    enum class Mode
    {
        fixed,
        uniform_range,
    };

    Mode mode = Mode::uniform_range;
    std::vector<double> fixed_deg;
    double lo_deg = -75.0;
    double hi_deg = 75.0;
    /// When set, sources sit at theta0 + i * separation with theta0 uniform.
    std::optional<double> separation_deg;
    /// Rejection threshold for independently drawn sources.
    double min_separation_deg = 0.0;
    /// Snap every drawn angle to the nearest cell of the flat grid.
    bool on_grid = false;
    /// Draw |theta| from [lo, hi] and give it a random sign.
    bool symmetric = false;

    bool operator==(const DoaSampling &) const = default;
};

/// Regime presets for DoA sampling: |theta| <= 75 deg (mid-interval) and
/// 75 <= |theta| <= 85 deg (boundary).
DoaSampling mid_interval_sampling();
DoaSampling boundary_sampling();

struct ScenarioConfig
{
    int n_sensors = 16;
    int n_sources = 1;
    int n_snapshots = 100;
    double snr_db = 10.0;
    SourceModel source_model = SourceModel::noncoherent;

    /// The first entry is the method of single-trial commands; sweeps run all.
    std::vector<Method> methods{Method::nuv_doa};
    int trials = 100;
    std::uint64_t seed = 1;
    std::vector<double> snr_sweep;
    DoaSampling doa_sampling;

    SolverConfig solver;
    std::optional<Sigma2Table> sigma2_table = default_sigma2_table();
    std::vector<double> sigma2_candidates;

    double snr_gate_db = 7.0;
    int coarse_grid_cells = 1800;
    double fine_step_deg = 0.01;
    double alpha_deg = 0.5;
    ErrorStdTable error_table = default_error_table();
    bool use_known_snr = true;

    /// Grid of the flat estimators (nuv_ssr_flat and the spectral baselines).
    int grid_cells = 1800;
    std::optional<double> mvdr_load;
    double detection_threshold_deg = 1.0;
    /// Wall-clock timing makes reports non-reproducible, so it is opt-in.
    bool record_timing = false;
    int workers = 1;

    Method method() const { return methods.front(); }
    /// Throws ConfigError on inconsistent settings.
    void validate() const;
};

/// sigma2 for the given SNR: the table when present, otherwise solver.sigma2.
double resolve_sigma2(const ScenarioConfig &config, double snr_db);

/// Pipeline settings of the config at the given SNR.
PipelineConfig pipeline_config(const ScenarioConfig &config, double snr_db, int workers);

struct TrialRecord
{
    int trial_index = 0;
    std::uint64_t seed = 0;
    std::string method;
    double snr_db = 0.0;
    std::vector<double> true_doas_deg;
    std::vector<double> estimates_deg;
    std::vector<double> matched_errors_deg;
    double runtime_ms = 0.0;
    bool failed = false;
    std::vector<std::string> flags;

    bool operator==(const TrialRecord &) const = default;
};

struct Aggregates
{
    double rmse_deg = 0.0;
    double median_abs_error_deg = 0.0;
    double detection_rate = 0.0;
    int false_alarm_count = 0;
    double runtime_ms_mean = 0.0;
    int failed_trials = 0;
};

struct RunReport
{
    std::string method;
    double snr_db = 0.0;
    int n_snapshots = 0;
    int n_sources = 0;
    double detection_threshold_deg = 1.0;
    std::vector<TrialRecord> records;
    Aggregates aggregates;
};

/// rmse and median over every matched error of the non-failed trials (NaN
/// when there are none); detection = all matched errors below the threshold;
/// a false alarm is an estimate at or beyond the threshold from its match.
Aggregates aggregate(const std::vector<TrialRecord> &records, double detection_threshold_deg);

/// True when every aggregate matches recomputation within tol (NaN == NaN).
bool aggregates_consistent(const RunReport &report, double tol = 1e-12);

/// Angles (radians) for one trial, drawn from the config's DoA sampling.
std::vector<double> sample_doas(const ScenarioConfig &config, std::uint64_t trial_seed);

Scenario trial_scenario(const ScenarioConfig &config, std::uint64_t trial_seed);

std::uint64_t simulation_seed(std::uint64_t trial_seed);

/// Runs config.method() at config.snr_db. Estimator failures are captured in
/// the record (failed + flag), never thrown.
TrialRecord run_trial(const ScenarioConfig &config, int trial_index);

/// One report per (method, snr) in config order.
std::vector<RunReport> run_sweep(const ScenarioConfig &config);

RunReport run_cell(const ScenarioConfig &config, Method method, double snr_db);

/// Coarse-estimator error spread per SNR of config.snr_sweep.
ErrorStdTable calibrate_epsilon(const ScenarioConfig &config);

struct Sigma2Choice
{
    double snr_db = 0.0;
    double sigma2 = 0.0;
    std::vector<double> candidate_rmse_deg;
};

/// Per SNR the candidate with the lowest trial RMSE (ties: smaller sigma2).
std::vector<Sigma2Choice> calibrate_sigma2(const ScenarioConfig &config, std::vector<double> candidates);

Sigma2Table to_table(const std::vector<Sigma2Choice> &choices);

/// Log-spaced candidates from 1e-2 to 1e4, including 3, 8e2 and 1e4.
std::vector<double> default_sigma2_candidates();


} // namespace nuvdoa

#endif

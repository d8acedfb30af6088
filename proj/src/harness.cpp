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

#include "nuvdoa/harness.hpp"
#include "nuvdoa/baselines.hpp"
#include "nuvdoa/parallel.hpp"
#include "nuvdoa/scoring.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

namespace nuvdoa
{

namespace
{

constexpr std::array<std::pair<Method, const char *>, 6> kMethodNames{{
    {Method::nuv_doa, "nuv_doa"},
    {Method::nuv_ssr_flat, "nuv_ssr_flat"},
    {Method::bartlett, "bartlett"},
    {Method::mvdr, "mvdr"},
    {Method::music, "music"},
    {Method::root_music, "root_music"},
}};

std::uint64_t derive_seed(std::uint64_t base, std::uint32_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32), stream};
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

struct MethodOutput
{
    std::vector<double> angles; // radians
    std::vector<std::string> flags;
};

std::vector<double> peak_angles(const Spectrum &spec, int k, std::vector<std::string> &flags)
{
    const auto peaks = select_peaks(spec, PeakRule::fixed_k(k));
    if (peaks.filled_by_magnitude > 0)
        flags.push_back("peaks_filled_by_magnitude");
    return peaks.angles;
}

MethodOutput run_method(const ScenarioConfig &config, Method method, const SnapshotBatch &batch)
{
    MethodOutput out;
    const int k = config.n_sources;
    const UlaGeometry geometry(batch.n_sensors());
    switch (method) {
    case Method::nuv_doa: {
        const auto result = estimate_multisource(batch, k, pipeline_config(config, config.snr_db, config.workers));
        out.angles = result.angles;
        out.flags.push_back(std::string("coarse:") + to_string(result.trace.coarse_method));
        for (auto &f : result.trace.all_flags())
            out.flags.push_back(f);
        break;
    }
    case Method::nuv_ssr_flat: {
        const auto grid = build_grid(config.grid_cells);
        SolverConfig solver = config.solver;
        solver.sigma2 = resolve_sigma2(config, config.snr_db);
        solver.n_snapshots = batch.n_snapshots();
        const auto result = solve(build_dictionary(grid, geometry), snapshot_mean(batch), solver);
        if (!result.trace.converged)
            out.flags.push_back("not_converged");
        out.angles = peak_angles(spectrum(result.moments, grid), k, out.flags);
        break;
    }
    case Method::bartlett:
        out.angles = peak_angles(bartlett_spectrum(sample_covariance(batch), build_grid(config.grid_cells)), k,
                                 out.flags);
        break;
    case Method::mvdr:
        out.angles = peak_angles(
            mvdr_spectrum(sample_covariance(batch), build_grid(config.grid_cells), config.mvdr_load), k,
            out.flags);
        break;
    case Method::music:
        out.angles =
            peak_angles(music_spectrum(sample_covariance(batch), build_grid(config.grid_cells), k), k, out.flags);
        break;
    case Method::root_music:
        out.angles = root_music(sample_covariance(batch), k, geometry);
        break;
    }
    std::sort(out.angles.begin(), out.angles.end());
    return out;
}

std::vector<double> to_degrees(const std::vector<double> &rad)
{
    std::vector<double> deg(rad.size());
    std::transform(rad.begin(), rad.end(), deg.begin(), rad_to_deg);
    return deg;
}

bool close(double a, double b, double tol)
{
    if (std::isnan(a) || std::isnan(b))
        return std::isnan(a) && std::isnan(b);
    return std::abs(a - b) <= tol * std::max(1.0, std::abs(a));
}

} // namespace

const char *to_string(Method method)
{
    for (const auto &[m, name] : kMethodNames)
        if (m == method)
            return name;
    return "unknown";
}

Method method_from_string(const std::string &name)
{
    for (const auto &[m, n] : kMethodNames)
        if (name == n)
            return m;
    throw ConfigError("unknown method '" + name + "'");
}

Sigma2Table::Sigma2Table(std::vector<Sigma2Entry> entries) : entries_(std::move(entries))
{
    for (const auto &e : entries_)
        if (!(e.sigma2 > 0.0) || !std::isfinite(e.sigma2) || !std::isfinite(e.snr_db))
            throw DomainError("Sigma2Table: sigma2 must be positive and finite");
    std::sort(entries_.begin(), entries_.end(),
              [](const Sigma2Entry &a, const Sigma2Entry &b) { return a.snr_db < b.snr_db; });
    for (std::size_t i = 1; i < entries_.size(); ++i)
        if (entries_[i].snr_db == entries_[i - 1].snr_db)
            throw DomainError("Sigma2Table: duplicate SNR entry");
}

double Sigma2Table::lookup(double snr_db) const
{
    if (entries_.empty())
        throw DomainError("Sigma2Table: empty table");
    if (snr_db <= entries_.front().snr_db)
        return entries_.front().sigma2;
    if (snr_db >= entries_.back().snr_db)
        return entries_.back().sigma2;
    auto upper = std::lower_bound(entries_.begin(), entries_.end(), snr_db,
                                  [](const Sigma2Entry &e, double s) { return e.snr_db < s; });
    if (upper->snr_db == snr_db)
        return upper->sigma2;
    const auto lower = std::prev(upper);
    const double t = (snr_db - lower->snr_db) / (upper->snr_db - lower->snr_db);
    return std::exp(std::log(lower->sigma2) + t * (std::log(upper->sigma2) - std::log(lower->sigma2)));
}

DoaSampling mid_interval_sampling()
{
    DoaSampling s;
    s.lo_deg = -75.0;
    s.hi_deg = 75.0;
    return s;
}

DoaSampling boundary_sampling()
{
    DoaSampling s;
    s.lo_deg = 75.0;
    s.hi_deg = 85.0;
    s.symmetric = true;
    return s;
}

void ScenarioConfig::validate() const
{
    if (n_sensors < 2)
        throw ConfigError("n_sensors must be >= 2");
    if (n_sources < 1 || n_sources >= n_sensors)
        throw ConfigError("n_sources must satisfy 1 <= K < N");
    if (n_sources > 8)
        throw ConfigError("scoring supports at most 8 sources");
    if (n_snapshots < 1)
        throw ConfigError("n_snapshots must be >= 1");
    if (methods.empty())
        throw ConfigError("at least one method is required");
    if (trials < 1)
        throw ConfigError("trials must be >= 1");
    if (workers < 1)
        throw ConfigError("workers must be >= 1");
    if (grid_cells < 2)
        throw ConfigError("grid_cells must be >= 2");
    if (!(detection_threshold_deg > 0.0))
        throw ConfigError("detection_threshold_deg must be positive");
    if (doa_sampling.mode == DoaSampling::Mode::fixed) {
        if (static_cast<int>(doa_sampling.fixed_deg.size()) != n_sources)
            throw ConfigError("fixed DoA list must have n_sources entries");
    } else {
        if (!(doa_sampling.lo_deg <= doa_sampling.hi_deg) || doa_sampling.lo_deg < -90.0 ||
            doa_sampling.hi_deg >= 90.0)
            throw ConfigError("uniform DoA range must lie in [-90, 90) with lo <= hi");
        if (doa_sampling.symmetric && doa_sampling.lo_deg < 0.0)
            throw ConfigError("symmetric DoA sampling needs 0 <= lo");
        if (doa_sampling.separation_deg &&
            doa_sampling.hi_deg - doa_sampling.lo_deg < (n_sources - 1) * *doa_sampling.separation_deg)
            throw ConfigError("DoA range too narrow for the requested separation");
    }
    try {
        SolverConfig probe = solver;
        probe.sigma2 = sigma2_table ? 1.0 : solver.sigma2;
        probe.validate();
        pipeline_config(*this, snr_db, 1).validate();
    } catch (const DomainError &e) {
        throw ConfigError(e.what());
    }
}

double resolve_sigma2(const ScenarioConfig &config, double snr_db)
{
    return config.sigma2_table ? config.sigma2_table->lookup(snr_db) : config.solver.sigma2;
}

PipelineConfig pipeline_config(const ScenarioConfig &config, double snr_db, int workers)
{
    PipelineConfig p;
    p.snr_gate_db = config.snr_gate_db;
    p.coarse_grid_cells = config.coarse_grid_cells;
    p.fine_step = deg_to_rad(config.fine_step_deg);
    p.alpha = deg_to_rad(config.alpha_deg);
    p.solver = config.solver;
    p.solver.sigma2 = resolve_sigma2(config, snr_db);
    p.solver.n_snapshots = config.n_snapshots;
    p.error_table = config.error_table;
    if (config.use_known_snr)
        p.known_snr_db = snr_db;
    p.workers = workers;
    return p;
}

Aggregates aggregate(const std::vector<TrialRecord> &records, double detection_threshold_deg)
{
    Aggregates a;
    std::vector<double> abs_errors;
    double squared = 0.0;
    int detected = 0;
    double runtime = 0.0;
    for (const auto &r : records) {
        runtime += r.runtime_ms;
        if (r.failed) {
            ++a.failed_trials;
            continue;
        }
        bool all_close = true;
        for (double e : r.matched_errors_deg) {
            abs_errors.push_back(std::abs(e));
            squared += e * e;
            if (!(std::abs(e) < detection_threshold_deg)) {
                all_close = false;
                ++a.false_alarm_count;
            }
        }
        if (all_close)
            ++detected;
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    a.rmse_deg = abs_errors.empty() ? nan : std::sqrt(squared / static_cast<double>(abs_errors.size()));
    a.median_abs_error_deg = median(abs_errors);
    a.detection_rate = records.empty() ? nan : static_cast<double>(detected) / static_cast<double>(records.size());
    a.runtime_ms_mean = records.empty() ? nan : runtime / static_cast<double>(records.size());
    return a;
}

bool aggregates_consistent(const RunReport &report, double tol)
{
    const auto fresh = aggregate(report.records, report.detection_threshold_deg);
    const auto &a = report.aggregates;
    return close(a.rmse_deg, fresh.rmse_deg, tol) &&
           close(a.median_abs_error_deg, fresh.median_abs_error_deg, tol) &&
           close(a.detection_rate, fresh.detection_rate, tol) &&
           close(a.runtime_ms_mean, fresh.runtime_ms_mean, tol) &&
           a.false_alarm_count == fresh.false_alarm_count && a.failed_trials == fresh.failed_trials;
}

std::vector<double> sample_doas(const ScenarioConfig &config, std::uint64_t trial_seed)
{
    const auto &s = config.doa_sampling;
    const int k = config.n_sources;
    std::vector<double> deg;
    if (s.mode == DoaSampling::Mode::fixed) {
        deg = s.fixed_deg;
    } else {
        std::mt19937_64 rng(derive_seed(trial_seed, 1));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        auto draw = [&](double lo, double hi) {
            double v = lo + (hi - lo) * unit(rng);
            if (s.symmetric && unit(rng) < 0.5)
                v = -v;
            return v;
        };
        if (s.separation_deg) {
            const double span = (k - 1) * *s.separation_deg;
            const double first = draw(s.lo_deg, s.hi_deg - span);
            for (int i = 0; i < k; ++i)
                deg.push_back(first + i * *s.separation_deg);
        } else {
            for (int attempt = 0; static_cast<int>(deg.size()) < k; ++attempt) {
                if (attempt > 10000)
                    throw ConfigError("could not draw DoAs honouring min_separation_deg");
                const double v = draw(s.lo_deg, s.hi_deg);
                const bool ok = std::all_of(deg.begin(), deg.end(), [&](double d) {
                    return std::abs(d - v) > std::max(s.min_separation_deg, 0.0);
                });
                if (ok)
                    deg.push_back(v);
            }
        }
    }

    std::vector<double> rad(deg.size());
    std::transform(deg.begin(), deg.end(), rad.begin(), deg_to_rad);
    if (s.on_grid) {
        const auto grid = build_grid(config.grid_cells);
        for (auto &r : rad)
            r = grid[grid.nearest_index(r)];
    }
    // Keep angles inside [-pi/2, pi/2) after degree/radian rounding.
    for (auto &r : rad)
        r = std::clamp(r, -kHalfPi, std::nextafter(kHalfPi, 0.0));
    return rad;
}

std::uint64_t simulation_seed(std::uint64_t trial_seed) { return derive_seed(trial_seed, 2); }

Scenario trial_scenario(const ScenarioConfig &config, std::uint64_t trial_seed)
{
    try {
        return Scenario::from_snr(UlaGeometry(config.n_sensors), sample_doas(config, trial_seed),
                                  config.n_snapshots, config.snr_db, config.source_model);
    } catch (const DomainError &e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
}

TrialRecord run_trial(const ScenarioConfig &config, int trial_index)
{
    TrialRecord rec;
    rec.trial_index = trial_index;
    rec.seed = config.seed + static_cast<std::uint64_t>(trial_index);
    rec.method = to_string(config.method());
    rec.snr_db = config.snr_db;

    const auto scenario = trial_scenario(config, rec.seed);
    rec.true_doas_deg = to_degrees(scenario.true_doas);
    const auto batch = simulate_snapshots(scenario, simulation_seed(rec.seed));

    const auto start = std::chrono::steady_clock::now();
    try {
        auto out = run_method(config, config.method(), batch);
        rec.estimates_deg = to_degrees(out.angles);
        rec.flags = std::move(out.flags);
        rec.matched_errors_deg = match_and_score(rec.estimates_deg, rec.true_doas_deg).errors_deg;
    } catch (const std::exception &e) {
        rec.failed = true;
        rec.estimates_deg.clear();
        rec.matched_errors_deg.clear();
        rec.flags.push_back(std::string("error: ") + e.what());
    }
    if (config.record_timing)
        rec.runtime_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

RunReport run_cell(const ScenarioConfig &config, Method method, double snr_db)
{
    ScenarioConfig cell = config;
    cell.methods = {method};
    cell.snr_db = snr_db;
    cell.workers = 1;

    RunReport report;
    report.method = to_string(method);
    report.snr_db = snr_db;
    report.n_snapshots = config.n_snapshots;
    report.n_sources = config.n_sources;
    report.detection_threshold_deg = config.detection_threshold_deg;
    report.records.resize(static_cast<std::size_t>(config.trials));
    parallel_for(report.records.size(), config.workers,
                 [&](std::size_t i) { report.records[i] = run_trial(cell, static_cast<int>(i)); });
    report.aggregates = aggregate(report.records, report.detection_threshold_deg);
    return report;
}

std::vector<RunReport> run_sweep(const ScenarioConfig &config)
{
    config.validate();
    if (config.snr_sweep.empty())
        throw DomainError("run_sweep: snr_sweep must not be empty");
    std::vector<RunReport> reports;
    for (auto method : config.methods)
        for (double snr : config.snr_sweep)
            reports.push_back(run_cell(config, method, snr));
    return reports;
}

ErrorStdTable calibrate_epsilon(const ScenarioConfig &config)
{
    config.validate();
    if (config.snr_sweep.empty())
        throw DomainError("calibrate_epsilon: snr_sweep must not be empty");

    std::vector<ErrorStdEntry> entries;
    for (double snr : config.snr_sweep) {
        ScenarioConfig cell = config;
        cell.snr_db = snr;
        const auto pipeline = pipeline_config(cell, snr, 1);

        std::vector<std::vector<double>> errors(static_cast<std::size_t>(config.trials));
        parallel_for(errors.size(), config.workers, [&](std::size_t i) {
            const auto seed = cell.seed + i;
            const auto scenario = trial_scenario(cell, seed);
            try {
                const auto batch = simulate_snapshots(scenario, simulation_seed(seed));
                const auto coarse = coarse_estimate(batch, cell.n_sources, pipeline);
                errors[i] = match_and_score(coarse.angles, scenario.true_doas).errors_deg; // radians here
            } catch (const NumericalError &) {
                errors[i].clear();
            }
        });

        std::vector<double> all;
        int successful = 0;
        for (const auto &e : errors) {
            if (e.empty())
                continue;
            ++successful;
            all.insert(all.end(), e.begin(), e.end());
        }
        double eps = deg_to_rad(1.0);
        if (!all.empty()) {
            const double n = static_cast<double>(all.size());
            double mean = 0.0;
            for (double e : all)
                mean += e / n;
            double ss = 0.0;
            for (double e : all)
                ss += (e - mean) * (e - mean);
            eps = all.size() > 1 ? std::sqrt(ss / (n - 1.0)) : std::abs(all.front());
        }
        entries.push_back({snr, std::max(eps, 1e-12), successful, successful < 30});
    }
    return ErrorStdTable(std::move(entries), config.error_table.fallback());
}

std::vector<Sigma2Choice> calibrate_sigma2(const ScenarioConfig &config, std::vector<double> candidates)
{
    config.validate();
    if (candidates.empty())
        throw DomainError("calibrate_sigma2: candidate list must not be empty");
    for (double c : candidates)
        if (!(c > 0.0))
            throw DomainError("calibrate_sigma2: candidates must be positive");
    if (config.method() != Method::nuv_doa && config.method() != Method::nuv_ssr_flat)
        throw ConfigError("calibrate_sigma2: method must be nuv_doa or nuv_ssr_flat");
    std::sort(candidates.begin(), candidates.end());

    std::vector<double> snrs = config.snr_sweep;
    if (snrs.empty())
        snrs.push_back(config.snr_db);

    std::vector<Sigma2Choice> choices;
    for (double snr : snrs) {
        Sigma2Choice choice;
        choice.snr_db = snr;
        double best = std::numeric_limits<double>::infinity();
        for (double c : candidates) {
            ScenarioConfig cell = config;
            cell.sigma2_table.reset();
            cell.solver.sigma2 = c;
            const double rmse = run_cell(cell, config.method(), snr).aggregates.rmse_deg;
            const double score = std::isnan(rmse) ? std::numeric_limits<double>::infinity() : rmse;
            choice.candidate_rmse_deg.push_back(rmse);
            // Ascending candidates with a strict comparison keep the smaller sigma2 on ties.
            if (choice.sigma2 == 0.0 || score < best) {
                choice.sigma2 = c;
                best = score;
            }
        }
        choices.push_back(std::move(choice));
    }
    return choices;
}

Sigma2Table to_table(const std::vector<Sigma2Choice> &choices)
{
    std::vector<Sigma2Entry> entries;
    for (const auto &c : choices)
        entries.push_back({c.snr_db, c.sigma2});
    return Sigma2Table(std::move(entries));
}

std::vector<double> default_sigma2_candidates()
{
    return {1e-2, 3e-2, 1e-1, 3e-1, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0, 800.0, 3000.0, 1e4};
}

} // namespace nuvdoa

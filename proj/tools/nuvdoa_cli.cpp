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

#include "nuvdoa/baselines.hpp"
#include "nuvdoa/harness.hpp"
#include "nuvdoa/report_io.hpp"
#include "nuvdoa/superres.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace nuvdoa;

namespace
{

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Common
{
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    bool verbose = false;
};

void add_common(CLI::App *cmd, Common &c)
{
    cmd->add_option("--config", c.config_path, "scenario config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", c.seed, "override the config seed");
    cmd->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber);
    cmd->add_flag("--verbose", c.verbose, "progress on stderr");
}

ScenarioConfig load(const Common &c)
{
    auto config = load_config(c.config_path);
    if (c.seed)
        config.seed = *c.seed;
    if (c.workers)
        config.workers = *c.workers;
    config.validate();
    return config;
}

std::ofstream open_out(const fs::path &path)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw ConfigError("cannot write " + path.string());
    return out;
}

void log(const Common &c, const std::string &msg)
{
    if (c.verbose)
        std::cerr << "nuvdoa: " << msg << '\n';
}

Spectrum compute_spectrum(const ScenarioConfig &config, const std::string &method, const SnapshotBatch &batch,
                          double scan_lo_deg, double scan_hi_deg)
{
    const UlaGeometry geometry(config.n_sensors);
    const auto grid = build_grid(config.grid_cells);
    SolverConfig solver = config.solver;
    solver.sigma2 = resolve_sigma2(config, config.snr_db);
    solver.n_snapshots = batch.n_snapshots();
    if (method == "nuv_ssr_flat")
        return spectrum(solve(build_dictionary(grid, geometry), snapshot_mean(batch), solver).moments, grid);
    if (method == "superres") {
        const auto plan = plan_subbands(deg_to_rad(scan_lo_deg), deg_to_rad(scan_hi_deg),
                                        deg_to_rad(config.fine_step_deg), deg_to_rad(config.alpha_deg), geometry);
        return superres_scan(plan, snapshot_mean(batch), solver, geometry, config.workers);
    }
    const auto cov = sample_covariance(batch);
    if (method == "bartlett")
        return bartlett_spectrum(cov, grid);
    if (method == "mvdr")
        return mvdr_spectrum(cov, grid, config.mvdr_load);
    if (method == "music")
        return music_spectrum(cov, grid, config.n_sources);
    throw ConfigError("spectrum: unsupported method '" + method + "'");
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"nuvdoa: sparse Bayesian direction-of-arrival estimation"};
    app.require_subcommand(1);

    Common common;
    int trial = 0;
    std::string out_path;
    std::string method;
    std::string mode;
    double scan_lo = -90.0;
    double scan_hi = 89.99;

    auto *simulate = app.add_subcommand("simulate", "write the snapshots of one trial");
    add_common(simulate, common);
    simulate->add_option("--out", out_path, "output directory")->required();
    simulate->add_option("--trial", trial, "trial index");

    auto *spec = app.add_subcommand("spectrum", "write the spatial spectrum of one trial as CSV");
    add_common(spec, common);
    spec->add_option("--method", method, "nuv_ssr_flat, superres, bartlett, mvdr or music")->required();
    spec->add_option("--out", out_path, "output CSV")->required();
    spec->add_option("--trial", trial, "trial index");
    spec->add_option("--scan-lo-deg", scan_lo, "superres scan start");
    spec->add_option("--scan-hi-deg", scan_hi, "superres scan end");

    auto *estimate = app.add_subcommand("estimate", "run one trial and print its record as JSON");
    add_common(estimate, common);
    estimate->add_option("--trial", trial, "trial index");

    auto *sweep = app.add_subcommand("sweep", "Monte-Carlo sweep over methods and SNRs");
    add_common(sweep, common);
    sweep->add_option("--out", out_path, "output directory")->required();

    auto *calibrate = app.add_subcommand("calibrate", "calibrate the epsilon or sigma2 table");
    add_common(calibrate, common);
    calibrate->add_option("--mode", mode, "epsilon or sigma2")
        ->required()
        ->check(CLI::IsMember({"epsilon", "sigma2"}));
    calibrate->add_option("--out", out_path, "output JSON")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        const auto config = load(common);
        if (simulate->parsed()) {
            const auto seed = config.seed + static_cast<std::uint64_t>(trial);
            const auto scenario = trial_scenario(config, seed);
            const auto batch = simulate_snapshots(scenario, simulation_seed(seed));
            fs::create_directories(out_path);
            auto out = open_out(fs::path(out_path) / "snapshots.jsonl");
            write_snapshots_jsonl(out, scenario, seed, batch);
        } else if (spec->parsed()) {
            const auto seed = config.seed + static_cast<std::uint64_t>(trial);
            const auto batch = simulate_snapshots(trial_scenario(config, seed), simulation_seed(seed));
            auto out = open_out(out_path);
            write_spectrum_csv(out, compute_spectrum(config, method, batch, scan_lo, scan_hi));
        } else if (estimate->parsed()) {
            const auto record = run_trial(config, trial);
            std::cout << record_to_json(record).dump() << '\n';
            if (record.failed)
                return kExitNumerical;
        } else if (sweep->parsed()) {
            auto cfg = config;
            if (cfg.snr_sweep.empty())
                cfg.snr_sweep = {cfg.snr_db};
            std::vector<RunReport> reports;
            for (auto m : cfg.methods)
                for (double snr : cfg.snr_sweep) {
                    log(common, std::string("running ") + to_string(m) + " at " + std::to_string(snr) + " dB");
                    reports.push_back(run_cell(cfg, m, snr));
                }
            fs::create_directories(out_path);
            auto jsonl = open_out(fs::path(out_path) / "reports.jsonl");
            write_reports_jsonl(jsonl, reports);
            auto csv = open_out(fs::path(out_path) / "aggregate.csv");
            write_aggregate_csv(csv, reports);
            write_json_file(fs::path(out_path) / "config.json", config_to_json(cfg));
        } else if (calibrate->parsed()) {
            if (fs::path(out_path).has_parent_path())
                fs::create_directories(fs::path(out_path).parent_path());
            if (mode == "epsilon") {
                write_json_file(out_path, error_table_to_json(calibrate_epsilon(config)));
            } else {
                auto candidates =
                    config.sigma2_candidates.empty() ? default_sigma2_candidates() : config.sigma2_candidates;
                std::sort(candidates.begin(), candidates.end());
                write_json_file(out_path, sigma2_choices_to_json(calibrate_sigma2(config, candidates), candidates));
            }
        }
    } catch (const ConfigError &e) {
        std::cerr << "nuvdoa: configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const DomainError &e) {
        std::cerr << "nuvdoa: invalid input: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalError &e) {
        std::cerr << "nuvdoa: numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::filesystem::filesystem_error &e) {
        std::cerr << "nuvdoa: " << e.what() << '\n';
        return kExitConfig;
    }
    return 0;
}

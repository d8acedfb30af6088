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

#include "nuvdoa/hierarchical.hpp"
#include "nuvdoa/baselines.hpp"
#include "nuvdoa/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>

namespace nuvdoa
{

namespace
{

constexpr double kLatticeSlack = 1e-9;
// Two coarse angles whose sines differ by less than this have numerically
// identical steering vectors.
constexpr double kDuplicateSine = 1e-9;

void check_source_count(int k, int n_sensors)
{
    if (k < 1 || k >= n_sensors)
        throw DomainError("hierarchical: K must satisfy 1 <= K < N");
}

SolverConfig solver_for(const PipelineConfig &config, int n_snapshots)
{
    SolverConfig s = config.solver;
    s.n_snapshots = n_snapshots;
    return s;
}

Spectrum coarse_nuv_spectrum(const SnapshotBatch &batch, const PipelineConfig &config)
{
    const UlaGeometry geometry(batch.n_sensors());
    const auto grid = build_grid(config.coarse_grid_cells);
    const auto dict = build_dictionary(grid, geometry);
    const auto result = solve(dict, snapshot_mean(batch), solver_for(config, batch.n_snapshots()));
    return spectrum(result.moments, grid);
}

CoarseResult coarse_nuv(const SnapshotBatch &batch, const PeakRule &rule, const PipelineConfig &config)
{
    CoarseResult out;
    out.method = CoarseMethod::nuv;
    const auto peaks = select_peaks(coarse_nuv_spectrum(batch, config), rule);
    out.angles = peaks.angles;
    if (peaks.filled_by_magnitude > 0)
        out.flags.push_back("coarse_peaks_filled_by_magnitude");
    std::sort(out.angles.begin(), out.angles.end());
    return out;
}

} // namespace

ErrorStdTable::ErrorStdTable(std::vector<ErrorStdEntry> entries, double fallback)
    : entries_(std::move(entries)), fallback_(fallback)
{
    if (!(fallback_ > 0.0))
        throw DomainError("ErrorStdTable: fallback epsilon must be positive");
    for (const auto &e : entries_)
        if (!(e.epsilon > 0.0) || !std::isfinite(e.epsilon) || !std::isfinite(e.snr_db))
            throw DomainError("ErrorStdTable: every epsilon must be positive and finite");
    std::sort(entries_.begin(), entries_.end(),
              [](const ErrorStdEntry &a, const ErrorStdEntry &b) { return a.snr_db < b.snr_db; });
    for (std::size_t i = 1; i < entries_.size(); ++i)
        if (entries_[i].snr_db == entries_[i - 1].snr_db)
            throw DomainError("ErrorStdTable: duplicate SNR entry");
}

double ErrorStdTable::lookup(double snr_db) const
{
    if (entries_.empty() || snr_db < entries_.front().snr_db || snr_db > entries_.back().snr_db)
        return fallback_;
    auto upper = std::lower_bound(entries_.begin(), entries_.end(), snr_db,
                                  [](const ErrorStdEntry &e, double s) { return e.snr_db < s; });
    if (upper->snr_db == snr_db)
        return upper->epsilon;
    const auto lower = std::prev(upper);
    const double t = (snr_db - lower->snr_db) / (upper->snr_db - lower->snr_db);
    return lower->epsilon + t * (upper->epsilon - lower->epsilon);
}

void PipelineConfig::validate() const
{
    if (coarse_grid_cells < 2)
        throw DomainError("PipelineConfig: coarse_grid_cells must be >= 2");
    if (!(fine_step > 0.0))
        throw DomainError("PipelineConfig: fine_step must be positive");
    if (!(kPi / coarse_grid_cells > fine_step))
        throw DomainError("PipelineConfig: coarse grid step must exceed fine_step");
    if (alpha < fine_step)
        throw DomainError("PipelineConfig: alpha must be >= fine_step");
    solver.validate();
}

const char *to_string(CoarseMethod method)
{
    return method == CoarseMethod::nuv ? "nuv" : "root_music";
}

double estimate_snr_db(const CMatrix &cov)
{
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(cov, Eigen::EigenvaluesOnly);
    const double n = static_cast<double>(cov.rows());
    const double lambda_min = eig.eigenvalues()[0];
    const double signal = cov.trace().real() - n * lambda_min;
    if (!(lambda_min > 0.0))
        return 300.0;
    if (!(signal > 0.0))
        return -300.0;
    return std::clamp(10.0 * std::log10(signal / (n * lambda_min)), -300.0, 300.0);
}

double effective_snr_db(const SnapshotBatch &batch, const PipelineConfig &config)
{
    if (config.known_snr_db)
        return *config.known_snr_db;
    return estimate_snr_db(sample_covariance(batch));
}

CoarseResult coarse_estimate(const SnapshotBatch &batch, int k, const PipelineConfig &config)
{
    config.validate();
    check_source_count(k, batch.n_sensors());
    const double snr = effective_snr_db(batch, config);

    CoarseResult out;
    if (snr < config.snr_gate_db) {
        out = coarse_nuv(batch, PeakRule::fixed_k(k), config);
    } else {
        try {
            out.angles = root_music(sample_covariance(batch), k, UlaGeometry(batch.n_sensors()));
            out.method = CoarseMethod::root_music;
        } catch (const RootDeficit &) {
            out = coarse_nuv(batch, PeakRule::fixed_k(k), config);
            out.flags.insert(out.flags.begin(), "root_music_fallback");
        }
    }
    out.effective_snr_db = snr;
    return out;
}

CoarseResult coarse_estimate_threshold(const SnapshotBatch &batch, double eta, const PipelineConfig &config)
{
    config.validate();
    auto out = coarse_nuv(batch, PeakRule::threshold(eta), config);
    out.effective_snr_db = effective_snr_db(batch, config);
    out.flags.push_back("experimental_unknown_k");
    return out;
}

CancellationResult cancel_interference(const SufficientStatistic &stat,
                                       const std::vector<double> &coarse_angles, std::size_t target,
                                       const UlaGeometry &geometry)
{
    if (coarse_angles.empty() || target >= coarse_angles.size())
        throw DomainError("cancel_interference: target index out of range");
    if (stat.mean.size() != geometry.n_sensors())
        throw DomainError("cancel_interference: snapshot mean length does not match the array");

    CancellationResult out{stat, 0};
    std::vector<double> kept;
    const double target_sine = std::sin(coarse_angles[target]);
    for (std::size_t i = 0; i < coarse_angles.size(); ++i) {
        if (i == target)
            continue;
        const double s = std::sin(coarse_angles[i]);
        const bool duplicate =
            std::abs(s - target_sine) < kDuplicateSine ||
            std::any_of(kept.begin(), kept.end(),
                        [&](double a) { return std::abs(std::sin(a) - s) < kDuplicateSine; });
        if (duplicate)
            ++out.dropped;
        else
            kept.push_back(coarse_angles[i]);
    }
    if (kept.empty())
        return out;

    const CMatrix b = steering_matrix(kept, geometry);
    Eigen::ColPivHouseholderQR<CMatrix> qr(b);
    const auto rank = qr.rank();
    out.dropped += static_cast<int>(b.cols() - rank);
    if (rank == 0)
        return out;

    const CMatrix q = CMatrix(qr.householderQ()).leftCols(rank);
    CVector residual = stat.mean - q * (q.adjoint() * stat.mean);
    // One re-orthogonalization pass keeps B^H r at rounding level.
    residual -= q * (q.adjoint() * residual);
    out.residual.mean = std::move(residual);
    return out;
}

RefineResult refine_source(const SufficientStatistic &stat, double coarse_angle, double epsilon,
                           const PipelineConfig &config, const UlaGeometry &geometry)
{
    if (!(epsilon > 0.0))
        throw DomainError("refine_source: epsilon must be positive");
    config.validate();

    RefineResult out;
    out.angle = coarse_angle;
    out.window_lo = coarse_angle - 3.0 * epsilon;
    out.window_hi = coarse_angle + 3.0 * epsilon;

    const double step = config.fine_step;
    const double lo = std::max(out.window_lo, -kHalfPi);
    const double hi = std::min(out.window_hi, kHalfPi);
    long first = static_cast<long>(std::ceil((lo + kHalfPi) / step - kLatticeSlack));
    long last = static_cast<long>(std::floor((hi + kHalfPi) / step + kLatticeSlack));
    while (first <= last && -kHalfPi + static_cast<double>(first) * step < out.window_lo - kLatticeSlack)
        ++first;
    while (last >= first && -kHalfPi + static_cast<double>(last) * step >= kHalfPi)
        --last;
    if (last < first) {
        out.empty_window = true;
        return out;
    }

    const double scan_lo = -kHalfPi + static_cast<double>(first) * step;
    const double scan_hi = -kHalfPi + static_cast<double>(last) * step;
    const auto plan = plan_subbands(scan_lo, scan_hi, step, config.alpha, geometry);
    const auto spec = superres_scan(plan, stat, solver_for(config, stat.n_snapshots), geometry,
                                    config.workers);

    const auto best = std::max_element(spec.values.begin(), spec.values.end());
    out.angle = spec.grid[static_cast<std::size_t>(best - spec.values.begin())];
    out.no_detection = !(*best > 0.0);
    return out;
}

std::vector<std::string> PipelineTrace::all_flags() const
{
    std::vector<std::string> out = flags;
    for (std::size_t i = 0; i < sources.size(); ++i)
        for (const auto &f : sources[i].flags)
            out.push_back("source" + std::to_string(i) + ":" + f);
    return out;
}

namespace
{

MultiSourceResult refine_all(const SnapshotBatch &batch, CoarseResult coarse, const PipelineConfig &config)
{
    const UlaGeometry geometry(batch.n_sensors());
    const auto stat = snapshot_mean(batch);

    MultiSourceResult result;
    auto &trace = result.trace;
    trace.coarse_method = coarse.method;
    trace.effective_snr_db = coarse.effective_snr_db;
    trace.epsilon = config.error_table.lookup(coarse.effective_snr_db);
    trace.flags = coarse.flags;
    trace.sources.resize(coarse.angles.size());

    // Parallelize across sources when there are several, otherwise inside the scan.
    const bool outer = coarse.angles.size() > 1 && config.workers > 1;
    PipelineConfig inner = config;
    if (outer)
        inner.workers = 1;

    parallel_for(coarse.angles.size(), outer ? config.workers : 1, [&](std::size_t i) {
        auto &src = trace.sources[i];
        src.coarse = coarse.angles[i];
        src.fine = src.coarse;
        src.window_lo = src.coarse - 3.0 * trace.epsilon;
        src.window_hi = src.coarse + 3.0 * trace.epsilon;
        try {
            const auto cancelled = cancel_interference(stat, coarse.angles, i, geometry);
            src.dropped_neighbours = cancelled.dropped;
            if (cancelled.dropped > 0)
                src.flags.push_back("duplicate_neighbours_dropped");
            const auto refined = refine_source(cancelled.residual, src.coarse, trace.epsilon, inner, geometry);
            src.fine = refined.angle;
            if (refined.empty_window)
                src.flags.push_back("empty_window");
            if (refined.no_detection)
                src.flags.push_back("no_detection");
        } catch (const NumericalError &e) {
            src.flags.push_back(std::string("refine_failed: ") + e.what());
        }
    });

    for (const auto &src : trace.sources)
        result.angles.push_back(src.fine);
    std::sort(result.angles.begin(), result.angles.end());
    return result;
}

} // namespace

MultiSourceResult estimate_multisource(const SnapshotBatch &batch, int k, const PipelineConfig &config)
{
    return refine_all(batch, coarse_estimate(batch, k, config), config);
}

MultiSourceResult estimate_multisource_unknown_k(const SnapshotBatch &batch, double eta,
                                                 const PipelineConfig &config)
{
    return refine_all(batch, coarse_estimate_threshold(batch, eta, config), config);
}

} // namespace nuvdoa

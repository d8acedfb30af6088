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

// Multi-source pipeline:
//
//   1. coarse estimate of all K directions (sparse recovery on a coarse grid
//      below the SNR gate, Root-MUSIC above it);
//   2. per source, least-squares removal of the other K-1 steering vectors
//      from the snapshot mean;
//   3. super-resolution scan of a 6*epsilon window around the coarse angle,
//      epsilon being the coarse estimator's empirical error spread at the
//      working SNR.

#ifndef NUVDOA_HIERARCHICAL_HPP
#define NUVDOA_HIERARCHICAL_HPP

#include "nuvdoa/superres.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nuvdoa
{

struct ErrorStdEntry
{
    double snr_db = 0.0;
    double epsilon = 0.0; // radians
    int trials = 0;
    bool low_confidence = false;

    bool operator==(const ErrorStdEntry &) const = default;
};

/// Coarse-estimator error spread as a function of SNR. Lookups inside the
/// table interpolate linearly between neighbouring entries; lookups outside
/// it return the fallback.
class ErrorStdTable
{
public:
    ErrorStdTable() = default;
    explicit ErrorStdTable(std::vector<ErrorStdEntry> entries, double fallback = deg_to_rad(1.0));

    double lookup(double snr_db) const;

    const std::vector<ErrorStdEntry> &entries() const { return entries_; }
    double fallback() const { return fallback_; }

    bool operator==(const ErrorStdTable &) const = default;

private:
    std::vector<ErrorStdEntry> entries_;
    double fallback_ = deg_to_rad(1.0);
};

struct PipelineConfig
{
    double snr_gate_db = 7.0;
    int coarse_grid_cells = 1800;
    double fine_step = deg_to_rad(0.01);
    double alpha = deg_to_rad(0.5);
    SolverConfig solver;
    ErrorStdTable error_table;
    std::optional<double> known_snr_db;
    int workers = 1;

    /// Throws DomainError unless the coarse step exceeds fine_step and alpha >= fine_step.
    void validate() const;
};

enum class CoarseMethod
{
    nuv,
    root_music,
};

const char *to_string(CoarseMethod method);

struct CoarseResult
{
    std::vector<double> angles; // ascending
    CoarseMethod method = CoarseMethod::nuv;
    double effective_snr_db = 0.0;
    std::vector<std::string> flags;
};

/// 10 log10((tr R - N lambda_min) / (N lambda_min)), clamped to [-300, 300] dB.
double estimate_snr_db(const CMatrix &cov);

double effective_snr_db(const SnapshotBatch &batch, const PipelineConfig &config);

CoarseResult coarse_estimate(const SnapshotBatch &batch, int k, const PipelineConfig &config);

/// Experimental: coarse sparse recovery keeping every peak above eta, for
/// when K is not known.
CoarseResult coarse_estimate_threshold(const SnapshotBatch &batch, double eta,
                                       const PipelineConfig &config);

struct CancellationResult
{
    SufficientStatistic residual;
    /// Neighbour angles that were dropped as duplicates or for rank deficiency.
    int dropped = 0;
};

/// ybar minus its least-squares fit on the steering vectors of every coarse
/// angle except the target. The residual is orthogonal to those vectors.
CancellationResult cancel_interference(const SufficientStatistic &stat,
                                       const std::vector<double> &coarse_angles, std::size_t target,
                                       const UlaGeometry &geometry);

struct RefineResult
{
    double angle = 0.0;
    double window_lo = 0.0; // unclipped coarse - 3 epsilon
    double window_hi = 0.0; // unclipped coarse + 3 epsilon
    bool empty_window = false;
    bool no_detection = false;
};

/// Super-resolution scan over [coarse - 3 eps, coarse + 3 eps] on the global
/// fine lattice (-pi/2 + j * fine_step), clipped to the azimuth; returns the
/// argmax (ties: lowest angle).
RefineResult refine_source(const SufficientStatistic &stat, double coarse_angle, double epsilon,
                           const PipelineConfig &config, const UlaGeometry &geometry);

struct SourceTrace
{
    double coarse = 0.0;
    double window_lo = 0.0;
    double window_hi = 0.0;
    double fine = 0.0;
    int dropped_neighbours = 0;
    std::vector<std::string> flags;
};

struct PipelineTrace
{
    CoarseMethod coarse_method = CoarseMethod::nuv;
    double effective_snr_db = 0.0;
    double epsilon = 0.0;
    std::vector<SourceTrace> sources;
    std::vector<std::string> flags;

    /// Pipeline-level flags followed by "source<i>:<flag>" for every source flag.
    std::vector<std::string> all_flags() const;
};

struct MultiSourceResult
{
    std::vector<double> angles; // ascending
    PipelineTrace trace;
};

/// Failures while refining one source are flagged and that source falls back
/// to its coarse angle; the call itself only throws on invalid input.
MultiSourceResult estimate_multisource(const SnapshotBatch &batch, int k, const PipelineConfig &config);

/// Experimental unknown-K variant: the source count comes from
/// coarse_estimate_threshold.
MultiSourceResult estimate_multisource_unknown_k(const SnapshotBatch &batch, double eta,
                                                 const PipelineConfig &config);

} // namespace nuvdoa

#endif

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

// Sparse recovery with normal-with-unknown-variance (NUV) priors.
//
// Every atom x_m of the dictionary gets a zero-mean complex Gaussian prior
// with its own variance q2[m]. The variances are estimated by EM from the
// snapshot mean; each step is a Gaussian least-squares problem whose only
// matrix inverse is the N x N precision matrix
//
//     W = (A diag(q2) A^H + (sigma2 / L) I)^-1.
//
// An atom whose variance collapses to zero drops out of the support, which is
// what makes the recovered spectrum sparse. The dictionary is any complex
// N x M matrix; steering dictionaries are the intended use.

#ifndef NUVDOA_NUV_SSR_HPP
#define NUVDOA_NUV_SSR_HPP

#include "nuvdoa/array_model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <variant>
#include <vector>

namespace nuvdoa
{

struct RandomUniformInit
{
    std::uint64_t seed = 0;
};

struct ConstantInit
{
    double value = 1.0;
};

using SolverInit = std::variant<RandomUniformInit, ConstantInit>;

struct SolverConfig
{
    double sigma2 = 1.0;
    int n_snapshots = 1;
    int max_iterations = 500;
    double tolerance = 1e-6;
    SolverInit init = RandomUniformInit{};

    /// sigma2 / L, the only way sigma2 and L enter the solver.
    double noise_scale() const { return sigma2 / static_cast<double>(n_snapshots); }

    void validate() const;
};

struct NuvState
{
    RVector q2;
    int iteration = 0;
};

struct PosteriorMoments
{
    CVector mean;
    RVector variance;
    /// Most negative raw variance seen before clamping to zero (0 if none).
    double worst_clamp = 0.0;
};

struct Spectrum
{
    std::vector<double> values;
    AngleGrid grid;
};

struct SolveTrace
{
    int iterations = 0;
    double final_change = 0.0;
    bool converged = false;
    double worst_clamp = 0.0;
};

struct SolveResult
{
    NuvState state;
    PosteriorMoments moments;
    SolveTrace trace;
};

/// Called with every iterate, starting with the initial state.
using IterationObserver = std::function<void(const NuvState &)>;

NuvState initial_state(Eigen::Index n_atoms, const SolverConfig &config);

/// (A diag(q2) A^H + (sigma2/L) I)^-1 through a Cholesky factorization.
CMatrix precision_matrix(const CMatrix &dictionary, const NuvState &state,
                         const SolverConfig &config);

/// mean = diag(q2) A^H W ybar; variance = q2 - q2^2 .* diag(A^H W A), clamped at 0.
PosteriorMoments posterior_moments(const CMatrix &dictionary, const NuvState &state,
                                   const CMatrix &precision, const SufficientStatistic &stat);

/// One EM update q2[m] <- |E x_m|^2 + Var x_m.
NuvState em_step(const CMatrix &dictionary, const NuvState &state,
                 const SufficientStatistic &stat, const SolverConfig &config);

/// EM from the configured initialization until the relative l-inf change of
/// q2 drops below tolerance or max_iterations is reached. Throws
/// NumericalError naming the iteration if an iterate becomes non-finite.
SolveResult solve(const CMatrix &dictionary, const SufficientStatistic &stat,
                  const SolverConfig &config, const IterationObserver &observer = {});

inline SolveResult solve(const SteeringDictionary &dictionary, const SufficientStatistic &stat,
                         const SolverConfig &config, const IterationObserver &observer = {})
{
    return solve(dictionary.matrix(), stat, config, observer);
}

/// values[m] = |mean[m]|.
Spectrum spectrum(const PosteriorMoments &moments, const AngleGrid &grid);

class PeakRule
{
public:
    enum class Kind
    {
        fixed_k,
        threshold,
    };

    static PeakRule fixed_k(int k) { return PeakRule(Kind::fixed_k, k, 0.0); }
    static PeakRule threshold(double eta) { return PeakRule(Kind::threshold, 0, eta); }

    Kind kind() const { return kind_; }
    int k() const { return k_; }
    double eta() const { return eta_; }

private:
    PeakRule(Kind kind, int k, double eta) : kind_(kind), k_(k), eta_(eta) {}

    Kind kind_;
    int k_;
    double eta_;
};

struct PeakSelection
{
    PeakRule rule = PeakRule::fixed_k(1);
    std::vector<std::size_t> indices;
    std::vector<double> angles;
    /// Number of trailing entries that are not strict local maxima but were
    /// taken by magnitude because the spectrum had fewer than K peaks.
    int filled_by_magnitude = 0;
};

/// Strict local maxima sorted by descending value (ties: lower index first).
/// The ends of the grid are compared against their single neighbour, so a
/// plateau is never a peak. fixed_k tops up with the largest remaining values
/// when there are fewer than K peaks; threshold keeps peaks above eta.
/// Throws DomainError for K < 1 or K > M.
PeakSelection select_peaks(const Spectrum &spec, const PeakRule &rule);

} // namespace nuvdoa

#endif

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

#include "nuvdoa/nuv_ssr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace nuvdoa
{

namespace
{

void check_shapes(const CMatrix &dictionary, const NuvState &state, const SufficientStatistic &stat)
{
    if (state.q2.size() != dictionary.cols())
        throw DomainError("nuv-ssr: q2 length does not match the number of atoms");
    if (stat.mean.size() != dictionary.rows())
        throw DomainError("nuv-ssr: snapshot mean length does not match the number of sensors");
}

Eigen::LLT<CMatrix> factor_covariance(const CMatrix &a, const RVector &q2, double noise_scale)
{
    const CMatrix scaled = a * q2.cwiseSqrt().asDiagonal();
    CMatrix s = CMatrix::Zero(a.rows(), a.rows());
    s.selfadjointView<Eigen::Lower>().rankUpdate(scaled);
    s.diagonal().array() += noise_scale;
    // LLT only reads the lower triangle.
    Eigen::LLT<CMatrix> llt(s);
    if (llt.info() != Eigen::Success)
        throw NumericalError("nuv-ssr: Cholesky factorization of the marginal covariance failed");
    return llt;
}

// Moments straight from the Cholesky factor S = G G^H: with X = G^-1 A and
// u = G^-1 ybar, A^H W ybar = X^H u and diag(A^H W A) = column norms of X.
PosteriorMoments moments_from_factor(const CMatrix &a, const RVector &q2,
                                     const Eigen::LLT<CMatrix> &llt, const CVector &ybar)
{
    const CMatrix x = llt.matrixL().solve(a);
    const CVector u = llt.matrixL().solve(ybar);
    const CVector projected = x.adjoint() * u;
    const RVector gain = x.colwise().squaredNorm().transpose();

    PosteriorMoments m;
    m.mean = q2.cwiseProduct(projected);
    m.variance = q2 - q2.cwiseProduct(q2).cwiseProduct(gain);
    for (Eigen::Index i = 0; i < m.variance.size(); ++i) {
        if (m.variance[i] < 0.0) {
            m.worst_clamp = std::min(m.worst_clamp, m.variance[i]);
            m.variance[i] = 0.0;
        }
    }
    return m;
}

RVector second_moment(const PosteriorMoments &m)
{
    return m.mean.cwiseAbs2() + m.variance;
}

} // namespace

void SolverConfig::validate() const
{
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
        throw DomainError("SolverConfig: sigma2 must be positive");
    if (n_snapshots < 1)
        throw DomainError("SolverConfig: n_snapshots must be >= 1");
    if (max_iterations < 1)
        throw DomainError("SolverConfig: max_iterations must be >= 1");
    if (!(tolerance > 0.0))
        throw DomainError("SolverConfig: tolerance must be positive");
    if (const auto *c = std::get_if<ConstantInit>(&init); c && !(c->value > 0.0))
        throw DomainError("SolverConfig: constant initialization must be positive");
}

NuvState initial_state(Eigen::Index n_atoms, const SolverConfig &config)
{
    NuvState state;
    state.q2.resize(n_atoms);
    if (const auto *c = std::get_if<ConstantInit>(&config.init)) {
        state.q2.setConstant(c->value);
    } else {
        std::mt19937_64 rng(std::get<RandomUniformInit>(config.init).seed);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        // (0.5, 1.5]: bounded away from the absorbing zero state.
        for (Eigen::Index m = 0; m < n_atoms; ++m)
            state.q2[m] = 1.5 - unit(rng);
    }
    return state;
}

CMatrix precision_matrix(const CMatrix &dictionary, const NuvState &state, const SolverConfig &config)
{
    config.validate();
    if (state.q2.size() != dictionary.cols())
        throw DomainError("precision_matrix: q2 length does not match the number of atoms");
    if ((state.q2.array() < 0.0).any())
        throw DomainError("precision_matrix: q2 must be nonnegative");
    const auto llt = factor_covariance(dictionary, state.q2, config.noise_scale());
    const auto n = dictionary.rows();
    CMatrix w = llt.solve(CMatrix::Identity(n, n));
    return (0.5 * (w + w.adjoint())).eval();
}

PosteriorMoments posterior_moments(const CMatrix &dictionary, const NuvState &state,
                                   const CMatrix &precision, const SufficientStatistic &stat)
{
    check_shapes(dictionary, state, stat);
    if (precision.rows() != dictionary.rows() || precision.cols() != dictionary.rows())
        throw DomainError("posterior_moments: precision matrix must be N x N");

    const CMatrix wa = precision * dictionary;
    const RVector gain = (dictionary.conjugate().cwiseProduct(wa)).colwise().sum().real().transpose();

    PosteriorMoments m;
    m.mean = state.q2.cwiseProduct(dictionary.adjoint() * (precision * stat.mean));
    m.variance = state.q2 - state.q2.cwiseProduct(state.q2).cwiseProduct(gain);
    for (Eigen::Index i = 0; i < m.variance.size(); ++i) {
        if (m.variance[i] < 0.0) {
            m.worst_clamp = std::min(m.worst_clamp, m.variance[i]);
            m.variance[i] = 0.0;
        }
    }
    return m;
}

NuvState em_step(const CMatrix &dictionary, const NuvState &state, const SufficientStatistic &stat,
                 const SolverConfig &config)
{
    config.validate();
    check_shapes(dictionary, state, stat);
    const auto llt = factor_covariance(dictionary, state.q2, config.noise_scale());
    const auto moments = moments_from_factor(dictionary, state.q2, llt, stat.mean);
    return {second_moment(moments), state.iteration + 1};
}

SolveResult solve(const CMatrix &dictionary, const SufficientStatistic &stat,
                  const SolverConfig &config, const IterationObserver &observer)
{
    config.validate();
    SolveResult result;
    result.state = initial_state(dictionary.cols(), config);
    check_shapes(dictionary, result.state, stat);
    if (observer)
        observer(result.state);

    const double noise_scale = config.noise_scale();
    auto &trace = result.trace;
    for (int it = 0; it < config.max_iterations; ++it) {
        const auto llt = factor_covariance(dictionary, result.state.q2, noise_scale);
        const auto moments = moments_from_factor(dictionary, result.state.q2, llt, stat.mean);
        trace.worst_clamp = std::min(trace.worst_clamp, moments.worst_clamp);

        RVector next = second_moment(moments);
        if (!next.allFinite())
            throw NumericalError("nuv-ssr: non-finite variance estimate at iteration " +
                                 std::to_string(it + 1));
        const double change = (next - result.state.q2).cwiseAbs().maxCoeff();
        const double scale = std::max(1.0, next.maxCoeff());
        result.state.q2 = std::move(next);
        result.state.iteration = it + 1;
        trace.iterations = it + 1;
        trace.final_change = change;
        if (observer)
            observer(result.state);
        if (change < config.tolerance * scale) {
            trace.converged = true;
            break;
        }
    }

    const auto llt = factor_covariance(dictionary, result.state.q2, noise_scale);
    result.moments = moments_from_factor(dictionary, result.state.q2, llt, stat.mean);
    trace.worst_clamp = std::min(trace.worst_clamp, result.moments.worst_clamp);
    return result;
}

Spectrum spectrum(const PosteriorMoments &moments, const AngleGrid &grid)
{
    if (static_cast<std::size_t>(moments.mean.size()) != grid.size())
        throw DomainError("spectrum: moments and grid lengths differ");
    Spectrum s{std::vector<double>(grid.size()), grid};
    for (std::size_t m = 0; m < grid.size(); ++m)
        s.values[m] = std::abs(moments.mean[static_cast<Eigen::Index>(m)]);
    return s;
}

PeakSelection select_peaks(const Spectrum &spec, const PeakRule &rule)
{
    const auto &v = spec.values;
    const std::size_t m = v.size();
    if (m == 0)
        throw DomainError("select_peaks: empty spectrum");
    if (spec.grid.size() != m)
        throw DomainError("select_peaks: spectrum and grid lengths differ");
    if (rule.kind() == PeakRule::Kind::fixed_k && (rule.k() < 1 || static_cast<std::size_t>(rule.k()) > m))
        throw DomainError("select_peaks: K must satisfy 1 <= K <= M");

    auto by_value = [&v](std::size_t a, std::size_t b) {
        return v[a] > v[b] || (v[a] == v[b] && a < b);
    };

    std::vector<std::size_t> peaks;
    for (std::size_t i = 0; i < m; ++i) {
        const bool above_left = i == 0 || v[i] > v[i - 1];
        const bool above_right = i + 1 == m || v[i] > v[i + 1];
        if (above_left && above_right)
            peaks.push_back(i);
    }
    std::sort(peaks.begin(), peaks.end(), by_value);

    PeakSelection sel;
    sel.rule = rule;
    if (rule.kind() == PeakRule::Kind::threshold) {
        for (auto i : peaks)
            if (v[i] > rule.eta())
                sel.indices.push_back(i);
    } else {
        const auto k = static_cast<std::size_t>(rule.k());
        sel.indices.assign(peaks.begin(), peaks.begin() + static_cast<long>(std::min(k, peaks.size())));
        if (sel.indices.size() < k) {
            std::vector<std::size_t> rest;
            for (std::size_t i = 0; i < m; ++i)
                if (std::find(sel.indices.begin(), sel.indices.end(), i) == sel.indices.end())
                    rest.push_back(i);
            std::sort(rest.begin(), rest.end(), by_value);
            const auto missing = k - sel.indices.size();
            sel.indices.insert(sel.indices.end(), rest.begin(), rest.begin() + static_cast<long>(missing));
            sel.filled_by_magnitude = static_cast<int>(missing);
        }
    }
    sel.angles.reserve(sel.indices.size());
    for (auto i : sel.indices)
        sel.angles.push_back(spec.grid[i]);
    return sel;
}

} // namespace nuvdoa

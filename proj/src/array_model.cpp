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

#include "nuvdoa/array_model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace nuvdoa
{

namespace
{

// Slack for lattice arithmetic: a point computed as lo + k*step that should
// land on a boundary may miss it by a few ulps.
constexpr double kLatticeSlack = 1e-9;

bool in_azimuth(double theta) { return theta >= -kHalfPi && theta < kHalfPi; }

} // namespace

UlaGeometry::UlaGeometry(int n_sensors) : n_sensors_(n_sensors)
{
    if (n_sensors < 2)
        throw DomainError("UlaGeometry: n_sensors must be >= 2");
}

AngleGrid::AngleGrid(double origin, double step, std::size_t count) : step_(step), origin_(origin)
{
    if (count < 1)
        throw DomainError("AngleGrid: empty grid");
    if (!(step > 0.0) || !std::isfinite(step))
        throw DomainError("AngleGrid: step must be positive");
    values_.resize(count);
    for (std::size_t k = 0; k < count; ++k) {
        values_[k] = origin + static_cast<double>(k) * step;
        if (!in_azimuth(values_[k]))
            throw DomainError("AngleGrid: value outside [-pi/2, pi/2)");
    }
}

std::size_t AngleGrid::nearest_index(double theta) const
{
    if (values_.empty())
        throw DomainError("AngleGrid::nearest_index on empty grid");
    const double pos = std::round((theta - origin_) / step_);
    const double clamped = std::clamp(pos, 0.0, static_cast<double>(values_.size() - 1));
    return static_cast<std::size_t>(clamped);
}

AngleGrid build_grid(int m_cells)
{
    if (m_cells < 2)
        throw DomainError("build_grid: m_cells must be >= 2");
    return AngleGrid(-kHalfPi, kPi / m_cells, static_cast<std::size_t>(m_cells));
}

AngleGrid build_band_grid(double lo, double hi, double step)
{
    if (!(step > 0.0))
        throw DomainError("build_band_grid: step must be positive");
    if (!(lo <= hi))
        throw DomainError("build_band_grid: lo must not exceed hi");

    // First and last lattice indices k with lo + k*step inside [lo, hi] and inside the azimuth.
    long first = 0;
    if (lo < -kHalfPi)
        first = static_cast<long>(std::ceil((-kHalfPi - lo) / step - kLatticeSlack));
    long last = static_cast<long>(std::floor((hi - lo) / step + kLatticeSlack));
    while (first <= last && lo + static_cast<double>(first) * step < -kHalfPi)
        ++first;
    while (last >= first && lo + static_cast<double>(last) * step >= kHalfPi)
        --last;
    if (last < first)
        throw DomainError("build_band_grid: interval is empty after clipping to [-pi/2, pi/2)");
    return AngleGrid(lo + static_cast<double>(first) * step, step,
                     static_cast<std::size_t>(last - first + 1));
}

CVector steering_vector(double theta, const UlaGeometry &geometry)
{
    if (!in_azimuth(theta))
        throw DomainError("steering_vector: theta outside [-pi/2, pi/2)");
    return steering_matrix({theta}, geometry).col(0);
}

CMatrix steering_matrix(const std::vector<double> &thetas, const UlaGeometry &geometry)
{
    const int n = geometry.n_sensors();
    CMatrix a(n, static_cast<Eigen::Index>(thetas.size()));
    for (std::size_t k = 0; k < thetas.size(); ++k) {
        const double phase = -kPi * std::sin(thetas[k]);
        for (int i = 0; i < n; ++i)
            a(i, static_cast<Eigen::Index>(k)) = std::polar(1.0, phase * i);
    }
    return a;
}

SteeringDictionary::SteeringDictionary(CMatrix matrix, AngleGrid grid, UlaGeometry geometry)
    : matrix_(std::move(matrix)), grid_(std::move(grid)), geometry_(geometry)
{
    if (matrix_.rows() != geometry_.n_sensors() ||
        matrix_.cols() != static_cast<Eigen::Index>(grid_.size()))
        throw DomainError("SteeringDictionary: matrix shape does not match grid and geometry");
}

SteeringDictionary build_dictionary(const AngleGrid &grid, const UlaGeometry &geometry)
{
    return SteeringDictionary(steering_matrix(grid.values(), geometry), grid, geometry);
}

Scenario Scenario::from_snr(UlaGeometry geometry, std::vector<double> true_doas, int n_snapshots,
                            double snr_db, SourceModel model)
{
    Scenario s{geometry, std::move(true_doas), n_snapshots, snr_db, model,
               std::pow(10.0, -snr_db / 10.0)};
    s.validate();
    return s;
}

void Scenario::validate() const
{
    const auto k = true_doas.size();
    if (k < 1 || static_cast<int>(k) >= geometry.n_sensors())
        throw DomainError("Scenario: number of sources must satisfy 1 <= K < N");
    for (std::size_t i = 0; i < k; ++i) {
        if (!in_azimuth(true_doas[i]))
            throw DomainError("Scenario: DoA outside [-pi/2, pi/2)");
        for (std::size_t j = 0; j < i; ++j)
            if (true_doas[i] == true_doas[j])
                throw DomainError("Scenario: DoAs must be pairwise distinct");
    }
    if (n_snapshots < 1)
        throw DomainError("Scenario: n_snapshots must be >= 1");
    if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance))
        throw DomainError("Scenario: noise variance must be finite and >= 0");
}

SnapshotBatch::SnapshotBatch(CMatrix snapshots) : snapshots_(std::move(snapshots))
{
    if (snapshots_.rows() < 1)
        throw DomainError("SnapshotBatch: snapshots must have at least one sensor");
}

SnapshotBatch simulate_snapshots(const Scenario &scenario, std::uint64_t seed)
{
    scenario.validate();
    const int n = scenario.geometry.n_sensors();
    const int l = scenario.n_snapshots;
    const auto k = static_cast<Eigen::Index>(scenario.true_doas.size());

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    const double source_scale = std::sqrt(0.5);
    const double noise_scale = std::sqrt(scenario.noise_variance / 2.0);
    auto complex_gaussian = [&](double scale) {
        const double re = unit(rng);
        const double im = unit(rng);
        return Complex(scale * re, scale * im);
    };

    const CMatrix a = steering_matrix(scenario.true_doas, scenario.geometry);
    CMatrix signals(k, l);
    for (int t = 0; t < l; ++t) {
        if (scenario.source_model == SourceModel::coherent) {
            const Complex shared = complex_gaussian(source_scale);
            signals.col(t).setConstant(shared);
        } else {
            for (Eigen::Index s = 0; s < k; ++s)
                signals(s, t) = complex_gaussian(source_scale);
        }
    }
    CMatrix noise(n, l);
    for (int t = 0; t < l; ++t)
        for (int i = 0; i < n; ++i)
            noise(i, t) = complex_gaussian(noise_scale);

    return SnapshotBatch(a * signals + noise);
}

SufficientStatistic snapshot_mean(const SnapshotBatch &batch)
{
    if (batch.n_snapshots() < 1)
        throw DomainError("snapshot_mean: empty batch");
    return {batch.snapshots().rowwise().mean(), batch.n_snapshots()};
}

CMatrix sample_covariance(const SnapshotBatch &batch)
{
    if (batch.n_snapshots() < 1)
        throw DomainError("sample_covariance: empty batch");
    const CMatrix &y = batch.snapshots();
    CMatrix r = (y * y.adjoint()) / static_cast<double>(batch.n_snapshots());
    return (0.5 * (r + r.adjoint())).eval();
}

} // namespace nuvdoa

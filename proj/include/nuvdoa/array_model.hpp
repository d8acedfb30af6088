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

#ifndef NUVDOA_ARRAY_MODEL_HPP
#define NUVDOA_ARRAY_MODEL_HPP

#include "nuvdoa/common.hpp"

#include <cstdint>
#include <vector>

namespace nuvdoa
{

/// Uniform linear array with half-wavelength element spacing.
class UlaGeometry
{
public:
    explicit UlaGeometry(int n_sensors = 16);

    int n_sensors() const { return n_sensors_; }

    bool operator==(const UlaGeometry &) const = default;

private:
    int n_sensors_;
};

/// Ordered, uniformly spaced angles (radians) inside [-pi/2, pi/2).
///
/// Values are always computed as origin + k * step, never accumulated, so
/// spacing is uniform to rounding.
class AngleGrid
{
public:
    AngleGrid() = default;

    /// Validating constructor; throws DomainError when count < 1, step <= 0
    /// or any point falls outside [-pi/2, pi/2).
    AngleGrid(double origin, double step, std::size_t count);

    const std::vector<double> &values() const { return values_; }
    double step() const { return step_; }
    double origin() const { return origin_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    double operator[](std::size_t i) const { return values_[i]; }

    /// Index of the grid point closest to theta.
    std::size_t nearest_index(double theta) const;

    bool operator==(const AngleGrid &) const = default;

private:
    std::vector<double> values_;
    double step_ = 0.0;
    double origin_ = 0.0;
};

/// Full-azimuth grid with m_cells equidistant cells: values[m] = m*pi/M - pi/2.
AngleGrid build_grid(int m_cells);

/// Inclusive grid lo, lo+step, ... up to hi, keeping only the lattice points
/// that fall inside [-pi/2, pi/2). The lattice stays anchored at lo so that
/// clipping drops points instead of shifting them.
AngleGrid build_band_grid(double lo, double hi, double step);

/// a(theta)[n] = exp(-i*pi*n*sin(theta)), n = 0..N-1.
CVector steering_vector(double theta, const UlaGeometry &geometry);

/// Steering matrix of a list of angles (one column per angle). Unlike
/// steering_vector this does not range-check, so it also serves the
/// noiseless oracles in tests.
CMatrix steering_matrix(const std::vector<double> &thetas, const UlaGeometry &geometry);

class SteeringDictionary
{
public:
    SteeringDictionary(CMatrix matrix, AngleGrid grid, UlaGeometry geometry);

    const CMatrix &matrix() const { return matrix_; }
    const AngleGrid &grid() const { return grid_; }
    const UlaGeometry &geometry() const { return geometry_; }
    Eigen::Index n_atoms() const { return matrix_.cols(); }

private:
    CMatrix matrix_;
    AngleGrid grid_;
    UlaGeometry geometry_;
};

SteeringDictionary build_dictionary(const AngleGrid &grid, const UlaGeometry &geometry);

enum class SourceModel
{
    noncoherent,
    coherent,
};

/// Per-source signal power is 1; noise is white with variance noise_variance.
struct Scenario
{
    UlaGeometry geometry;
    std::vector<double> true_doas;
    int n_snapshots = 1;
    double snr_db = 10.0;
    SourceModel source_model = SourceModel::noncoherent;
    double noise_variance = 0.1;

    /// noise_variance = 10^(-snr_db/10).
    static Scenario from_snr(UlaGeometry geometry, std::vector<double> true_doas, int n_snapshots,
                             double snr_db, SourceModel model = SourceModel::noncoherent);

    /// Throws DomainError when K is not in [1, N), an angle lies outside
    /// [-pi/2, pi/2), angles repeat, L < 1 or the noise variance is negative.
    void validate() const;
};

/// L snapshots stored as the columns of an N x L matrix.
class SnapshotBatch
{
public:
    explicit SnapshotBatch(CMatrix snapshots);

    const CMatrix &snapshots() const { return snapshots_; }
    int n_sensors() const { return static_cast<int>(snapshots_.rows()); }
    int n_snapshots() const { return static_cast<int>(snapshots_.cols()); }

private:
    CMatrix snapshots_;
};

struct SufficientStatistic
{
    CVector mean;
    int n_snapshots = 1;
};

/// y(t) = A(theta) s(t) + v(t). Pure function of (scenario, seed).
SnapshotBatch simulate_snapshots(const Scenario &scenario, std::uint64_t seed);

SufficientStatistic snapshot_mean(const SnapshotBatch &batch);

/// (1/L) sum_t y(t) y(t)^H, symmetrized.
CMatrix sample_covariance(const SnapshotBatch &batch);

} // namespace nuvdoa

#endif

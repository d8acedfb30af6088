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

// Covariance-based reference estimators: Bartlett and MVDR beamformers,
// spectral MUSIC and Root-MUSIC.

#ifndef NUVDOA_BASELINES_HPP
#define NUVDOA_BASELINES_HPP

#include "nuvdoa/nuv_ssr.hpp"

#include <optional>
#include <vector>

namespace nuvdoa
{

/// Fewer admissible polynomial roots than requested sources.
class RootDeficit : public NumericalError
{
public:
    using NumericalError::NumericalError;
};

struct SubspaceDecomposition
{
    /// All N eigenvalues, descending.
    RVector eigenvalues;
    /// Eigenvectors of the N-K smallest eigenvalues, one per column.
    CMatrix noise_subspace;
};

/// a^H R a / N^2, clamped at zero.
Spectrum bartlett_spectrum(const CMatrix &cov, const AngleGrid &grid);

/// 1 / (a^H (R + load I)^-1 a). Without an explicit load, 1e-6 * tr(R)/N is
/// used. Throws NumericalError when R + load I is not positive definite.
Spectrum mvdr_spectrum(const CMatrix &cov, const AngleGrid &grid,
                       std::optional<double> diagonal_load = std::nullopt);

/// Eigendecomposition split. The order of eigenvectors inside a cluster of
/// equal eigenvalues is whatever the solver returns and is not stable.
SubspaceDecomposition noise_subspace(const CMatrix &cov, int k);

/// 1 / ||U_n^H a||^2.
Spectrum music_spectrum(const CMatrix &cov, const AngleGrid &grid, int k);

/// Root-MUSIC: roots of sum_k c_k z^k with c_k the k-th diagonal sum of
/// U_n U_n^H. Of every reciprocal root pair the inner one is used and the K
/// roots closest to the unit circle are mapped to angles through
/// theta = asin(-arg(z)/pi). Returns angles sorted ascending; throws
/// RootDeficit when fewer than K roots qualify.
std::vector<double> root_music(const CMatrix &cov, int k, const UlaGeometry &geometry);

} // namespace nuvdoa

#endif

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

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace nuvdoa
{

namespace
{

void check_covariance(const CMatrix &cov, const char *who)
{
    if (cov.rows() != cov.cols() || cov.rows() < 2)
        throw DomainError(std::string(who) + ": covariance must be square with N >= 2");
}

void check_order(const CMatrix &cov, int k, const char *who)
{
    if (k < 1 || k >= cov.rows())
        throw DomainError(std::string(who) + ": K must satisfy 1 <= K < N");
}

// Roots within this distance of the unit circle are numerically on it: a
// noiseless covariance puts a double root there, which rounding splits in an
// arbitrary direction.
constexpr double kOnCircle = 1e-5;

using Poly = std::vector<Complex>; // ascending powers

Complex evaluate(const Poly &p, Complex z)
{
    Complex acc = 0.0;
    for (auto it = p.rbegin(); it != p.rend(); ++it)
        acc = acc * z + *it;
    return acc;
}

Poly derivative(const Poly &p)
{
    Poly d(p.size() > 1 ? p.size() - 1 : 1, Complex(0.0));
    for (std::size_t j = 1; j < p.size(); ++j)
        d[j - 1] = static_cast<double>(j) * p[j];
    return d;
}

std::vector<Complex> polynomial_roots(Poly p)
{
    double scale = 0.0;
    for (const auto &c : p)
        scale = std::max(scale, std::abs(c));
    while (p.size() > 1 && std::abs(p.back()) <= 1e-13 * scale)
        p.pop_back();
    const auto degree = static_cast<Eigen::Index>(p.size()) - 1;
    if (degree < 1)
        return {};

    CMatrix companion = CMatrix::Zero(degree, degree);
    for (Eigen::Index i = 1; i < degree; ++i)
        companion(i, i - 1) = 1.0;
    for (Eigen::Index i = 0; i < degree; ++i)
        companion(i, degree - 1) = -p[static_cast<std::size_t>(i)] / p.back();
    Eigen::ComplexEigenSolver<CMatrix> solver(companion, false);
    if (solver.info() != Eigen::Success)
        throw NumericalError("root_music: companion eigenvalue iteration did not converge");
    const CVector ev = solver.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

// Newton on p' from z: converges quadratically onto a double root of p,
// where Newton on p itself stalls at sqrt(eps) accuracy.
Complex polish_double_root(const Poly &p, Complex z)
{
    const Poly d1 = derivative(p);
    const Poly d2 = derivative(d1);
    for (int it = 0; it < 30; ++it) {
        const Complex slope = evaluate(d2, z);
        if (std::abs(slope) == 0.0)
            break;
        const Complex step = evaluate(d1, z) / slope;
        z -= step;
        if (std::abs(step) < 1e-16)
            break;
    }
    return z;
}

double angle_from_root(Complex z)
{
    const double s = std::clamp(-std::arg(z) / kPi, -1.0, 1.0);
    const double theta = std::asin(s);
    // sin = +1 and -1 give the same steering vector; report the in-range end.
    return theta >= kHalfPi ? -kHalfPi : theta;
}

} // namespace

Spectrum bartlett_spectrum(const CMatrix &cov, const AngleGrid &grid)
{
    check_covariance(cov, "bartlett_spectrum");
    const UlaGeometry geometry(static_cast<int>(cov.rows()));
    const CMatrix a = steering_matrix(grid.values(), geometry);
    const CMatrix ra = cov * a;
    const double n2 = static_cast<double>(cov.rows() * cov.rows());
    Spectrum s{std::vector<double>(grid.size()), grid};
    for (Eigen::Index m = 0; m < a.cols(); ++m)
        s.values[static_cast<std::size_t>(m)] = std::max(0.0, a.col(m).dot(ra.col(m)).real() / n2);
    return s;
}

Spectrum mvdr_spectrum(const CMatrix &cov, const AngleGrid &grid, std::optional<double> diagonal_load)
{
    check_covariance(cov, "mvdr_spectrum");
    const auto n = cov.rows();
    const double load = diagonal_load.value_or(1e-6 * cov.trace().real() / static_cast<double>(n));
    if (!(load >= 0.0))
        throw DomainError("mvdr_spectrum: diagonal load must be nonnegative");

    CMatrix loaded = cov;
    loaded.diagonal().array() += load;
    Eigen::LLT<CMatrix> llt(loaded);
    if (llt.info() != Eigen::Success)
        throw NumericalError("mvdr_spectrum: covariance + load*I is not positive definite; "
                             "increase diagonal_load");

    const UlaGeometry geometry(static_cast<int>(n));
    const CMatrix x = llt.matrixL().solve(steering_matrix(grid.values(), geometry));
    Spectrum s{std::vector<double>(grid.size()), grid};
    for (Eigen::Index m = 0; m < x.cols(); ++m) {
        const double q = x.col(m).squaredNorm();
        s.values[static_cast<std::size_t>(m)] = q > 0.0 ? 1.0 / q : std::numeric_limits<double>::infinity();
    }
    return s;
}

SubspaceDecomposition noise_subspace(const CMatrix &cov, int k)
{
    check_covariance(cov, "noise_subspace");
    check_order(cov, k, "noise_subspace");
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(cov);
    if (eig.info() != Eigen::Success)
        throw NumericalError("noise_subspace: eigendecomposition failed");
    const auto n = cov.rows();
    // Eigen sorts ascending, so the noise subspace is the leading block.
    SubspaceDecomposition d;
    d.eigenvalues = eig.eigenvalues().reverse();
    d.noise_subspace = eig.eigenvectors().leftCols(n - k);
    return d;
}

Spectrum music_spectrum(const CMatrix &cov, const AngleGrid &grid, int k)
{
    const auto d = noise_subspace(cov, k);
    const UlaGeometry geometry(static_cast<int>(cov.rows()));
    const CMatrix proj = d.noise_subspace.adjoint() * steering_matrix(grid.values(), geometry);
    Spectrum s{std::vector<double>(grid.size()), grid};
    for (Eigen::Index m = 0; m < proj.cols(); ++m) {
        const double q = std::max(proj.col(m).squaredNorm(), std::numeric_limits<double>::min());
        s.values[static_cast<std::size_t>(m)] = 1.0 / q;
    }
    return s;
}

std::vector<double> root_music(const CMatrix &cov, int k, const UlaGeometry &geometry)
{
    check_covariance(cov, "root_music");
    check_order(cov, k, "root_music");
    if (cov.rows() != geometry.n_sensors())
        throw DomainError("root_music: covariance size does not match the array");

    const auto d = noise_subspace(cov, k);
    const CMatrix c = d.noise_subspace * d.noise_subspace.adjoint();
    const auto n = c.rows();

    // z^(N-1) * sum_{k=-(N-1)}^{N-1} c_k z^k with c_k = sum_m C(m, m+k).
    Poly poly(static_cast<std::size_t>(2 * n - 1), Complex(0.0));
    for (Eigen::Index off = -(n - 1); off <= n - 1; ++off) {
        Complex sum = 0.0;
        for (Eigen::Index m = std::max<Eigen::Index>(0, -off); m < n && m + off < n; ++m)
            sum += c(m, m + off);
        poly[static_cast<std::size_t>(off + n - 1)] = sum;
    }

    std::vector<Complex> candidates;
    for (const auto &z : polynomial_roots(poly))
        if (std::abs(z) < 1.0 + kOnCircle)
            candidates.push_back(z);
    std::stable_sort(candidates.begin(), candidates.end(), [](Complex a, Complex b) {
        return std::abs(1.0 - std::abs(a)) < std::abs(1.0 - std::abs(b));
    });

    std::vector<Complex> chosen;
    for (const auto &z : candidates) {
        if (chosen.size() == static_cast<std::size_t>(k))
            break;
        // Both halves of a coalesced on-circle pair can pass the filter.
        const bool duplicate = std::any_of(chosen.begin(), chosen.end(),
                                           [&](Complex s) { return std::abs(s - z) < kOnCircle; });
        if (!duplicate)
            chosen.push_back(z);
    }
    if (chosen.size() < static_cast<std::size_t>(k))
        throw RootDeficit("root_music: only " + std::to_string(chosen.size()) +
                          " admissible roots for K = " + std::to_string(k));

    std::vector<double> angles;
    for (auto z : chosen) {
        if (std::abs(1.0 - std::abs(z)) < kOnCircle)
            z = polish_double_root(poly, z);
        angles.push_back(angle_from_root(z));
    }
    std::sort(angles.begin(), angles.end());
    return angles;
}

} // namespace nuvdoa

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
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

using namespace nuvdoa;
using nuvdoa::test::oracle_steering;

TEST(steering_vector, broadside_is_all_ones)
{
    const auto a = steering_vector(0.0, UlaGeometry(4));
    for (int n = 0; n < 4; ++n)
        EXPECT_EQ(a[n], Complex(1.0, 0.0));
}

TEST(steering_vector, thirty_degrees)
{
    const auto a = steering_vector(kPi / 6.0, UlaGeometry(4));
    const Complex expected[] = {{1, 0}, {0, -1}, {-1, 0}, {0, 1}};
    for (int n = 0; n < 4; ++n)
        EXPECT_LT(std::abs(a[n] - expected[n]), 1e-12);
}

TEST(steering_vector, matches_elementwise_oracle)
{
    EXPECT_LT(test::max_abs_diff(steering_vector(0.3, UlaGeometry(8)), oracle_steering(0.3, 8)), 1e-14);
}

TEST(steering_vector, rejects_out_of_range)
{
    EXPECT_THROW(steering_vector(kHalfPi, UlaGeometry(4)), DomainError);
    EXPECT_THROW(steering_vector(-kHalfPi - 1e-9, UlaGeometry(4)), DomainError);
    EXPECT_NO_THROW(steering_vector(-kHalfPi, UlaGeometry(4)));
}

TEST(steering_vector, negated_angle_is_conjugate)
{
    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        const double t = test::uniform(rng, -1.5, 1.5);
        const auto a = steering_vector(t, UlaGeometry(12));
        const auto b = steering_vector(-t, UlaGeometry(12));
        EXPECT_LT(test::max_abs_diff(b, a.conjugate()), 1e-14);
    }
}

TEST(geometry, needs_two_sensors)
{
    EXPECT_THROW(UlaGeometry(1), DomainError);
    EXPECT_NO_THROW(UlaGeometry(2));
}

TEST(build_grid, four_cells)
{
    const auto g = build_grid(4);
    ASSERT_EQ(g.size(), 4u);
    const double expected[] = {-90, -45, 0, 45};
    for (int i = 0; i < 4; ++i)
        EXPECT_NEAR(g[i], deg_to_rad(expected[i]), 1e-15);
}

TEST(build_grid, steps)
{
    EXPECT_NEAR(rad_to_deg(build_grid(3000).step()), 0.06, 1e-12);
    EXPECT_NEAR(rad_to_deg(build_grid(18000).step()), 0.01, 1e-12);
    EXPECT_EQ(build_grid(18000).size(), 18000u);
    EXPECT_THROW(build_grid(1), DomainError);
}

TEST(build_grid, uniform_and_inside_azimuth)
{
    const auto g = build_grid(1800);
    for (std::size_t i = 1; i < g.size(); ++i) {
        EXPECT_GT(g[i], g[i - 1]);
        EXPECT_NEAR(g[i] - g[i - 1], g.step(), 1e-12);
    }
    EXPECT_GE(g[0], -kHalfPi);
    EXPECT_LT(g[g.size() - 1], kHalfPi);
}

TEST(build_band_grid, one_degree_band_has_101_points)
{
    EXPECT_EQ(build_band_grid(deg_to_rad(-0.5), deg_to_rad(0.5), deg_to_rad(0.01)).size(), 101u);
}

TEST(build_band_grid, endpoints_inclusive)
{
    const auto g = build_band_grid(0.0, deg_to_rad(0.1), deg_to_rad(0.1));
    ASSERT_EQ(g.size(), 2u);
    EXPECT_EQ(g[0], 0.0);
    EXPECT_NEAR(g[1], deg_to_rad(0.1), 1e-15);
}

TEST(build_band_grid, clipped_below_ninety)
{
    const auto g = build_band_grid(deg_to_rad(89.8), deg_to_rad(90.5), deg_to_rad(0.1));
    ASSERT_FALSE(g.empty());
    EXPECT_LT(g[g.size() - 1], kHalfPi);
    EXPECT_EQ(g.size(), 2u); // 89.8, 89.9
}

TEST(build_band_grid, empty_interval_throws)
{
    EXPECT_THROW(build_band_grid(deg_to_rad(90.1), deg_to_rad(91.0), deg_to_rad(0.1)), DomainError);
    EXPECT_THROW(build_band_grid(0.1, 0.0, 0.01), DomainError);
}

TEST(build_dictionary, single_broadside_column)
{
    const auto d = build_dictionary(AngleGrid(0.0, 0.1, 1), UlaGeometry(4));
    ASSERT_EQ(d.matrix().cols(), 1);
    EXPECT_LT(test::max_abs_diff(d.matrix(), CMatrix::Ones(4, 1)), 1e-15);
}

TEST(build_dictionary, first_row_is_ones)
{
    const auto d = build_dictionary(build_grid(4), UlaGeometry(2));
    ASSERT_EQ(d.matrix().rows(), 2);
    ASSERT_EQ(d.matrix().cols(), 4);
    for (int m = 0; m < 4; ++m)
        EXPECT_EQ(d.matrix()(0, m), Complex(1.0, 0.0));
}

TEST(build_dictionary, columns_match_oracle_and_unit_modulus)
{
    const auto grid = build_grid(3000);
    const auto d = build_dictionary(grid, UlaGeometry(16));
    EXPECT_LT((d.matrix().cwiseAbs().array() - 1.0).abs().maxCoeff(), 1e-12);
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
    for (int i = 0; i < 10; ++i) {
        const auto m = pick(rng);
        EXPECT_LT(test::max_abs_diff(d.matrix().col(static_cast<Eigen::Index>(m)), oracle_steering(grid[m], 16)),
                  1e-12);
    }
}

TEST(simulate, noiseless_snapshots_are_scaled_steering_vectors)
{
    auto sc = Scenario::from_snr(UlaGeometry(8), {build_grid(180)[100]}, 3, 10.0);
    sc.noise_variance = 0.0;
    const auto batch = simulate_snapshots(sc, 5);
    const auto a = oracle_steering(sc.true_doas[0], 8);
    for (int t = 0; t < 3; ++t) {
        const Complex s = batch.snapshots()(0, t);
        EXPECT_LT(test::max_abs_diff(batch.snapshots().col(t), s * a), 1e-12);
    }
}

TEST(simulate, noise_power_matches_variance)
{
    const auto sc = Scenario::from_snr(UlaGeometry(8), {0.2}, 10000, 10.0);
    const auto batch = simulate_snapshots(sc, 17);
    // Remove the source by projecting out its steering vector.
    const auto a = oracle_steering(0.2, 8);
    const CMatrix p = CMatrix::Identity(8, 8) - a * a.adjoint() / 8.0;
    const double residual = (p * batch.snapshots()).squaredNorm() / (7.0 * 10000.0);
    EXPECT_NEAR(residual / sc.noise_variance, 1.0, 0.05);
}

TEST(simulate, coherent_sources_are_rank_one)
{
    auto sc = Scenario::from_snr(UlaGeometry(8), {-0.3, 0.4}, 20, 10.0, SourceModel::coherent);
    sc.noise_variance = 0.0;
    const auto batch = simulate_snapshots(sc, 2);
    Eigen::JacobiSVD<CMatrix> svd(batch.snapshots());
    const auto &sv = svd.singularValues();
    EXPECT_GT(sv[0], 1.0);
    EXPECT_LT(sv[1], 1e-10 * sv[0]);
}

TEST(simulate, same_seed_is_bit_identical)
{
    const auto sc = Scenario::from_snr(UlaGeometry(16), {0.1, -0.7}, 50, 3.0);
    EXPECT_EQ(simulate_snapshots(sc, 99).snapshots(), simulate_snapshots(sc, 99).snapshots());
    EXPECT_NE(simulate_snapshots(sc, 99).snapshots(), simulate_snapshots(sc, 98).snapshots());
}

TEST(simulate, invalid_scenarios_throw)
{
    EXPECT_THROW(simulate_snapshots(Scenario::from_snr(UlaGeometry(4), {0.1, 0.1}, 5, 0.0), 1), DomainError);
    EXPECT_THROW(simulate_snapshots(Scenario::from_snr(UlaGeometry(4), {kHalfPi}, 5, 0.0), 1), DomainError);
    EXPECT_THROW(simulate_snapshots(Scenario::from_snr(UlaGeometry(2), {0.1, 0.2}, 5, 0.0), 1), DomainError);
}

TEST(snapshot_mean, single_snapshot)
{
    std::mt19937_64 rng(1);
    const CMatrix y = test::random_cmatrix(6, 1, rng);
    const auto stat = snapshot_mean(SnapshotBatch(y));
    EXPECT_EQ(stat.mean, CVector(y.col(0)));
    EXPECT_EQ(stat.n_snapshots, 1);
}

TEST(snapshot_mean, opposite_snapshots_cancel)
{
    std::mt19937_64 rng(2);
    const CVector u = test::random_cvector(5, rng);
    CMatrix y(5, 2);
    y << u, -u;
    EXPECT_EQ(snapshot_mean(SnapshotBatch(y)).mean, CVector::Zero(5));
}

TEST(snapshot_mean, matches_summation_oracle)
{
    std::mt19937_64 rng(3);
    const CMatrix y = test::random_cmatrix(16, 100, rng);
    const auto stat = snapshot_mean(SnapshotBatch(y));
    for (int n = 0; n < 16; ++n) {
        Complex acc = 0.0;
        for (int t = 0; t < 100; ++t)
            acc += y(n, t);
        EXPECT_LT(std::abs(stat.mean[n] - acc / 100.0), 1e-14);
    }
    EXPECT_EQ(stat.n_snapshots, 100);
}

TEST(snapshot_batch, empty_is_rejected)
{
    EXPECT_THROW(snapshot_mean(SnapshotBatch(CMatrix(4, 0))), DomainError);
    EXPECT_THROW(sample_covariance(SnapshotBatch(CMatrix(4, 0))), DomainError);
}

TEST(sample_covariance, single_snapshot_outer_product)
{
    std::mt19937_64 rng(4);
    const CVector u = test::random_cvector(5, rng);
    EXPECT_LT(test::max_abs_diff(sample_covariance(SnapshotBatch(CMatrix(u))), u * u.adjoint()), 1e-14);
}

TEST(sample_covariance, zero_batch)
{
    EXPECT_EQ(sample_covariance(SnapshotBatch(CMatrix::Zero(3, 4))), CMatrix::Zero(3, 3));
}

TEST(sample_covariance, hermitian_psd)
{
    std::mt19937_64 rng(5);
    const auto r = sample_covariance(SnapshotBatch(test::random_cmatrix(8, 50, rng)));
    EXPECT_EQ(r, CMatrix(r.adjoint()));
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(r);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-12);
}

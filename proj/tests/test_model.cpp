// Copyright 2026 The cpcad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>

#include "doctest.h"
#include "oracles.hpp"

#include "cpca/error.hpp"
#include "cpca/model.hpp"

using namespace cpca;

namespace {

// A fixed rotation of the first two spikes of R^6 away from the axes.
Matrix rotated_basis() {
    Matrix q = Matrix::Zero(6, 2);
    const double a = 0.6, b = 0.8;
    q(0, 0) = a;
    q(3, 0) = b;
    q(1, 1) = std::sqrt(0.5);
    q(2, 1) = std::sqrt(0.5);
    return q;
}

Matrix sample_cov(const Matrix& x) {
    const Vector mean = x.colwise().mean();
    const Matrix c = x.rowwise() - mean.transpose();
    return c.transpose() * c / static_cast<double>(x.rows());
}

}  // namespace

TEST_CASE("make_spiked for the simulation spectrum") {
    const auto m = make_spiked(10000, {50, 40, 30, 20, 10});
    CHECK(m.m() == 5);
    CHECK(m.eigenvalue(0) == 50.0);
    CHECK(m.eigenvalue(4) == 10.0);
    CHECK(m.eigenvalue(5) == 1.0);
    CHECK(m.eigenvalue(9999) == 1.0);
    CHECK(m.trace() == 9995.0 + 150.0);
}

TEST_CASE("smallest legal spike gives diag(2,1,1)") {
    const auto m = make_spiked(3, {2});
    Matrix expect = Matrix::Identity(3, 3);
    expect(0, 0) = 2.0;
    CHECK(m.dense_covariance() == expect);
}

TEST_CASE("spectrum guards") {
    CHECK_THROWS_AS(make_spiked(5, {3, 3}), ValidationError);
    CHECK_THROWS_AS(make_spiked(5, {3, 4}), ValidationError);
    CHECK_THROWS_AS(make_spiked(5, {1.0}), ValidationError);
    CHECK_THROWS_AS(make_spiked(2, {3, 2}), ValidationError);
    CHECK_THROWS_AS(make_spiked(0, {}), ValidationError);
    CHECK_NOTHROW(make_spiked(4, {}));
    Matrix bad = rotated_basis();
    bad(0, 0) += 1e-6;
    CHECK_THROWS_AS(make_spiked(6, {5, 3}, bad), ValidationError);
    CHECK_THROWS_AS(make_spiked(6, {5, 3}, Matrix::Identity(6, 3)), ValidationError);
}

TEST_CASE("explicit basis completion is orthonormal and keeps the spikes first") {
    const auto m = make_spiked(6, {5, 3}, rotated_basis());
    const Matrix v = m.eigenvectors(6);
    CHECK((v.transpose() * v - Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((v.leftCols(2) - rotated_basis()).cwiseAbs().maxCoeff() == 0.0);
    // V diag(lambda) V^T reproduces the dense covariance
    Vector lam = Vector::Ones(6);
    lam(0) = 5;
    lam(1) = 3;
    CHECK((v * lam.asDiagonal() * v.transpose() - m.dense_covariance()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("anomaly moves a single eigen-coordinate") {
    SUBCASE("identity basis, exact") {
        const auto m = make_spiked(8, {4, 2});
        const Vector mu = anomaly_mean(m, {3, 2.5});
        const Vector coords = m.eigenvectors(8).transpose() * mu;
        for (Eigen::Index i = 0; i < 8; ++i) CHECK(coords(i) == (i == 3 ? 2.5 : 0.0));
    }
    SUBCASE("rotated basis") {
        const auto m = make_spiked(6, {5, 3}, rotated_basis());
        const Vector mu = anomaly_mean(m, {4, 7.0});
        const Vector coords = m.eigenvectors(6).transpose() * mu;
        for (Eigen::Index i = 0; i < 6; ++i) CHECK(std::abs(coords(i) - (i == 4 ? 7.0 : 0.0)) < 1e-12);
    }
}

TEST_CASE("anomaly guards") {
    const auto m = make_spiked(10, {3});
    CHECK_THROWS_AS(validate_anomaly(m, {10, 1.0}), ValidationError);
    CHECK_NOTHROW(validate_anomaly(m, {9, 1.0}));
    CHECK_THROWS_AS(validate_anomaly(m, {2, -1.0}), ValidationError);
    CHECK_THROWS_AS(validate_anomaly(m, {3, 1.0}, 3), ValidationError);
    CHECK_NOTHROW(validate_anomaly(m, {4, 1.0}, 3));
}

TEST_CASE("count = 0 gives an empty matrix") {
    NormalRng rng(1);
    const auto x = sample_x(make_spiked(4, {2}), std::nullopt, 0, rng);
    CHECK(x.rows() == 0);
    CHECK(x.cols() == 4);
}

TEST_CASE("gamma = 0 reproduces the null draw exactly") {
    const auto m = make_spiked(20, {9, 4});
    NormalRng a(11), b(11);
    CHECK(sample_x(m, std::nullopt, 50, a) == sample_x(m, AnomalySpec{5, 0.0}, 50, b));
}

TEST_CASE("diag(2,1,1): per-coordinate variances within 5 SE") {
    NormalRng rng(3);
    const std::size_t n = 100000;
    const RowMatrix x = sample_x(make_spiked(3, {2}), std::nullopt, n, rng);
    const double sigma[3] = {2, 1, 1};
    for (Eigen::Index j = 0; j < 3; ++j) {
        const double v = x.col(j).squaredNorm() / static_cast<double>(n);
        const double se = std::sqrt(2.0 * std::pow(sigma[j], 4) / static_cast<double>(n));
        CHECK(std::abs(v - sigma[j]) < 5.0 * se);
        CHECK(std::abs(x.col(j).mean()) < 5.0 * std::sqrt(sigma[j] / static_cast<double>(n)));
    }
}

TEST_CASE("diag(2,1,1) with d=1, gamma=7: sample mean near (0,7,0)") {
    NormalRng rng(4);
    const std::size_t n = 100000;
    const RowMatrix x = sample_x(make_spiked(3, {2}), AnomalySpec{1, 7.0}, n, rng);
    const double expect[3] = {0, 7, 0}, sigma[3] = {2, 1, 1};
    for (Eigen::Index j = 0; j < 3; ++j)
        CHECK(std::abs(x.col(j).mean() - expect[j]) < 5.0 * std::sqrt(sigma[j] / static_cast<double>(n)));
}

TEST_CASE("structured sampler matches a dense Cholesky sampler") {
    const auto m = make_spiked(6, {5, 3}, rotated_basis());
    const Matrix sigma = m.dense_covariance();
    const std::size_t n = 1'000'000;
    NormalRng rng(8);
    const Matrix structured = sample_cov(sample_x(m, std::nullopt, n, rng));
    const Matrix dense = sample_cov(oracle::dense_gaussian_rows(sigma, n, 8));
    for (Eigen::Index i = 0; i < 6; ++i)
        for (Eigen::Index j = 0; j < 6; ++j) {
            const double se = std::sqrt((sigma(i, i) * sigma(j, j) + sigma(i, j) * sigma(i, j)) / static_cast<double>(n));
            CHECK(std::abs(structured(i, j) - sigma(i, j)) < 5.0 * se);
            CHECK(std::abs(dense(i, j) - sigma(i, j)) < 5.0 * se);
        }
}

TEST_CASE("E||X||^2 = tr(Sigma)") {
    const auto m = make_spiked(200, {50, 40, 30, 20, 10});
    NormalRng rng(12);
    const std::size_t n = 20000;
    const RowMatrix x = sample_x(m, std::nullopt, n, rng);
    std::vector<double> norms(n);
    for (std::size_t r = 0; r < n; ++r) norms[r] = x.row(static_cast<Eigen::Index>(r)).squaredNorm();
    double tr2 = 195.0;
    for (double s : m.leading) tr2 += s * s;
    CHECK(std::abs(oracle::mean(norms) - m.trace()) < 5.0 * std::sqrt(2.0 * tr2 / static_cast<double>(n)));
}

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
#include "cpca/projection.hpp"

using namespace cpca;

namespace {

RowMatrix identity_double(std::size_t l, std::size_t p) {
    RowMatrix e = RowMatrix::Zero(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < p; ++i) e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = std::sqrt(static_cast<double>(p));
    return e;
}

}  // namespace

TEST_CASE("entry moments at l=10000, p=500") {
    const auto phi = generate_projection(10000, 500, 17);
    const double n = 10000.0 * 500.0;
    const double mean = phi.entries.mean();
    const double var = (phi.entries.array() - mean).square().sum() / (n - 1.0);
    CHECK(std::abs(mean) < 5.0 / std::sqrt(n));
    CHECK(std::abs(var - 1.0) < 5.0 * std::sqrt(2.0 / n));
    CHECK(phi.c() == 20.0);
}

TEST_CASE("generation is deterministic and row-major in draw order") {
    const auto a = generate_projection(1, 1, 5), b = generate_projection(1, 1, 5);
    CHECK(a.entries(0, 0) == b.entries(0, 0));
    const auto phi = generate_projection(7, 3, 21);
    NormalRng rng(21);
    for (Eigen::Index i = 0; i < 7; ++i)
        for (Eigen::Index j = 0; j < 3; ++j) CHECK(phi.entries(i, j) == rng.normal());
    CHECK(generate_projection(300, 40, 9).entries == generate_projection(300, 40, 9).entries);
}

TEST_CASE("projection guards") {
    CHECK_THROWS_AS(generate_projection(4, 8, 1), ValidationError);
    CHECK_THROWS_AS(generate_projection(4, 0, 1), ValidationError);
    const auto phi = generate_projection(5, 2, 1);
    CHECK_THROWS_AS(project(phi, Vector::Zero(4)), ValidationError);
    CHECK_THROWS_AS(project_rows(phi, RowMatrix::Zero(3, 6)), ValidationError);
}

TEST_CASE("identity double extracts the leading coordinates") {
    const auto phi = projection_from_entries(identity_double(6, 3));
    Vector x(6);
    x << 1.5, -2, 3, 4, 5, 6;
    const Vector y = project(phi, x);
    CHECK(y.size() == 3);
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(y(i) == doctest::Approx(x(i)).epsilon(1e-15));
    CHECK(project(phi, Vector::Zero(6)).isZero(0.0));
}

TEST_CASE("hand arithmetic: entries (3,4), x = (1,2)") {
    RowMatrix e(2, 1);
    e << 3, 4;
    const auto phi = projection_from_entries(e);
    Vector x(2);
    x << 1, 2;
    CHECK(project(phi, x)(0) == 11.0);
}

TEST_CASE("project is linear and matches the batch path") {
    const auto phi = generate_projection(120, 30, 4);
    NormalRng rng(6);
    Vector x1(120), x2(120);
    rng.fill({x1.data(), 120});
    rng.fill({x2.data(), 120});
    const Vector lhs = project(phi, 2.5 * x1 - 0.75 * x2);
    const Vector rhs = 2.5 * project(phi, x1) - 0.75 * project(phi, x2);
    CHECK((lhs - rhs).norm() <= 1e-12 * rhs.norm());
    RowMatrix batch(2, 120);
    batch.row(0) = x1.transpose();
    batch.row(1) = x2.transpose();
    const RowMatrix y = project_rows(phi, batch);
    CHECK((y.row(0).transpose() - project(phi, x1)).norm() <= 1e-12 * y.row(0).norm());
    CHECK((y.row(1).transpose() - project(phi, x2)).norm() <= 1e-12 * y.row(1).norm());
}

TEST_CASE("E||y||^2 = ||x||^2 over fresh projections") {
    const std::size_t l = 50, p = 10, reps = 10000;
    Vector x = Vector::LinSpaced(static_cast<Eigen::Index>(l), -1.0, 2.0);
    std::vector<double> ratio(reps);
    for (std::size_t s = 0; s < reps; ++s) ratio[s] = project(generate_projection(l, p, 1000 + s), x).squaredNorm() / x.squaredNorm();
    // ||y||^2 / ||x||^2 ~ chi^2_p / p
    CHECK(std::abs(oracle::mean(ratio) - 1.0) < 5.0 * std::sqrt(2.0 / p / static_cast<double>(reps)));
}

TEST_CASE("gram identity check") {
    CHECK(gram_identity_check(generate_projection(5000, 500, 3)) < 10.0 / std::sqrt(500.0));
    CHECK(gram_identity_check(projection_from_entries(identity_double(300, 150))) == 0.0);
    RowMatrix e(1, 1);
    e << 2;
    CHECK(gram_identity_check(projection_from_entries(e)) == 3.0);
}

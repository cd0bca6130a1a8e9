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

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cpca/rng.hpp"

namespace cpca {

using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Spiked covariance Sigma = I + sum_i (sigma_i - 1) v_i v_i^T on R^l.
///
/// `leading` holds sigma_1 > ... > sigma_m > 1. When `basis` is empty the
/// leading eigenvectors are the first m coordinate axes.
struct SpikedModel {
    std::size_t l = 0;
    std::vector<double> leading;
    std::optional<Matrix> basis;  // l x m, orthonormal columns

    std::size_t m() const noexcept { return leading.size(); }
    double trace() const noexcept;

    /// Eigenvalue i (0-based) of Sigma.
    double eigenvalue(std::size_t i) const noexcept { return i < leading.size() ? leading[i] : 1.0; }

    /// The first `count` eigenvectors of Sigma as an l x count matrix. Columns past
    /// m span part of the unit-eigenvalue tail; for an explicit basis they are
    /// obtained by Gram-Schmidt of e_1, e_2, ... against the columns already chosen.
    Matrix eigenvectors(std::size_t count) const;

    /// Dense l x l covariance. Only for tests and small l.
    Matrix dense_covariance() const;
};

/// Mean shift mu with V^T mu = gamma * e_{d+1}: gamma sits after d leading zeros,
/// i.e. at 0-based eigen-coordinate d.
struct AnomalySpec {
    std::size_t d = 0;
    double gamma = 0.0;
};

SpikedModel make_spiked(std::size_t l, std::vector<double> leading);

/// Same as make_spiked but with an explicit orthonormal leading basis (l x m).
SpikedModel make_spiked(std::size_t l, std::vector<double> leading, Matrix basis);

/// Checks the anomaly against the model (and against the detector's k when given).
void validate_anomaly(const SpikedModel& model, const AnomalySpec& anomaly,
                      std::optional<std::size_t> k = std::nullopt);

/// The ambient mean vector mu of the alternative.
Vector anomaly_mean(const SpikedModel& model, const AnomalySpec& anomaly);

/// Draws one X ~ N(mu, Sigma) into `out` (length l) using
/// X = Z + sum_i sqrt(sigma_i - 1) g_i v_i + mu. Consumes l normals for Z, then m for g.
void sample_x_into(const SpikedModel& model, const Vector* mean, NormalRng& rng,
                   Eigen::Ref<Vector> out);

/// `count` independent rows from N(mu, Sigma); count = 0 gives an empty matrix.
RowMatrix sample_x(const SpikedModel& model, const std::optional<AnomalySpec>& anomaly,
                   std::size_t count, NormalRng& rng);

}  // namespace cpca

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

#include <vector>

#include "cpca/model.hpp"
#include "cpca/projection.hpp"

namespace cpca {

enum class CovarianceSource { Exact, SampleEstimate };

/// A p x p compressed covariance, either Sigma* = (1/p) Phi^T Sigma Phi or the
/// sample estimate from n projected observations. Symmetrized on construction.
struct CompressedCovariance {
    Matrix matrix;
    CovarianceSource source = CovarianceSource::Exact;
    std::size_t samples = 0;  // n, only for SampleEstimate

    std::size_t p() const noexcept { return static_cast<std::size_t>(matrix.rows()); }
};

CompressedCovariance make_covariance(Matrix matrix, CovarianceSource source, std::size_t samples = 0);

/// Sigma* = (1/p) Phi^T Phi + (1/p) sum_i (sigma_i - 1) w_i w_i^T with w_i = Phi^T v_i.
/// Never forms the l x l covariance.
CompressedCovariance exact_compressed_covariance(const SpikedModel& model, const ProjectionMatrix& phi);

/// (1/n) (Y - Ybar)^T (Y - Ybar) for n rows of Y; requires n >= 2.
CompressedCovariance sample_compressed_covariance(const Eigen::Ref<const RowMatrix>& y);

/// Full symmetric eigensystem, eigenvalues descending, each eigenvector with its
/// largest-magnitude entry positive (ties go to the lowest index).
struct EigenSystem {
    Vector values;
    Matrix vectors;
};

EigenSystem full_eigensystem(const CompressedCovariance& cov);

/// Leading-k PCA subspace of a compressed covariance.
///
/// `eigenvalues` holds all p eigenvalues when built by `eigendecompose`, and only
/// the leading k when built by `eigendecompose_leading`; the tail sums are
/// populated either way.
struct SubspaceModel {
    std::size_t p = 0;
    std::size_t k = 0;
    Vector eigenvalues;
    Matrix basis;  // p x k
    double tail_sum = 0.0;
    double tail_sq_sum = 0.0;

    bool complete() const noexcept { return static_cast<std::size_t>(eigenvalues.size()) == p; }

    /// M = I - U_k U_k^T (p x p).
    Matrix residual_projector() const;
};

/// Full decomposition; requires 1 <= k < p.
SubspaceModel eigendecompose(const CompressedCovariance& cov, std::size_t k);

/// Leading k eigenpairs only (LAPACK dsyevr by index range). Tail sums come from
/// tr(C) and ||C||_F^2 minus the leading terms.
SubspaceModel eigendecompose_leading(const CompressedCovariance& cov, std::size_t k);

struct InflationRow {
    double sigma = 0.0;
    double predicted = 0.0;
    double observed = 0.0;
    double z_score = 0.0;
};

/// Compares the leading compressed eigenvalues with the spiked-model limit
/// sigma (1 + c / (sigma - 1)) and its sqrt(p)-scaled normal fluctuation
/// 2 sigma^2 (1 - c / (sigma - 1)^2). Every spike must exceed 1 + sqrt(c).
std::vector<InflationRow> eigenvalue_inflation_check(const SpikedModel& model, const SubspaceModel& sub,
                                                      double c);

}  // namespace cpca

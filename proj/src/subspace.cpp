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

#include "cpca/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <lapacke.h>

#include "cpca/error.hpp"
#include "cpca/kernels.hpp"

extern "C" void openblas_set_num_threads(int) __attribute__((weak));

namespace cpca {

namespace {

using Index = Eigen::Index;

// LAPACK results must not depend on a BLAS thread pool.
void pin_blas_threads() {
    static const bool once = [] {
        if (openblas_set_num_threads) openblas_set_num_threads(1);
        return true;
    }();
    (void)once;
}

void normalize_signs(Matrix& vectors) {
    for (Index j = 0; j < vectors.cols(); ++j) {
        Index best = 0;
        double best_abs = -1.0;
        for (Index i = 0; i < vectors.rows(); ++i) {
            const double a = std::abs(vectors(i, j));
            if (a > best_abs) {
                best_abs = a;
                best = i;
            }
        }
        if (vectors(best, j) < 0.0) vectors.col(j) *= -1.0;
    }
}

std::string diagnostics(const Matrix& m) {
    std::ostringstream msg;
    msg << "p=" << m.rows() << ", frobenius=" << m.norm() << ", diag range=[" << m.diagonal().minCoeff()
        << ", " << m.diagonal().maxCoeff() << "], finite=" << (m.allFinite() ? "yes" : "no");
    return msg.str();
}

void check_k(std::size_t k, std::size_t p) {
    if (k == 0 || k >= p) {
        std::ostringstream msg;
        msg << "retained components k=" << k << " must satisfy 1 <= k < p=" << p;
        throw ValidationError(msg.str());
    }
}

}  // namespace

CompressedCovariance make_covariance(Matrix matrix, CovarianceSource source, std::size_t samples) {
    if (matrix.rows() != matrix.cols()) throw ValidationError("covariance must be square");
    Matrix sym = 0.5 * (matrix + matrix.transpose());
    return CompressedCovariance{std::move(sym), source, samples};
}

CompressedCovariance exact_compressed_covariance(const SpikedModel& model, const ProjectionMatrix& phi) {
    if (model.l != phi.l) {
        std::ostringstream msg;
        msg << "model dimension l=" << model.l << " differs from projection l=" << phi.l;
        throw ValidationError(msg.str());
    }
    const double inv_p = 1.0 / static_cast<double>(phi.p);
    Matrix sigma = kernels::gram(phi.entries);
    if (model.m() > 0) {
        // w_i = Phi^T v_i as columns of W (p x m)
        Matrix w;
        if (model.basis)
            w = phi.entries.transpose() * *model.basis;
        else
            w = phi.entries.topRows(static_cast<Index>(model.m())).transpose();
        Vector weights(static_cast<Index>(model.m()));
        for (std::size_t i = 0; i < model.m(); ++i) weights(static_cast<Index>(i)) = model.leading[i] - 1.0;
        sigma.noalias() += w * weights.asDiagonal() * w.transpose();
    }
    sigma *= inv_p;
    return make_covariance(std::move(sigma), CovarianceSource::Exact);
}

CompressedCovariance sample_compressed_covariance(const Eigen::Ref<const RowMatrix>& y) {
    const auto n = static_cast<std::size_t>(y.rows());
    if (n < 2) {
        std::ostringstream msg;
        msg << "sample covariance needs at least 2 observations, got " << n;
        throw ValidationError(msg.str());
    }
    const Eigen::RowVectorXd mean = y.colwise().mean();
    const RowMatrix centred = y.rowwise() - mean;
    Matrix s = kernels::gram(centred);
    s /= static_cast<double>(n);
    return make_covariance(std::move(s), CovarianceSource::SampleEstimate, n);
}

EigenSystem full_eigensystem(const CompressedCovariance& cov) {
    pin_blas_threads();
    const Index p = cov.matrix.rows();
    Matrix a = cov.matrix;
    Vector w(p);
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', static_cast<lapack_int>(p), a.data(),
                                           static_cast<lapack_int>(p), w.data());
    if (info != 0) {
        std::ostringstream msg;
        msg << "symmetric eigensolver failed (info=" << info << "); " << diagnostics(cov.matrix);
        throw NumericError(msg.str(), "EIGEN_FAILED");
    }
    EigenSystem sys{w.reverse(), a.rowwise().reverse()};
    normalize_signs(sys.vectors);
    return sys;
}

SubspaceModel eigendecompose(const CompressedCovariance& cov, std::size_t k) {
    const std::size_t p = cov.p();
    check_k(k, p);
    EigenSystem sys = full_eigensystem(cov);
    const double top = std::max(std::abs(sys.values(0)), std::abs(sys.values(static_cast<Index>(p) - 1)));
    const double floor = -1e-8 * top;
    if (sys.values(static_cast<Index>(p) - 1) < floor) {
        std::ostringstream msg;
        msg << "covariance is not positive semidefinite: smallest eigenvalue "
            << sys.values(static_cast<Index>(p) - 1) << " below " << floor;
        throw NumericError(msg.str(), "NOT_PSD");
    }
    SubspaceModel sub;
    sub.p = p;
    sub.k = k;
    sub.basis = sys.vectors.leftCols(static_cast<Index>(k));
    for (std::size_t i = k; i < p; ++i) {
        const double v = sys.values(static_cast<Index>(i));
        sub.tail_sum += v;
        const double clamped = std::max(0.0, v);
        sub.tail_sq_sum += clamped * clamped;
    }
    sub.eigenvalues = std::move(sys.values);
    return sub;
}

SubspaceModel eigendecompose_leading(const CompressedCovariance& cov, std::size_t k) {
    pin_blas_threads();
    const std::size_t p = cov.p();
    check_k(k, p);
    const auto n = static_cast<lapack_int>(p);
    Matrix a = cov.matrix;
    Vector w(static_cast<Index>(p));
    Matrix z(static_cast<Index>(p), static_cast<Index>(k));
    std::vector<lapack_int> support(2 * k);
    lapack_int found = 0;
    const lapack_int info =
        LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'L', n, a.data(), n, 0.0, 0.0,
                       n - static_cast<lapack_int>(k) + 1, n, 0.0, &found, w.data(), z.data(), n,
                       support.data());
    if (info != 0 || found != static_cast<lapack_int>(k)) {
        std::ostringstream msg;
        msg << "partial symmetric eigensolver failed (info=" << info << ", found=" << found << " of " << k
            << "); " << diagnostics(cov.matrix);
        throw NumericError(msg.str(), "EIGEN_FAILED");
    }
    SubspaceModel sub;
    sub.p = p;
    sub.k = k;
    sub.eigenvalues = w.head(static_cast<Index>(k)).reverse();
    sub.basis = z.rowwise().reverse();
    normalize_signs(sub.basis);
    sub.tail_sum = cov.matrix.trace() - sub.eigenvalues.sum();
    sub.tail_sq_sum = std::max(0.0, cov.matrix.squaredNorm() - sub.eigenvalues.squaredNorm());
    return sub;
}

Matrix SubspaceModel::residual_projector() const {
    const auto n = static_cast<Index>(p);
    Matrix m = Matrix::Identity(n, n);
    m.noalias() -= basis * basis.transpose();
    return m;
}

std::vector<InflationRow> eigenvalue_inflation_check(const SpikedModel& model, const SubspaceModel& sub,
                                                      double c) {
    if (!(c >= 0.0)) throw ValidationError("compression ratio c must be >= 0");
    if (static_cast<std::size_t>(sub.eigenvalues.size()) < model.m())
        throw ValidationError("subspace model holds fewer eigenvalues than the model has spikes");
    const double edge = 1.0 + std::sqrt(c);
    for (std::size_t v = 0; v < model.m(); ++v) {
        if (!(model.leading[v] > edge)) {
            std::ostringstream msg;
            msg << "spike #" << v << " sigma=" << model.leading[v] << " does not exceed 1 + sqrt(c) = " << edge;
            throw ValidationError(msg.str(), "SPIKE_BELOW_THRESHOLD");
        }
    }
    const double root_p = std::sqrt(static_cast<double>(sub.p));
    std::vector<InflationRow> rows;
    for (std::size_t v = 0; v < model.m(); ++v) {
        const double s = model.leading[v];
        const double shift = s - 1.0;
        InflationRow row;
        row.sigma = s;
        row.predicted = s * (1.0 + c / shift);
        row.observed = sub.eigenvalues(static_cast<Index>(v));
        const double sd = std::sqrt(2.0 * s * s * (1.0 - c / (shift * shift)));
        row.z_score = root_p * (row.observed - row.predicted) / sd;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace cpca

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

#include "cpca/model.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "cpca/error.hpp"

namespace cpca {

namespace {

void validate_spectrum(std::size_t l, const std::vector<double>& leading) {
    if (l == 0) throw ValidationError("ambient dimension l must be positive");
    if (leading.size() >= l) {
        std::ostringstream msg;
        msg << "number of spikes m=" << leading.size() << " must be smaller than l=" << l;
        throw ValidationError(msg.str());
    }
    for (std::size_t i = 0; i < leading.size(); ++i) {
        if (!std::isfinite(leading[i]) || leading[i] <= 1.0) {
            std::ostringstream msg;
            msg << "leading eigenvalue #" << i << " = " << leading[i] << " must be finite and > 1";
            throw ValidationError(msg.str());
        }
        if (i > 0 && leading[i] >= leading[i - 1]) {
            std::ostringstream msg;
            msg << "leading eigenvalues must be strictly decreasing: entry #" << i << " = "
                << leading[i] << " follows " << leading[i - 1];
            throw ValidationError(msg.str());
        }
    }
}

}  // namespace

double SpikedModel::trace() const noexcept {
    return static_cast<double>(l - m()) + std::accumulate(leading.begin(), leading.end(), 0.0);
}

Matrix SpikedModel::eigenvectors(std::size_t count) const {
    if (count > l) throw ValidationError("requested more eigenvectors than the dimension");
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(count));
    if (!basis) {
        for (std::size_t j = 0; j < count; ++j) out(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = 1.0;
        return out;
    }
    const auto have = std::min<std::size_t>(count, m());
    out.leftCols(static_cast<Eigen::Index>(have)) = basis->leftCols(static_cast<Eigen::Index>(have));
    std::size_t filled = have;
    // complete with axes orthogonalized against what is already there (two passes)
    for (std::size_t axis = 0; axis < l && filled < count; ++axis) {
        Vector v = Vector::Unit(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(axis));
        const auto cur = out.leftCols(static_cast<Eigen::Index>(filled));
        for (int pass = 0; pass < 2; ++pass) v -= cur * (cur.transpose() * v);
        const double norm = v.norm();
        if (norm < 1e-6) continue;
        out.col(static_cast<Eigen::Index>(filled++)) = v / norm;
    }
    return out;
}

Matrix SpikedModel::dense_covariance() const {
    const auto n = static_cast<Eigen::Index>(l);
    Matrix sigma = Matrix::Identity(n, n);
    const Matrix v = eigenvectors(m());
    for (std::size_t i = 0; i < m(); ++i) {
        const auto col = v.col(static_cast<Eigen::Index>(i));
        sigma.noalias() += (leading[i] - 1.0) * col * col.transpose();
    }
    return sigma;
}

SpikedModel make_spiked(std::size_t l, std::vector<double> leading) {
    validate_spectrum(l, leading);
    return SpikedModel{l, std::move(leading), std::nullopt};
}

SpikedModel make_spiked(std::size_t l, std::vector<double> leading, Matrix basis) {
    validate_spectrum(l, leading);
    if (static_cast<std::size_t>(basis.rows()) != l || static_cast<std::size_t>(basis.cols()) != leading.size()) {
        std::ostringstream msg;
        msg << "basis must be " << l << " x " << leading.size() << ", got " << basis.rows() << " x "
            << basis.cols();
        throw ValidationError(msg.str());
    }
    const Matrix gram = basis.transpose() * basis;
    const double dev =
        (gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    if (basis.cols() > 0 && dev > 1e-10) {
        std::ostringstream msg;
        msg << "basis columns are not orthonormal (max |V^T V - I| = " << dev << ")";
        throw ValidationError(msg.str());
    }
    return SpikedModel{l, std::move(leading), std::move(basis)};
}

void validate_anomaly(const SpikedModel& model, const AnomalySpec& anomaly,
                      std::optional<std::size_t> k) {
    if (!std::isfinite(anomaly.gamma) || anomaly.gamma < 0.0)
        throw ValidationError("anomaly gamma must be finite and >= 0");
    if (anomaly.d + 1 > model.l) {
        std::ostringstream msg;
        msg << "anomaly index d=" << anomaly.d << " needs d+1 <= l=" << model.l;
        throw ValidationError(msg.str());
    }
    if (k && anomaly.d <= *k) {
        std::ostringstream msg;
        msg << "anomaly index d=" << anomaly.d << " must exceed the retained components k=" << *k;
        throw ValidationError(msg.str());
    }
}

Vector anomaly_mean(const SpikedModel& model, const AnomalySpec& anomaly) {
    validate_anomaly(model, anomaly);
    const auto l = static_cast<Eigen::Index>(model.l);
    if (!model.basis) {
        Vector mu = Vector::Zero(l);
        mu(static_cast<Eigen::Index>(anomaly.d)) = anomaly.gamma;
        return mu;
    }
    const Matrix v = model.eigenvectors(anomaly.d + 1);
    return anomaly.gamma * v.col(static_cast<Eigen::Index>(anomaly.d));
}

void sample_x_into(const SpikedModel& model, const Vector* mean, NormalRng& rng,
                   Eigen::Ref<Vector> out) {
    const auto l = static_cast<Eigen::Index>(model.l);
    for (Eigen::Index i = 0; i < l; ++i) out(i) = rng.normal();
    for (std::size_t i = 0; i < model.m(); ++i) {
        const double g = std::sqrt(model.leading[i] - 1.0) * rng.normal();
        if (model.basis)
            out.noalias() += g * model.basis->col(static_cast<Eigen::Index>(i));
        else
            out(static_cast<Eigen::Index>(i)) += g;
    }
    if (mean) out += *mean;
}

RowMatrix sample_x(const SpikedModel& model, const std::optional<AnomalySpec>& anomaly,
                   std::size_t count, NormalRng& rng) {
    std::optional<Vector> mu;
    if (anomaly) mu = anomaly_mean(model, *anomaly);
    RowMatrix x(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(model.l));
    Vector row(static_cast<Eigen::Index>(model.l));
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        sample_x_into(model, mu ? &*mu : nullptr, rng, row);
        x.row(r) = row.transpose();
    }
    return x;
}

}  // namespace cpca

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

#include "cpca/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <omp.h>

#include "cpca/error.hpp"

namespace cpca::kernels {

namespace {

using Index = Eigen::Index;

Index block_count(Index n, Index block) { return (n + block - 1) / block; }

void check_seed_fn(const SeedFn& seed_of) {
    if (!seed_of) throw ValidationError("missing seed function");
}

}  // namespace

void set_workers(int n) { omp_set_num_threads(std::max(1, n)); }

int workers() { return omp_get_max_threads(); }

Matrix gram(const Eigen::Ref<const RowMatrix>& a) {
    const Index n = a.cols();
    Matrix g(n, n);
    const Index tiles = block_count(n, kGramTile);
    std::vector<std::pair<Index, Index>> work;
    for (Index i = 0; i < tiles; ++i)
        for (Index j = i; j < tiles; ++j) work.emplace_back(i, j);

#pragma omp parallel for schedule(dynamic)
    for (std::size_t w = 0; w < work.size(); ++w) {
        const auto [ti, tj] = work[w];
        const Index i0 = ti * kGramTile, j0 = tj * kGramTile;
        const Index ni = std::min(kGramTile, n - i0), nj = std::min(kGramTile, n - j0);
        g.block(i0, j0, ni, nj).noalias() = a.middleCols(i0, ni).transpose() * a.middleCols(j0, nj);
        if (ti != tj)
            g.block(j0, i0, nj, ni) = g.block(i0, j0, ni, nj).transpose();
        else
            g.block(i0, i0, ni, ni).triangularView<Eigen::StrictlyLower>() =
                g.block(i0, i0, ni, ni).transpose();
    }
    return g;
}

RowMatrix multiply_rows(const Eigen::Ref<const RowMatrix>& x, const Eigen::Ref<const RowMatrix>& b,
                        double scale) {
    if (x.cols() != b.rows()) throw ValidationError("multiply_rows: inner dimensions differ");
    RowMatrix out(x.rows(), b.cols());
    const Index blocks = block_count(x.rows(), kRowBlock);

#pragma omp parallel for schedule(dynamic)
    for (Index blk = 0; blk < blocks; ++blk) {
        const Index r0 = blk * kRowBlock, nr = std::min(kRowBlock, x.rows() - r0);
        auto dst = out.middleRows(r0, nr);
        dst.noalias() = x.middleRows(r0, nr) * b;
        dst *= scale;
    }
    return out;
}

void residual_norms(const Matrix& basis, const Eigen::Ref<const RowMatrix>& y, std::span<double> out) {
    if (y.cols() != basis.rows()) throw ValidationError("residual_norms: dimension mismatch");
    if (out.size() != static_cast<std::size_t>(y.rows()))
        throw ValidationError("residual_norms: output length mismatch");
    const Index blocks = block_count(y.rows(), kRowBlock);

#pragma omp parallel for schedule(dynamic)
    for (Index blk = 0; blk < blocks; ++blk) {
        const Index r0 = blk * kRowBlock, nr = std::min(kRowBlock, y.rows() - r0);
        const RowMatrix coords = y.middleRows(r0, nr) * basis;
        for (Index r = 0; r < nr; ++r) {
            const double q = y.row(r0 + r).squaredNorm() - coords.row(r).squaredNorm();
            out[static_cast<std::size_t>(r0 + r)] = std::max(0.0, q);
        }
    }
}

RowMatrix draw_direct(const Matrix& lower, const Vector* mean, const SeedFn& seed_of,
                      std::size_t count) {
    check_seed_fn(seed_of);
    const Index p = lower.rows();
    const auto n = static_cast<Index>(count);
    RowMatrix out(n, p);
    const Index blocks = block_count(n, kRowBlock);

#pragma omp parallel for schedule(dynamic)
    for (Index blk = 0; blk < blocks; ++blk) {
        const Index r0 = blk * kRowBlock, nr = std::min(kRowBlock, n - r0);
        Matrix z(p, nr);
        for (Index r = 0; r < nr; ++r) {
            NormalRng rng(seed_of(static_cast<std::size_t>(r0 + r)));
            rng.fill({z.col(r).data(), static_cast<std::size_t>(p)});
        }
        const Matrix y = lower.triangularView<Eigen::Lower>() * z;
        out.middleRows(r0, nr) = y.transpose();
        if (mean) out.middleRows(r0, nr).rowwise() += mean->transpose();
    }
    return out;
}

RowMatrix draw_ambient(const SpikedModel& model, const Vector* ambient_mean,
                       const ProjectionMatrix& phi, const SeedFn& seed_of, std::size_t count) {
    check_seed_fn(seed_of);
    if (model.l != phi.l) throw ValidationError("draw_ambient: model and projection disagree on l");
    const auto l = static_cast<Index>(model.l);
    const auto p = static_cast<Index>(phi.p);
    const auto n = static_cast<Index>(count);
    const double scale = 1.0 / std::sqrt(static_cast<double>(phi.p));
    RowMatrix out(n, p);
    const Index blocks = block_count(n, kRowBlock);

#pragma omp parallel for schedule(dynamic)
    for (Index blk = 0; blk < blocks; ++blk) {
        const Index r0 = blk * kRowBlock, nr = std::min(kRowBlock, n - r0);
        RowMatrix x(nr, l);
        for (Index r = 0; r < nr; ++r) {
            NormalRng rng(seed_of(static_cast<std::size_t>(r0 + r)));
            sample_x_into(model, ambient_mean, rng, x.row(r).transpose());
        }
        auto dst = out.middleRows(r0, nr);
        dst.noalias() = x * phi.entries;
        dst *= scale;
    }
    return out;
}

namespace serial {

Matrix gram(const Eigen::Ref<const RowMatrix>& a) {
    const Index n = a.cols();
    Matrix g = Matrix::Zero(n, n);
    for (Index r = 0; r < a.rows(); ++r)
        for (Index i = 0; i < n; ++i) {
            const double ai = a(r, i);
            for (Index j = i; j < n; ++j) g(i, j) += ai * a(r, j);
        }
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < i; ++j) g(i, j) = g(j, i);
    return g;
}

RowMatrix multiply_rows(const Eigen::Ref<const RowMatrix>& x, const Eigen::Ref<const RowMatrix>& b,
                        double scale) {
    if (x.cols() != b.rows()) throw ValidationError("multiply_rows: inner dimensions differ");
    RowMatrix out = RowMatrix::Zero(x.rows(), b.cols());
    for (Index r = 0; r < x.rows(); ++r)
        for (Index i = 0; i < x.cols(); ++i) {
            const double xi = x(r, i);
            for (Index j = 0; j < b.cols(); ++j) out(r, j) += xi * b(i, j);
        }
    return out * scale;
}

void residual_norms(const Matrix& basis, const Eigen::Ref<const RowMatrix>& y, std::span<double> out) {
    if (y.cols() != basis.rows()) throw ValidationError("residual_norms: dimension mismatch");
    if (out.size() != static_cast<std::size_t>(y.rows()))
        throw ValidationError("residual_norms: output length mismatch");
    // explicit projector y^T (I - U U^T) y
    const Matrix proj = Matrix::Identity(basis.rows(), basis.rows()) - basis * basis.transpose();
    for (Index r = 0; r < y.rows(); ++r) {
        double q = 0.0;
        for (Index i = 0; i < y.cols(); ++i) {
            double row = 0.0;
            for (Index j = 0; j < y.cols(); ++j) row += proj(i, j) * y(r, j);
            q += y(r, i) * row;
        }
        out[static_cast<std::size_t>(r)] = std::max(0.0, q);
    }
}

RowMatrix draw_direct(const Matrix& lower, const Vector* mean, const SeedFn& seed_of,
                      std::size_t count) {
    check_seed_fn(seed_of);
    const Index p = lower.rows();
    RowMatrix out(static_cast<Index>(count), p);
    std::vector<double> z(static_cast<std::size_t>(p));
    for (std::size_t t = 0; t < count; ++t) {
        NormalRng rng(seed_of(t));
        rng.fill(z);
        for (Index i = 0; i < p; ++i) {
            double v = 0.0;
            for (Index j = 0; j <= i; ++j) v += lower(i, j) * z[static_cast<std::size_t>(j)];
            out(static_cast<Index>(t), i) = v + (mean ? (*mean)(i) : 0.0);
        }
    }
    return out;
}

RowMatrix draw_ambient(const SpikedModel& model, const Vector* ambient_mean,
                       const ProjectionMatrix& phi, const SeedFn& seed_of, std::size_t count) {
    check_seed_fn(seed_of);
    if (model.l != phi.l) throw ValidationError("draw_ambient: model and projection disagree on l");
    const auto l = static_cast<Index>(model.l);
    const auto p = static_cast<Index>(phi.p);
    const double scale = 1.0 / std::sqrt(static_cast<double>(phi.p));
    RowMatrix out = RowMatrix::Zero(static_cast<Index>(count), p);
    Vector x(l);
    for (std::size_t t = 0; t < count; ++t) {
        NormalRng rng(seed_of(t));
        sample_x_into(model, ambient_mean, rng, x);
        for (Index i = 0; i < l; ++i)
            for (Index j = 0; j < p; ++j) out(static_cast<Index>(t), j) += x(i) * phi.entries(i, j);
    }
    return out * scale;
}

}  // namespace serial

}  // namespace cpca::kernels

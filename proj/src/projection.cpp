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

#include "cpca/projection.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cpca/error.hpp"
#include "cpca/kernels.hpp"

namespace cpca {

ProjectionMatrix generate_projection(std::size_t l, std::size_t p, std::uint64_t seed) {
    if (p == 0 || p > l) {
        std::ostringstream msg;
        msg << "projection needs l >= p >= 1, got l=" << l << ", p=" << p;
        throw ValidationError(msg.str());
    }
    ProjectionMatrix phi{l, p, seed, RowMatrix(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(p))};
    NormalRng rng(seed);
    rng.fill({phi.entries.data(), static_cast<std::size_t>(phi.entries.size())});
    return phi;
}

ProjectionMatrix projection_from_entries(RowMatrix entries, std::uint64_t seed) {
    const auto l = static_cast<std::size_t>(entries.rows());
    const auto p = static_cast<std::size_t>(entries.cols());
    if (p == 0 || p > l) {
        std::ostringstream msg;
        msg << "projection needs l >= p >= 1, got l=" << l << ", p=" << p;
        throw ValidationError(msg.str());
    }
    return ProjectionMatrix{l, p, seed, std::move(entries)};
}

Vector project(const ProjectionMatrix& phi, const Eigen::Ref<const Vector>& x) {
    if (static_cast<std::size_t>(x.size()) != phi.l) {
        std::ostringstream msg;
        msg << "project: vector has length " << x.size() << ", projection expects l=" << phi.l;
        throw ValidationError(msg.str());
    }
    Vector y = phi.entries.transpose() * x;
    y /= std::sqrt(static_cast<double>(phi.p));
    return y;
}

RowMatrix project_rows(const ProjectionMatrix& phi, const Eigen::Ref<const RowMatrix>& x) {
    if (static_cast<std::size_t>(x.cols()) != phi.l) {
        std::ostringstream msg;
        msg << "project: rows have length " << x.cols() << ", projection expects l=" << phi.l;
        throw ValidationError(msg.str());
    }
    return kernels::multiply_rows(x, phi.entries, 1.0 / std::sqrt(static_cast<double>(phi.p)));
}

double gram_identity_check(const ProjectionMatrix& phi) {
    const auto rows = std::min<Eigen::Index>(100, static_cast<Eigen::Index>(phi.l));
    const auto head = phi.entries.topRows(rows);
    Matrix g = head * head.transpose();
    g /= static_cast<double>(phi.p);
    return (g - Matrix::Identity(rows, rows)).cwiseAbs().maxCoeff();
}

}  // namespace cpca

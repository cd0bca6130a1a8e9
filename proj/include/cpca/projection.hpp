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

#include "cpca/model.hpp"

namespace cpca {

/// Gaussian random projection Phi (l x p, i.i.d. N(0,1), row-major).
///
/// Entries are unit variance; the 1/sqrt(p) factor is applied by `project` and by
/// the covariance builders, never stored.
struct ProjectionMatrix {
    std::size_t l = 0;
    std::size_t p = 0;
    std::uint64_t seed = 0;
    RowMatrix entries;

    /// Compression ratio l/p.
    double c() const noexcept { return static_cast<double>(l) / static_cast<double>(p); }
};

/// Fills Phi row by row (row 0 first, columns in order) from NormalRng(seed).
ProjectionMatrix generate_projection(std::size_t l, std::size_t p, std::uint64_t seed);

/// Wraps caller-provided entries (test doubles, reloaded artifacts).
ProjectionMatrix projection_from_entries(RowMatrix entries, std::uint64_t seed = 0);

/// y = p^{-1/2} Phi^T x.
Vector project(const ProjectionMatrix& phi, const Eigen::Ref<const Vector>& x);

/// Row-aligned batch version: Y = p^{-1/2} X Phi for X of shape n x l.
RowMatrix project_rows(const ProjectionMatrix& phi, const Eigen::Ref<const RowMatrix>& x);

/// max |(1/p) Phi Phi^T - I| over the leading min(100, l) x min(100, l) block.
double gram_identity_check(const ProjectionMatrix& phi);

}  // namespace cpca

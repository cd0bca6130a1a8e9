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
#include <functional>
#include <span>

#include "cpca/model.hpp"
#include "cpca/projection.hpp"

// Dense kernels behind the projection, covariance and Monte Carlo code.
//
// The default versions parallelize with OpenMP over a fixed partition of the
// output (tiles of columns or blocks of rows whose size does not depend on the
// thread count). Each work unit is evaluated serially, so results are bit-identical
// for any number of workers. The `serial` namespace keeps plain loop
// implementations used as references in tests and in the benchmark.
namespace cpca::kernels {

/// Rows per work unit for the row-blocked kernels.
inline constexpr Eigen::Index kRowBlock = 64;
/// Edge length of the square output tiles of `gram`.
inline constexpr Eigen::Index kGramTile = 128;

/// Maps a sample index to the seed of its private generator.
using SeedFn = std::function<std::uint64_t(std::size_t)>;

void set_workers(int n);
int workers();

/// A^T A for A of shape rows x cols.
Matrix gram(const Eigen::Ref<const RowMatrix>& a);

/// scale * X B, row-blocked.
RowMatrix multiply_rows(const Eigen::Ref<const RowMatrix>& x, const Eigen::Ref<const RowMatrix>& b,
                        double scale);

/// Per row y of Y: ||y||^2 - ||U^T y||^2, clamped at 0.
void residual_norms(const Matrix& basis, const Eigen::Ref<const RowMatrix>& y, std::span<double> out);

/// `count` rows y_t = L z_t + mean with z_t drawn from NormalRng(seed_of(t)).
RowMatrix draw_direct(const Matrix& lower, const Vector* mean, const SeedFn& seed_of,
                      std::size_t count);

/// `count` rows y_t = p^{-1/2} Phi^T x_t with x_t = sample_x_into(model, mean, NormalRng(seed_of(t))).
RowMatrix draw_ambient(const SpikedModel& model, const Vector* ambient_mean,
                       const ProjectionMatrix& phi, const SeedFn& seed_of, std::size_t count);

namespace serial {

Matrix gram(const Eigen::Ref<const RowMatrix>& a);
RowMatrix multiply_rows(const Eigen::Ref<const RowMatrix>& x, const Eigen::Ref<const RowMatrix>& b,
                        double scale);
void residual_norms(const Matrix& basis, const Eigen::Ref<const RowMatrix>& y, std::span<double> out);
RowMatrix draw_direct(const Matrix& lower, const Vector* mean, const SeedFn& seed_of,
                      std::size_t count);
RowMatrix draw_ambient(const SpikedModel& model, const Vector* ambient_mean,
                       const ProjectionMatrix& phi, const SeedFn& seed_of, std::size_t count);

}  // namespace serial

}  // namespace cpca::kernels

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

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace cpca {

/// Arguments of the closed-form power approximations.
struct PowerQuery {
    std::size_t l = 0;
    std::size_t k = 0;
    double alpha = 0.05;
    double gamma = 0.0;
    double c = 0.0;
};

void validate(const PowerQuery& query);

enum class PowerKind { Uncompressed, Compressed, CompressedEstimated };

/// (z_{1-a} sqrt(2(l-k)) - gamma^2) / sqrt(2(l-k) + 4 gamma^2).
double critical_value_q(const PowerQuery& query);

/// The same quantity written as
/// z_{1-a} sqrt((l-k) / ((l-k) + 2 gamma^2)) - gamma^2 / sqrt(2(l-k) + 4 gamma^2).
/// Kept as an algebraic cross-check of critical_value_q.
double critical_value_q_factored(const PowerQuery& query);

/// (z_{1-a} sqrt(2(l-k)) - gamma^2 / sqrt(c+1)) / sqrt(2(l-k) + 4 gamma^2),
/// with the O_P(1) and O_P(p^{1/2}) corrections dropped.
double critical_value_qstar(const PowerQuery& query);

/// The estimated-covariance statistic has the same approximate critical value.
inline constexpr double (*critical_value_qhatstar)(const PowerQuery&) = &critical_value_qstar;

/// P(Z >= critical value). Compressed kinds use query.c; Uncompressed ignores it.
double power(const PowerQuery& query, PowerKind kind);

/// Compressed power at each c of the grid, in grid order. query.c is ignored.
std::vector<std::pair<double, double>> power_curve(PowerQuery query, std::span<const double> c_grid);

}  // namespace cpca

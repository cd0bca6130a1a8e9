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

#include "cpca/model.hpp"
#include "cpca/subspace.hpp"

namespace cpca {

/// Level-alpha residual test. `c` = 0 selects the uncompressed standardization.
struct TestConfig {
    std::size_t k = 0;
    double alpha = 0.05;
    std::size_t l = 0;
    double c = 0.0;

    /// z_{1-alpha}.
    double threshold() const;
};

/// Validates and returns the config.
TestConfig make_test_config(std::size_t k, double alpha, std::size_t l, double c);

enum class StatisticKind { Uncompressed, CompressedExact, CompressedEstimated };

struct DetectionOutcome {
    double statistic = 0.0;
    double standardized = 0.0;
    double threshold = 0.0;
    bool anomalous = false;
    StatisticKind kind = StatisticKind::CompressedExact;
};

/// ||y||^2 - ||U_k^T y||^2, clamped at 0.
double residual_statistic(const SubspaceModel& sub, const Eigen::Ref<const Vector>& y);

/// (q - (l - k)) / sqrt(2 (l - k) (c + 1)).
double standardize(double q, const TestConfig& cfg);

/// Diagnostic variant centred and scaled by the subspace's own tail moments:
/// (q - tail_sum) / sqrt(2 tail_sq_sum). Not used for decisions.
double standardize_empirical(double q, const SubspaceModel& sub);

/// Upper one-sided test; anomalous iff standardized > z_{1-alpha} (ties are not anomalous).
DetectionOutcome decide(double q, const TestConfig& cfg, StatisticKind kind = StatisticKind::CompressedExact);

/// Q = ||x||^2 - ||V_k^T x||^2 on the ambient observation.
double q_uncompressed(const SpikedModel& model, const Eigen::Ref<const Vector>& x, std::size_t k);

}  // namespace cpca

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

#include "cpca/detector.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cpca/error.hpp"
#include "cpca/normal.hpp"

namespace cpca {

double TestConfig::threshold() const { return upper_critical_value(alpha); }

TestConfig make_test_config(std::size_t k, double alpha, std::size_t l, double c) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
    if (k == 0 || k >= l) {
        std::ostringstream msg;
        msg << "test config needs 1 <= k < l, got k=" << k << ", l=" << l;
        throw ValidationError(msg.str());
    }
    if (!(c >= 0.0) || !std::isfinite(c)) throw ValidationError("compression ratio c must be finite and >= 0");
    return TestConfig{k, alpha, l, c};
}

double residual_statistic(const SubspaceModel& sub, const Eigen::Ref<const Vector>& y) {
    if (static_cast<std::size_t>(y.size()) != sub.p) {
        std::ostringstream msg;
        msg << "observation has length " << y.size() << ", subspace expects p=" << sub.p;
        throw ValidationError(msg.str());
    }
    const Vector coords = sub.basis.transpose() * y;
    return std::max(0.0, y.squaredNorm() - coords.squaredNorm());
}

double standardize(double q, const TestConfig& cfg) {
    const double dof = static_cast<double>(cfg.l - cfg.k);
    return (q - dof) / std::sqrt(2.0 * dof * (cfg.c + 1.0));
}

double standardize_empirical(double q, const SubspaceModel& sub) {
    return (q - sub.tail_sum) / std::sqrt(2.0 * sub.tail_sq_sum);
}

DetectionOutcome decide(double q, const TestConfig& cfg, StatisticKind kind) {
    DetectionOutcome out;
    out.statistic = q;
    out.standardized = standardize(q, cfg);
    out.threshold = cfg.threshold();
    out.anomalous = out.standardized > out.threshold;
    out.kind = kind;
    return out;
}

double q_uncompressed(const SpikedModel& model, const Eigen::Ref<const Vector>& x, std::size_t k) {
    if (k >= model.l) {
        std::ostringstream msg;
        msg << "k=" << k << " must be smaller than l=" << model.l;
        throw ValidationError(msg.str());
    }
    if (static_cast<std::size_t>(x.size()) != model.l) {
        std::ostringstream msg;
        msg << "observation has length " << x.size() << ", model expects l=" << model.l;
        throw ValidationError(msg.str());
    }
    if (!model.basis) return x.tail(x.size() - static_cast<Eigen::Index>(k)).squaredNorm();
    const Matrix v = model.eigenvectors(k);
    const Vector coords = v.transpose() * x;
    return std::max(0.0, x.squaredNorm() - coords.squaredNorm());
}

}  // namespace cpca

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

#include "cpca/power.hpp"

#include <cmath>
#include <sstream>

#include "cpca/error.hpp"
#include "cpca/normal.hpp"

namespace cpca {

void validate(const PowerQuery& query) {
    if (query.k == 0 || query.k >= query.l) {
        std::ostringstream msg;
        msg << "power query needs 1 <= k < l, got k=" << query.k << ", l=" << query.l;
        throw ValidationError(msg.str());
    }
    if (!(query.alpha > 0.0 && query.alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
    if (!(query.gamma >= 0.0) || !std::isfinite(query.gamma)) throw ValidationError("gamma must be finite and >= 0");
    if (!(query.c >= 0.0) || !std::isfinite(query.c)) throw ValidationError("c must be finite and >= 0");
}

namespace {

struct Terms {
    double z;
    double dof;     // l - k
    double shift;   // gamma^2
    double spread;  // sqrt(2(l-k) + 4 gamma^2)
};

Terms terms(const PowerQuery& query) {
    validate(query);
    const double dof = static_cast<double>(query.l - query.k);
    const double shift = query.gamma * query.gamma;
    return {upper_critical_value(query.alpha), dof, shift, std::sqrt(2.0 * dof + 4.0 * shift)};
}

}  // namespace

double critical_value_q(const PowerQuery& query) {
    const Terms t = terms(query);
    return (t.z * std::sqrt(2.0 * t.dof) - t.shift) / t.spread;
}

double critical_value_q_factored(const PowerQuery& query) {
    const Terms t = terms(query);
    return t.z * std::sqrt(t.dof / (t.dof + 2.0 * t.shift)) - t.shift / t.spread;
}

double critical_value_qstar(const PowerQuery& query) {
    const Terms t = terms(query);
    return (t.z * std::sqrt(2.0 * t.dof) - t.shift / std::sqrt(query.c + 1.0)) / t.spread;
}

double power(const PowerQuery& query, PowerKind kind) {
    switch (kind) {
        case PowerKind::Uncompressed:
            return normal_upper_tail(critical_value_q(query));
        case PowerKind::Compressed:
            return normal_upper_tail(critical_value_qstar(query));
        case PowerKind::CompressedEstimated:
            return normal_upper_tail(critical_value_qhatstar(query));
    }
    throw ValidationError("unknown power kind");
}

std::vector<std::pair<double, double>> power_curve(PowerQuery query, std::span<const double> c_grid) {
    if (c_grid.empty()) throw ValidationError("compression grid must not be empty");
    std::vector<std::pair<double, double>> curve;
    curve.reserve(c_grid.size());
    for (double c : c_grid) {
        query.c = c;
        curve.emplace_back(c, power(query, PowerKind::Compressed));
    }
    return curve;
}

}  // namespace cpca

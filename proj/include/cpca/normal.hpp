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

namespace cpca {

/// Standard normal CDF.
double normal_cdf(double x);

/// P(Z >= x), computed without cancellation for large x.
double normal_upper_tail(double x);

/// z with P(Z > z) = alpha, i.e. z_{1-alpha}.
double upper_critical_value(double alpha);

}  // namespace cpca

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
#include <initializer_list>
#include <random>
#include <span>

namespace cpca {

/// SplitMix64 finalizer (Steele, Lea & Flood). Used only for seed derivation.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives a child seed from a master seed and an index path:
///   h = splitmix64(master); for each x in path: h = splitmix64(h ^ splitmix64(x)).
/// Distinct paths give statistically independent streams, so work units can be
/// seeded without coordination.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept;

/// Gaussian generator: std::mt19937_64 feeding a Box-Muller transform.
///
/// Uniforms are u = (bits >> 11) * 2^-53. Each pair (u1, u2) with u1 mapped to
/// (0, 1] produces r = sqrt(-2 ln u1) and the two variates r cos(2 pi u2),
/// r sin(2 pi u2), returned in that order. The output sequence is a pure function
/// of the seed within one build.
class NormalRng {
public:
    explicit NormalRng(std::uint64_t seed) : engine_(seed) {}

    double normal();
    void fill(std::span<double> out);

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace cpca

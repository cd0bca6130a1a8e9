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

// Serial reference kernels against the OpenMP ones. Arg 0 of the parallel
// benchmarks is the worker count.

#include <benchmark/benchmark.h>

#include <vector>

#include "cpca/kernels.hpp"
#include "cpca/model.hpp"
#include "cpca/projection.hpp"
#include "cpca/rng.hpp"

using namespace cpca;

namespace {

RowMatrix gaussian(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    RowMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    NormalRng rng(seed);
    rng.fill({m.data(), static_cast<std::size_t>(m.size())});
    return m;
}

Matrix lower_factor(std::size_t p) {
    const RowMatrix a = gaussian(2 * p, p, 5);
    const Matrix s = a.transpose() * a / static_cast<double>(2 * p);
    return s.llt().matrixL();
}

Matrix orthonormal(std::size_t p, std::size_t k) {
    const RowMatrix a = gaussian(p, k, 6);
    return Eigen::HouseholderQR<Matrix>(Matrix(a)).householderQ() * Matrix::Identity(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(k));
}

const kernels::SeedFn kSeed = [](std::size_t t) { return derive_seed(11, {t}); };

void BM_gram_serial(benchmark::State& st) {
    const RowMatrix a = gaussian(5000, static_cast<std::size_t>(st.range(0)), 1);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::gram(a));
}

void BM_gram_omp(benchmark::State& st) {
    kernels::set_workers(static_cast<int>(st.range(0)));
    const RowMatrix a = gaussian(5000, static_cast<std::size_t>(st.range(1)), 1);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::gram(a));
    kernels::set_workers(1);
}

void BM_residual_serial(benchmark::State& st) {
    const Matrix u = orthonormal(500, 30);
    const RowMatrix y = gaussian(2000, 500, 2);
    std::vector<double> out(2000);
    for (auto _ : st) {
        kernels::serial::residual_norms(u, y, out);
        benchmark::DoNotOptimize(out.data());
    }
}

void BM_residual_omp(benchmark::State& st) {
    kernels::set_workers(static_cast<int>(st.range(0)));
    const Matrix u = orthonormal(500, 30);
    const RowMatrix y = gaussian(2000, 500, 2);
    std::vector<double> out(2000);
    for (auto _ : st) {
        kernels::residual_norms(u, y, out);
        benchmark::DoNotOptimize(out.data());
    }
    kernels::set_workers(1);
}

void BM_draw_direct_serial(benchmark::State& st) {
    const Matrix l = lower_factor(500);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::draw_direct(l, nullptr, kSeed, 2000));
}

void BM_draw_direct_omp(benchmark::State& st) {
    kernels::set_workers(static_cast<int>(st.range(0)));
    const Matrix l = lower_factor(500);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::draw_direct(l, nullptr, kSeed, 2000));
    kernels::set_workers(1);
}

void BM_draw_ambient_serial(benchmark::State& st) {
    const auto model = make_spiked(4000, {50, 40, 30, 20, 10});
    const auto phi = generate_projection(4000, 200, 3);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::serial::draw_ambient(model, nullptr, phi, kSeed, 200));
}

void BM_draw_ambient_omp(benchmark::State& st) {
    kernels::set_workers(static_cast<int>(st.range(0)));
    const auto model = make_spiked(4000, {50, 40, 30, 20, 10});
    const auto phi = generate_projection(4000, 200, 3);
    for (auto _ : st) benchmark::DoNotOptimize(kernels::draw_ambient(model, nullptr, phi, kSeed, 200));
    kernels::set_workers(1);
}

}  // namespace

BENCHMARK(BM_gram_serial)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_gram_omp)->ArgsProduct({{1, 2, 4}, {100, 500}})->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_residual_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_residual_omp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_draw_direct_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_draw_direct_omp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_draw_ambient_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_draw_ambient_omp)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();

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
#include <optional>
#include <span>
#include <vector>

#include "cpca/model.hpp"
#include "cpca/subspace.hpp"

namespace cpca {

enum class CovarianceMode { Exact, Estimated };
enum class SamplingMode { DirectCompressed, AmbientThenProject };

/// A seeded Monte Carlo campaign.
///
/// For each projection realization j the harness draws Phi_j, builds the
/// compressed covariance (exact, or the sample covariance of `training_samples`
/// anomaly-free projected draws), extracts the leading-k subspace, then evaluates
/// `trials_per_phi` test observations. Seeds come from `derive_seed(master_seed, ...)`:
///
///   Phi_j           {1, p, j}
///   training row i  {2, p, j, i}
///   trial t         {3, p, j, t}
///
/// so any unit of work can be recomputed on its own.
struct ExperimentPlan {
    SpikedModel model;
    std::size_t p = 0;
    std::size_t k = 0;
    double alpha = 0.05;
    std::optional<AnomalySpec> anomaly;
    std::size_t trials_per_phi = 0;
    std::size_t phi_realizations = 0;
    std::uint64_t master_seed = 0;
    CovarianceMode covariance_mode = CovarianceMode::Exact;
    std::size_t training_samples = 0;  // n, Estimated mode only
    SamplingMode sampling_mode = SamplingMode::DirectCompressed;

    double c() const noexcept { return static_cast<double>(model.l) / static_cast<double>(p); }
};

void validate(const ExperimentPlan& plan);

inline constexpr std::uint64_t kPhiStream = 1;
inline constexpr std::uint64_t kTrainingStream = 2;
inline constexpr std::uint64_t kTrialStream = 3;

/// Subspaces of covariances larger than this use the leading-k eigensolver.
inline constexpr std::size_t kFullEigenLimit = 1000;

struct PhiSummary {
    std::size_t phi_index = 0;
    std::uint64_t phi_seed = 0;
    double mean_qstar_over_p = 0.0;
    std::optional<double> var_ratio;  // sample variance (T-1 divisor) / 2(l-k); absent when T = 1
    double rejection_rate = 0.0;
    /// E(Q*|Phi)/p and Var(Q*|Phi)/2(l-k) under the null, from Sigma* and the
    /// subspace actually used: tr(M S) and 2 tr((M S)^2) with M = I - U_k U_k^T.
    double conditional_mean_over_p = 0.0;
    double conditional_var_ratio = 0.0;
    std::vector<double> leading_eigenvalues;  // top min(m, k) of the covariance used
};

struct ColumnStats {
    double mean = 0.0;
    std::optional<double> sd;  // sample SD across Phi; absent with fewer than 2 values
    std::size_t count = 0;
};

struct ExperimentAggregate {
    ColumnStats mean_qstar_over_p;
    ColumnStats var_ratio;
    ColumnStats rejection_rate;
    ColumnStats conditional_mean_over_p;
    ColumnStats conditional_var_ratio;
};

struct ExperimentTheory {
    double c = 0.0;
    double c_plus_1 = 0.0;
    std::optional<double> power;
};

struct ExperimentResult {
    std::size_t l = 0;
    std::size_t p = 0;
    std::size_t k = 0;
    std::size_t trials_per_phi = 0;
    std::vector<PhiSummary> per_phi;
    ExperimentAggregate aggregate;
    ExperimentTheory theory;
};

/// Fixed-order aggregation of the per-Phi rows.
ExperimentAggregate summarize(std::span<const PhiSummary> rows);

/// Runs the plan as given (null or alternative).
ExperimentResult run_experiment(const ExperimentPlan& plan);

/// Null-only entry point: rejects plans carrying a nonzero anomaly.
ExperimentResult run_null_experiment(const ExperimentPlan& plan);

/// Estimated-covariance entry point: requires CovarianceMode::Estimated and n >= p.
ExperimentResult run_estimated_covariance_experiment(const ExperimentPlan& plan);

struct PowerRow {
    double gamma = 0.0;
    double c = 0.0;  // l / p actually used
    std::size_t p = 0;
    double empirical_power = 0.0;
    double theory_power = 0.0;
    std::optional<double> sd_across_phi;
};

/// Empirical versus approximate power over a (gamma, c) grid. For each c the
/// compressed dimension is p = round(l / c); plan.p is ignored and plan.anomaly
/// supplies d (its gamma is replaced by the grid). Trials share their noise across
/// gamma values, and the projected anomaly p^{-1/2} Phi^T mu is added to the null draw.
std::vector<PowerRow> run_power_experiment(const ExperimentPlan& plan, std::span<const double> gamma_grid,
                                           std::span<const double> c_grid);

struct MeanComparison {
    double mean_a = 0.0;
    double mean_b = 0.0;
    double pooled_se = 0.0;
    double z = 0.0;
};

/// Two-sample z statistic on the trial-level mean of Q*/p of two runs.
MeanComparison compare_means(const ExperimentResult& a, const ExperimentResult& b);

struct SamplingEquivalence {
    ExperimentResult direct;
    ExperimentResult ambient;
    MeanComparison comparison;
    bool within_tolerance = false;  // |z| < 5
};

/// Runs the plan twice, once per sampling mode (small l only).
SamplingEquivalence equivalence_check_sampling_modes(ExperimentPlan plan);

}  // namespace cpca

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

#include "cpca/montecarlo.hpp"

#include <cmath>
#include <sstream>

#include "cpca/detector.hpp"
#include "cpca/error.hpp"
#include "cpca/kernels.hpp"
#include "cpca/power.hpp"
#include "cpca/projection.hpp"

namespace cpca {

namespace {

using Index = Eigen::Index;

void validate_dimensions(const ExperimentPlan& plan, std::size_t p) {
    if (p == 0 || p > plan.model.l) {
        std::ostringstream msg;
        msg << "compressed dimension p=" << p << " must satisfy 1 <= p <= l=" << plan.model.l;
        throw ValidationError(msg.str());
    }
    if (plan.k == 0 || plan.k >= p) {
        std::ostringstream msg;
        msg << "retained components k=" << plan.k << " must satisfy 1 <= k < p=" << p;
        throw ValidationError(msg.str());
    }
    if (plan.covariance_mode == CovarianceMode::Estimated && plan.training_samples < p) {
        std::ostringstream msg;
        msg << "estimated covariance needs n >= p training samples, got n=" << plan.training_samples
            << " < p=" << p;
        throw ValidationError(msg.str(), "ESTIMATION_UNDERSAMPLED");
    }
}

/// Everything that depends on one realization of Phi but not on the anomaly.
struct PhiContext {
    ProjectionMatrix phi;
    CompressedCovariance sigma_star;
    Matrix lower;  // Cholesky factor of Sigma*, DirectCompressed only
    SubspaceModel sub;
    CompressedCovariance used;  // covariance the subspace came from
};

Matrix cholesky_lower(const CompressedCovariance& cov) {
    Eigen::LLT<Matrix> llt(cov.matrix);
    if (llt.info() != Eigen::Success)
        throw NumericError("Cholesky factorization of the compressed covariance failed", "CHOLESKY_FAILED");
    return llt.matrixL();
}

RowMatrix draw(const ExperimentPlan& plan, const PhiContext& ctx, std::uint64_t stream, std::size_t j,
               std::size_t count) {
    const std::uint64_t master = plan.master_seed;
    const std::uint64_t p = ctx.phi.p;
    if (stream == kTrainingStream) {
        kernels::SeedFn seeds = [=](std::size_t i) { return derive_seed(master, {kTrainingStream, p, j, i}); };
        if (plan.sampling_mode == SamplingMode::DirectCompressed)
            return kernels::draw_direct(ctx.lower, nullptr, seeds, count);
        return kernels::draw_ambient(plan.model, nullptr, ctx.phi, seeds, count);
    }
    kernels::SeedFn seeds = [=](std::size_t t) { return derive_seed(master, {kTrialStream, p, j, t}); };
    if (plan.sampling_mode == SamplingMode::DirectCompressed)
        return kernels::draw_direct(ctx.lower, nullptr, seeds, count);
    return kernels::draw_ambient(plan.model, nullptr, ctx.phi, seeds, count);
}

PhiContext prepare_phi(const ExperimentPlan& plan, std::size_t p, std::size_t j) {
    const std::uint64_t seed = derive_seed(plan.master_seed, {kPhiStream, p, j});
    PhiContext ctx{generate_projection(plan.model.l, p, seed), {}, {}, {}, {}};
    ctx.sigma_star = exact_compressed_covariance(plan.model, ctx.phi);
    if (plan.sampling_mode == SamplingMode::DirectCompressed) ctx.lower = cholesky_lower(ctx.sigma_star);
    if (plan.covariance_mode == CovarianceMode::Estimated) {
        const RowMatrix training = draw(plan, ctx, kTrainingStream, j, plan.training_samples);
        ctx.used = sample_compressed_covariance(training);
    } else {
        ctx.used = ctx.sigma_star;
    }
    ctx.sub = p <= kFullEigenLimit ? eigendecompose(ctx.used, plan.k) : eigendecompose_leading(ctx.used, plan.k);
    return ctx;
}

/// E(Q*|Phi) = tr(MS), Var(Q*|Phi) = 2 tr(MSMS) = 2 (||S||^2 - 2 ||SU||^2 + ||U^T S U||^2).
std::pair<double, double> conditional_moments(const Matrix& s, const Matrix& u) {
    const Matrix su = s * u;
    const Matrix usu = u.transpose() * su;
    const double mean = s.trace() - usu.trace();
    const double var = 2.0 * (s.squaredNorm() - 2.0 * su.squaredNorm() + usu.squaredNorm());
    return {mean, var};
}

double fixed_order_mean(std::span<const double> values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

std::optional<double> sample_variance(std::span<const double> values, double mean) {
    if (values.size() < 2) return std::nullopt;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return ss / static_cast<double>(values.size() - 1);
}

ColumnStats column(std::span<const double> values) {
    ColumnStats s;
    s.count = values.size();
    if (values.empty()) return s;
    s.mean = fixed_order_mean(values);
    if (auto var = sample_variance(values, s.mean)) s.sd = std::sqrt(*var);
    return s;
}

Vector projected_direction(const ExperimentPlan& plan, const ProjectionMatrix& phi, std::size_t d) {
    const Vector unit = anomaly_mean(plan.model, AnomalySpec{d, 1.0});
    return project(phi, unit);
}

double rejection_rate(std::span<const double> q, const TestConfig& cfg) {
    const double z = cfg.threshold();
    std::size_t hits = 0;
    for (double v : q)
        if (standardize(v, cfg) > z) ++hits;
    return static_cast<double>(hits) / static_cast<double>(q.size());
}

}  // namespace

void validate(const ExperimentPlan& plan) {
    if (plan.model.l == 0) throw ValidationError("plan model has l = 0");
    validate_dimensions(plan, plan.p);
    if (!(plan.alpha > 0.0 && plan.alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
    if (plan.trials_per_phi == 0) throw ValidationError("trials_per_phi must be positive");
    if (plan.phi_realizations == 0) throw ValidationError("phi_realizations must be positive");
    if (plan.anomaly) validate_anomaly(plan.model, *plan.anomaly, plan.k);
}

ExperimentAggregate summarize(std::span<const PhiSummary> rows) {
    std::vector<double> mean, var, rej, cmean, cvar;
    for (const PhiSummary& r : rows) {
        mean.push_back(r.mean_qstar_over_p);
        if (r.var_ratio) var.push_back(*r.var_ratio);
        rej.push_back(r.rejection_rate);
        cmean.push_back(r.conditional_mean_over_p);
        cvar.push_back(r.conditional_var_ratio);
    }
    return {column(mean), column(var), column(rej), column(cmean), column(cvar)};
}

ExperimentResult run_experiment(const ExperimentPlan& plan) {
    validate(plan);
    const std::size_t l = plan.model.l, p = plan.p, k = plan.k;
    const double dof = static_cast<double>(l - k);
    const TestConfig cfg = make_test_config(k, plan.alpha, l, plan.c());
    const std::size_t spikes = std::min(plan.model.m(), k);

    ExperimentResult result;
    result.l = l;
    result.p = p;
    result.k = k;
    result.trials_per_phi = plan.trials_per_phi;
    std::vector<double> q(plan.trials_per_phi);
    for (std::size_t j = 0; j < plan.phi_realizations; ++j) {
        const PhiContext ctx = prepare_phi(plan, p, j);
        RowMatrix y = draw(plan, ctx, kTrialStream, j, plan.trials_per_phi);
        if (plan.anomaly && plan.anomaly->gamma != 0.0) {
            const Vector shift = plan.anomaly->gamma * projected_direction(plan, ctx.phi, plan.anomaly->d);
            y.rowwise() += shift.transpose();
        }
        kernels::residual_norms(ctx.sub.basis, y, q);

        PhiSummary row;
        row.phi_index = j;
        row.phi_seed = ctx.phi.seed;
        const double mean_q = fixed_order_mean(q);
        row.mean_qstar_over_p = mean_q / static_cast<double>(p);
        if (auto var = sample_variance(q, mean_q)) row.var_ratio = *var / (2.0 * dof);
        row.rejection_rate = rejection_rate(q, cfg);
        const auto [cm, cv] = conditional_moments(ctx.sigma_star.matrix, ctx.sub.basis);
        row.conditional_mean_over_p = cm / static_cast<double>(p);
        row.conditional_var_ratio = cv / (2.0 * dof);
        for (std::size_t i = 0; i < spikes; ++i) row.leading_eigenvalues.push_back(ctx.sub.eigenvalues(static_cast<Index>(i)));
        result.per_phi.push_back(std::move(row));
    }
    result.aggregate = summarize(result.per_phi);
    result.theory.c = plan.c();
    result.theory.c_plus_1 = plan.c() + 1.0;
    if (plan.anomaly) {
        const PowerQuery query{l, k, plan.alpha, plan.anomaly->gamma, plan.c()};
        result.theory.power = power(query, plan.covariance_mode == CovarianceMode::Estimated
                                               ? PowerKind::CompressedEstimated
                                               : PowerKind::Compressed);
    }
    return result;
}

ExperimentResult run_null_experiment(const ExperimentPlan& plan) {
    if (plan.anomaly && plan.anomaly->gamma != 0.0)
        throw ValidationError("null experiment requires no anomaly (or gamma = 0)");
    return run_experiment(plan);
}

ExperimentResult run_estimated_covariance_experiment(const ExperimentPlan& plan) {
    if (plan.covariance_mode != CovarianceMode::Estimated)
        throw ValidationError("estimated-covariance experiment requires covariance_mode = estimated");
    return run_experiment(plan);
}

std::vector<PowerRow> run_power_experiment(const ExperimentPlan& plan, std::span<const double> gamma_grid,
                                           std::span<const double> c_grid) {
    if (!plan.anomaly) throw ValidationError("power experiment needs an anomaly spec (its index d)");
    if (gamma_grid.empty() || c_grid.empty()) throw ValidationError("gamma and c grids must not be empty");
    for (double g : gamma_grid)
        if (!(g >= 0.0) || !std::isfinite(g)) throw ValidationError("gamma grid entries must be finite and >= 0");
    const std::size_t l = plan.model.l;
    std::vector<std::size_t> dims;
    for (double c : c_grid) {
        if (!(c >= 1.0) || !std::isfinite(c)) {
            std::ostringstream msg;
            msg << "compression ratio " << c << " must be finite and >= 1 (p <= l)";
            throw ValidationError(msg.str());
        }
        dims.push_back(static_cast<std::size_t>(std::llround(static_cast<double>(l) / c)));
    }
    {
        ExperimentPlan probe = plan;
        probe.p = dims.front();
        for (std::size_t p : dims) validate_dimensions(probe, p);
        validate(probe);
    }

    std::vector<PowerRow> rows;
    std::vector<double> q(plan.trials_per_phi);
    for (std::size_t ci = 0; ci < dims.size(); ++ci) {
        const std::size_t p = dims[ci];
        const double c = static_cast<double>(l) / static_cast<double>(p);
        const TestConfig cfg = make_test_config(plan.k, plan.alpha, l, c);
        // rates[g][j]
        std::vector<std::vector<double>> rates(gamma_grid.size());
        for (std::size_t j = 0; j < plan.phi_realizations; ++j) {
            const PhiContext ctx = prepare_phi(plan, p, j);
            const RowMatrix null_draws = draw(plan, ctx, kTrialStream, j, plan.trials_per_phi);
            const Vector direction = projected_direction(plan, ctx.phi, plan.anomaly->d);
            for (std::size_t g = 0; g < gamma_grid.size(); ++g) {
                RowMatrix y = null_draws;
                if (gamma_grid[g] != 0.0) y.rowwise() += (gamma_grid[g] * direction).transpose();
                kernels::residual_norms(ctx.sub.basis, y, q);
                rates[g].push_back(rejection_rate(q, cfg));
            }
        }
        for (std::size_t g = 0; g < gamma_grid.size(); ++g) {
            const ColumnStats stats = column(rates[g]);
            PowerRow row;
            row.gamma = gamma_grid[g];
            row.c = c;
            row.p = p;
            row.empirical_power = stats.mean;
            row.sd_across_phi = stats.sd;
            const PowerQuery query{l, plan.k, plan.alpha, gamma_grid[g], c};
            row.theory_power = power(query, plan.covariance_mode == CovarianceMode::Estimated
                                                ? PowerKind::CompressedEstimated
                                                : PowerKind::Compressed);
            rows.push_back(row);
        }
    }
    return rows;
}

MeanComparison compare_means(const ExperimentResult& a, const ExperimentResult& b) {
    // trial-level mean of Q*/p and the squared standard error, pooling within-Phi variances
    auto stats = [](const ExperimentResult& r) {
        if (r.per_phi.empty()) throw ValidationError("mean comparison needs results");
        double mean = 0.0, var = 0.0;
        for (const PhiSummary& row : r.per_phi) {
            mean += row.mean_qstar_over_p;
            if (!row.var_ratio) throw ValidationError("mean comparison needs at least 2 trials per Phi");
            const double var_q = *row.var_ratio * 2.0 * static_cast<double>(r.l - r.k);
            var += var_q / (static_cast<double>(r.p) * static_cast<double>(r.p));
        }
        const auto rcount = static_cast<double>(r.per_phi.size());
        const double se2 = (var / rcount) / (static_cast<double>(r.trials_per_phi) * rcount);
        return std::pair{mean / rcount, se2};
    };
    const auto [ma, sa] = stats(a);
    const auto [mb, sb] = stats(b);
    MeanComparison out;
    out.mean_a = ma;
    out.mean_b = mb;
    out.pooled_se = std::sqrt(sa + sb);
    out.z = (ma - mb) / out.pooled_se;
    return out;
}

SamplingEquivalence equivalence_check_sampling_modes(ExperimentPlan plan) {
    if (plan.model.l > 500) throw ValidationError("sampling-mode equivalence check is limited to l <= 500");
    SamplingEquivalence out;
    plan.sampling_mode = SamplingMode::DirectCompressed;
    out.direct = run_experiment(plan);
    plan.sampling_mode = SamplingMode::AmbientThenProject;
    out.ambient = run_experiment(plan);
    out.comparison = compare_means(out.direct, out.ambient);
    out.within_tolerance = std::abs(out.comparison.z) < 5.0;
    return out;
}

}  // namespace cpca

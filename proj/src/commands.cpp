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

#include "cpca/commands.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "cpca/detector.hpp"
#include "cpca/error.hpp"
#include "cpca/io.hpp"
#include "cpca/kernels.hpp"
#include "cpca/power.hpp"
#include "cpca/projection.hpp"
#include "cpca/subspace.hpp"

namespace cpca::cli {

using nlohmann::json;

namespace {

constexpr const char* kNA = "NA";

[[noreturn]] void config_error(const std::string& what) { throw ValidationError(what, "CONFIG_INVALID"); }

std::size_t positive_int(const json& doc, const char* key) {
    if (!doc.contains(key)) config_error(std::string("missing required field '") + key + "'");
    const json& v = doc.at(key);
    if (!v.is_number_integer() || v.get<long long>() <= 0)
        config_error(std::string("field '") + key + "' must be a positive integer");
    return v.get<std::size_t>();
}

std::uint64_t seed_field(const json& doc, const char* key) {
    if (!doc.contains(key)) config_error(std::string("missing required field '") + key + "'");
    const json& v = doc.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        config_error(std::string("field '") + key + "' must be a non-negative integer");
    return v.get<std::uint64_t>();
}

double number(const json& doc, const char* key, double fallback) {
    if (!doc.contains(key)) return fallback;
    if (!doc.at(key).is_number()) config_error(std::string("field '") + key + "' must be a number");
    return doc.at(key).get<double>();
}

std::vector<double> number_list(const json& doc, const char* key) {
    if (!doc.contains(key)) return {};
    const json& v = doc.at(key);
    if (!v.is_array()) config_error(std::string("field '") + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const json& e : v) {
        if (!e.is_number()) config_error(std::string("field '") + key + "' must be an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

std::string string_field(const json& doc, const char* key, const std::string& fallback) {
    if (!doc.contains(key)) return fallback;
    if (!doc.at(key).is_string()) config_error(std::string("field '") + key + "' must be a string");
    return doc.at(key).get<std::string>();
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string csv_value(const std::optional<double>& v) { return v ? io::format_double(*v) : kNA; }

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string(), "FILE_UNWRITABLE");
    return out;
}

json stats_json(const ColumnStats& s) {
    if (s.count == 0) return json{{"mean", nullptr}, {"sd", nullptr}};
    return json{{"mean", s.mean}, {"sd", optional_number(s.sd)}};
}

}  // namespace

// ---------------------------------------------------------------- plans

PlanFile parse_plan(const json& doc) {
    if (!doc.is_object()) config_error("plan must be a JSON object");
    PlanFile file;
    file.name = string_field(doc, "name", "experiment");
    const std::string kind = string_field(doc, "kind", "null");
    if (kind == "null")
        file.kind = PlanKind::Null;
    else if (kind == "estimated")
        file.kind = PlanKind::Estimated;
    else if (kind == "power")
        file.kind = PlanKind::Power;
    else
        config_error("field 'kind' must be one of null, estimated, power");

    ExperimentPlan& plan = file.plan;
    plan.model = make_spiked(positive_int(doc, "l"), number_list(doc, "spectrum"));
    plan.k = positive_int(doc, "k");
    plan.alpha = number(doc, "alpha", 0.05);
    plan.trials_per_phi = positive_int(doc, "trials_per_phi");
    plan.phi_realizations = positive_int(doc, "phi_realizations");
    plan.master_seed = seed_field(doc, "master_seed");

    const std::string cov = string_field(doc, "covariance_mode", file.kind == PlanKind::Estimated ? "estimated" : "exact");
    if (cov == "exact")
        plan.covariance_mode = CovarianceMode::Exact;
    else if (cov == "estimated")
        plan.covariance_mode = CovarianceMode::Estimated;
    else
        config_error("field 'covariance_mode' must be exact or estimated");
    if (file.kind == PlanKind::Estimated && plan.covariance_mode != CovarianceMode::Estimated)
        config_error("kind 'estimated' requires covariance_mode 'estimated'");
    if (plan.covariance_mode == CovarianceMode::Estimated) plan.training_samples = positive_int(doc, "training_samples");

    const std::string sampling = string_field(doc, "sampling_mode", "direct");
    if (sampling == "direct")
        plan.sampling_mode = SamplingMode::DirectCompressed;
    else if (sampling == "ambient")
        plan.sampling_mode = SamplingMode::AmbientThenProject;
    else
        config_error("field 'sampling_mode' must be direct or ambient");

    if (doc.contains("anomaly")) {
        const json& a = doc.at("anomaly");
        if (!a.is_object()) config_error("field 'anomaly' must be an object");
        plan.anomaly = AnomalySpec{positive_int(a, "d"), number(a, "gamma", 0.0)};
    }
    if (doc.contains("threads")) file.threads = static_cast<int>(positive_int(doc, "threads"));

    if (file.kind == PlanKind::Power) {
        file.gamma_grid = number_list(doc, "gamma_grid");
        file.c_grid = number_list(doc, "c_grid");
        if (file.gamma_grid.empty() || file.c_grid.empty())
            config_error("power plans need non-empty 'gamma_grid' and 'c_grid'");
        if (!plan.anomaly) config_error("power plans need 'anomaly' with its index d");
        if (!(file.c_grid.front() >= 1.0)) config_error("c_grid entries must be >= 1");
        plan.p = static_cast<std::size_t>(std::llround(static_cast<double>(plan.model.l) / file.c_grid.front()));
    } else {
        plan.p = positive_int(doc, "p");
    }
    validate(plan);
    return file;
}

void write_experiment_csv(std::ostream& os, const PlanFile& plan, const ExperimentResult& r) {
    const ExperimentPlan& p = plan.plan;
    os << "# cpcad experiment " << plan.name << ": l=" << r.l << " p=" << r.p << " k=" << r.k
       << " c=" << io::format_double(p.c()) << " trials_per_phi=" << p.trials_per_phi
       << " phi_realizations=" << p.phi_realizations << " master_seed=" << p.master_seed << " covariance_mode="
       << (p.covariance_mode == CovarianceMode::Exact ? "exact" : "estimated") << " sampling_mode="
       << (p.sampling_mode == SamplingMode::DirectCompressed ? "direct" : "ambient") << '\n';
    os << "# mean_qstar_over_p = mean(Q*)/p; var_ratio = sample variance of Q* / (2(l-k)); rejection_rate at "
          "level alpha="
       << io::format_double(p.alpha) << '\n';
    os << "# conditional_* = E(Q*|Phi)/p and Var(Q*|Phi)/(2(l-k)) from the covariance spectrum; "
          "rows 'mean' and 'sd' aggregate across Phi; NA = undefined\n";
    os << "phi,phi_seed,mean_qstar_over_p,var_ratio,rejection_rate,conditional_mean_over_p,conditional_var_ratio\n";
    for (const PhiSummary& row : r.per_phi) {
        os << row.phi_index << ',' << row.phi_seed << ',' << io::format_double(row.mean_qstar_over_p) << ','
           << csv_value(row.var_ratio) << ',' << io::format_double(row.rejection_rate) << ','
           << io::format_double(row.conditional_mean_over_p) << ',' << io::format_double(row.conditional_var_ratio)
           << '\n';
    }
    const ExperimentAggregate& a = r.aggregate;
    auto mean_of = [](const ColumnStats& s) { return s.count ? std::optional<double>(s.mean) : std::nullopt; };
    os << "mean,," << csv_value(mean_of(a.mean_qstar_over_p)) << ',' << csv_value(mean_of(a.var_ratio)) << ','
       << csv_value(mean_of(a.rejection_rate)) << ',' << csv_value(mean_of(a.conditional_mean_over_p)) << ','
       << csv_value(mean_of(a.conditional_var_ratio)) << '\n';
    os << "sd,," << csv_value(a.mean_qstar_over_p.sd) << ',' << csv_value(a.var_ratio.sd) << ','
       << csv_value(a.rejection_rate.sd) << ',' << csv_value(a.conditional_mean_over_p.sd) << ','
       << csv_value(a.conditional_var_ratio.sd) << '\n';
}

void write_power_csv(std::ostream& os, const PlanFile& plan, const std::vector<PowerRow>& rows) {
    const ExperimentPlan& p = plan.plan;
    os << "# cpcad power experiment " << plan.name << ": l=" << p.model.l << " k=" << p.k
       << " d=" << p.anomaly->d << " alpha=" << io::format_double(p.alpha) << " trials_per_phi=" << p.trials_per_phi
       << " phi_realizations=" << p.phi_realizations << " master_seed=" << p.master_seed << '\n';
    os << "# empirical_power = mean rejection rate across Phi; sd_across_phi = sample SD of the per-Phi rates; "
          "theory_power = compressed normal approximation at c = l/p\n";
    os << "gamma,c,p,empirical_power,theory_power,sd_across_phi\n";
    for (const PowerRow& row : rows) {
        os << io::format_double(row.gamma) << ',' << io::format_double(row.c) << ',' << row.p << ','
           << io::format_double(row.empirical_power) << ',' << io::format_double(row.theory_power) << ','
           << csv_value(row.sd_across_phi) << '\n';
    }
}

// ---------------------------------------------------------------- build

void cmd_build(const BuildOptions& opts, std::ostream& out) {
    const json doc = io::read_json(opts.config);
    if (!doc.is_object()) config_error("config must be a JSON object");
    const std::size_t l = positive_int(doc, "l");
    const std::size_t p = positive_int(doc, "p");
    const std::size_t k = positive_int(doc, "k");
    const double alpha = number(doc, "alpha", 0.05);
    const std::uint64_t seed = seed_field(doc, "seed");
    const std::string mode = string_field(doc, "covariance_mode", "exact");
    if (mode != "exact" && mode != "estimated") config_error("field 'covariance_mode' must be exact or estimated");
    if (mode == "exact" && !doc.contains("spectrum")) config_error("exact mode needs 'spectrum'");
    const SpikedModel model = make_spiked(l, number_list(doc, "spectrum"));
    const ProjectionMatrix phi = generate_projection(l, p, seed);
    if (k >= p) config_error("k must be smaller than p");
    const double c = phi.c();
    (void)make_test_config(k, alpha, l, c);

    CompressedCovariance cov;
    json creation = doc;
    if (mode == "exact") {
        cov = exact_compressed_covariance(model, phi);
    } else {
        if (!doc.contains("training") || !doc.at("training").is_object())
            config_error("estimated mode needs a 'training' object with a 'path'");
        const json& training = doc.at("training");
        fs::path path = string_field(training, "path", "");
        if (path.empty()) config_error("training.path must be set");
        if (path.is_relative()) path = opts.config.parent_path() / path;
        const bool projected = training.value("projected", false);
        const io::CsvTable table = io::read_csv(path, projected ? p : l);
        const auto n = static_cast<std::size_t>(table.data.rows());
        if (n < p) {
            std::ostringstream msg;
            msg << "training file has n=" << n << " rows but estimation needs n >= p=" << p;
            throw DataError(msg.str(), "ESTIMATION_UNDERSAMPLED");
        }
        cov = projected ? sample_compressed_covariance(table.data)
                        : sample_compressed_covariance(project_rows(phi, table.data));
    }
    const SubspaceModel sub = p <= kFullEigenLimit ? eigendecompose(cov, k) : eigendecompose_leading(cov, k);

    json head = json::array();
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(10, sub.eigenvalues.size()); ++i) head.push_back(sub.eigenvalues(i));

    json inflation;
    if (model.m() == 0) {
        inflation = {{"skipped", "no spikes in the spectrum"}};
    } else {
        try {
            inflation = json::array();
            for (const InflationRow& r : eigenvalue_inflation_check(model, sub, c))
                inflation.push_back({{"sigma", r.sigma}, {"predicted", r.predicted}, {"observed", r.observed},
                                     {"z_score", r.z_score}});
        } catch (const ValidationError& e) {
            inflation = {{"skipped", e.what()}};
        }
    }

    io::ModelArtifact artifact;
    artifact.metadata = {{"format_version", io::kArtifactFormatVersion},
                         {"l", l},
                         {"p", p},
                         {"k", k},
                         {"alpha", alpha},
                         {"c", c},
                         {"seed", seed},
                         {"spectrum", model.leading},
                         {"covariance_mode", mode},
                         {"training_samples", mode == "exact" ? json(nullptr) : json(cov.samples)},
                         {"eigenvalues_head", head},
                         {"tail_sum", sub.tail_sum},
                         {"tail_sq_sum", sub.tail_sq_sum},
                         {"creation", creation}};
    artifact.basis = sub.basis;
    io::save_artifact(opts.output_dir, artifact);

    json summary = {{"artifact", opts.output_dir.string()},
                    {"checksum", artifact.metadata["checksum"]},
                    {"l", l},
                    {"p", p},
                    {"k", k},
                    {"c", c},
                    {"eigenvalues_head", head},
                    {"tail_sum", sub.tail_sum},
                    {"tail_sq_sum", sub.tail_sq_sum},
                    {"inflation_check", inflation}};
    out << summary.dump(2) << '\n';
}

// ---------------------------------------------------------------- detect

void cmd_detect(const DetectOptions& opts, std::ostream& out) {
    const io::ModelArtifact artifact = io::load_artifact(opts.artifact_dir);
    const json& meta = artifact.metadata;
    std::size_t l = 0, p = 0, k = 0;
    double alpha = 0.0, c = 0.0;
    std::uint64_t seed = 0;
    try {
        l = meta.at("l").get<std::size_t>();
        p = meta.at("p").get<std::size_t>();
        k = meta.at("k").get<std::size_t>();
        alpha = meta.at("alpha").get<double>();
        c = meta.at("c").get<double>();
        seed = meta.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed artifact metadata: ") + e.what(), "ARTIFACT_CORRUPT");
    }
    if (static_cast<std::size_t>(artifact.basis.rows()) != p || static_cast<std::size_t>(artifact.basis.cols()) != k)
        throw DataError("artifact basis shape disagrees with metadata", "ARTIFACT_CORRUPT");

    const io::CsvTable table = io::read_csv(opts.observations, opts.projected ? p : l);
    RowMatrix y;
    if (opts.projected)
        y = table.data;
    else
        y = project_rows(generate_projection(l, p, seed), table.data);

    std::vector<double> q(static_cast<std::size_t>(y.rows()));
    kernels::residual_norms(artifact.basis, y, q);
    const TestConfig cfg = make_test_config(k, alpha, l, c);
    const auto kind = meta.value("covariance_mode", "exact") == "exact" ? StatisticKind::CompressedExact
                                                                         : StatisticKind::CompressedEstimated;

    std::ofstream csv = open_output(opts.output);
    csv << "row,q_star,standardized,threshold,anomalous\n";
    std::size_t flagged = 0;
    for (std::size_t r = 0; r < q.size(); ++r) {
        const DetectionOutcome d = decide(q[r], cfg, kind);
        flagged += d.anomalous ? 1 : 0;
        csv << r << ',' << io::format_double(d.statistic) << ',' << io::format_double(d.standardized) << ','
            << io::format_double(d.threshold) << ',' << (d.anomalous ? "true" : "false") << '\n';
    }
    const json summary = {{"rows", q.size()},
                          {"anomalous", flagged},
                          {"rate", q.empty() ? 0.0 : static_cast<double>(flagged) / static_cast<double>(q.size())},
                          {"threshold", cfg.threshold()},
                          {"output", opts.output.string()}};
    out << summary.dump(2) << '\n';
}

// ---------------------------------------------------------------- power

void cmd_power(const PowerOptions& opts, std::ostream& out) {
    if (opts.gammas.empty() || opts.c_grid.empty()) throw ValidationError("gamma and c lists must not be empty", "USAGE");
    for (double c : opts.c_grid)
        if (!(c >= 0.0)) throw ValidationError("c grid entries must be >= 0", "USAGE");
    PowerQuery base{opts.l, opts.k, opts.alpha, 0.0, 0.0};
    try {
        validate(base);
        for (double g : opts.gammas) validate(PowerQuery{opts.l, opts.k, opts.alpha, g, 0.0});
    } catch (const ValidationError& e) {
        throw ValidationError(e.what(), "USAGE");
    }
    std::ofstream csv = open_output(opts.output);
    csv << "gamma,c,power_q,power_qstar\n";
    std::size_t rows = 0;
    for (double g : opts.gammas) {
        PowerQuery query = base;
        query.gamma = g;
        const double pq = power(query, PowerKind::Uncompressed);
        for (const auto& [c, pqs] : power_curve(query, opts.c_grid)) {
            csv << io::format_double(g) << ',' << io::format_double(c) << ',' << io::format_double(pq) << ','
                << io::format_double(pqs) << '\n';
            ++rows;
        }
    }
    out << json{{"rows", rows}, {"output", opts.output.string()}}.dump(2) << '\n';
}

// ---------------------------------------------------------------- experiment

void cmd_experiment(const ExperimentOptions& opts, std::ostream& out) {
    const PlanFile file = parse_plan(io::read_json(opts.plan));
    if (const auto threads = opts.threads ? opts.threads : file.threads) kernels::set_workers(*threads);
    const ExperimentPlan& plan = file.plan;

    std::ofstream csv = open_output(opts.output);
    json summary = {{"plan", file.name}, {"output", opts.output.string()}, {"workers", kernels::workers()}};
    if (file.kind == PlanKind::Power) {
        const auto rows = run_power_experiment(plan, file.gamma_grid, file.c_grid);
        write_power_csv(csv, file, rows);
        json table = json::array();
        for (const PowerRow& r : rows)
            table.push_back({{"gamma", r.gamma}, {"c", r.c}, {"empirical_power", r.empirical_power},
                             {"theory_power", r.theory_power}, {"sd_across_phi", optional_number(r.sd_across_phi)}});
        summary["rows"] = table;
    } else {
        const ExperimentResult result =
            file.kind == PlanKind::Estimated ? run_estimated_covariance_experiment(plan) : run_experiment(plan);
        write_experiment_csv(csv, file, result);
        summary["theory"] = {{"c", result.theory.c},
                             {"c_plus_1", result.theory.c_plus_1},
                             {"power", optional_number(result.theory.power)}};
        summary["aggregate"] = {{"mean_qstar_over_p", stats_json(result.aggregate.mean_qstar_over_p)},
                                {"var_ratio", stats_json(result.aggregate.var_ratio)},
                                {"rejection_rate", stats_json(result.aggregate.rejection_rate)},
                                {"conditional_mean_over_p", stats_json(result.aggregate.conditional_mean_over_p)},
                                {"conditional_var_ratio", stats_json(result.aggregate.conditional_var_ratio)}};
    }
    out << summary.dump(2) << '\n';
}

// ---------------------------------------------------------------- simulate

void cmd_simulate(const SimulateOptions& opts, std::ostream& out) {
    SpikedModel model;
    try {
        model = make_spiked(opts.l, opts.spectrum);
    } catch (const ValidationError& e) {
        throw ValidationError(e.what(), "USAGE");
    }
    std::optional<AnomalySpec> anomaly;
    if (opts.gamma) {
        anomaly = AnomalySpec{opts.d, *opts.gamma};
        validate_anomaly(model, *anomaly);
    }

    RowMatrix data;
    std::vector<std::string> header;
    if (!opts.compressed) {
        NormalRng rng(opts.seed);
        data = sample_x(model, anomaly, opts.count, rng);
        for (std::size_t i = 0; i < opts.l; ++i) header.push_back("x" + std::to_string(i));
    } else {
        const ProjectionMatrix phi = generate_projection(opts.l, opts.p, opts.projection_seed);
        const CompressedCovariance cov = exact_compressed_covariance(model, phi);
        Eigen::LLT<Matrix> llt(cov.matrix);
        if (llt.info() != Eigen::Success)
            throw NumericError("Cholesky factorization of the compressed covariance failed", "CHOLESKY_FAILED");
        const Matrix lower = llt.matrixL();
        std::optional<Vector> shift;
        if (anomaly) shift = project(phi, anomaly_mean(model, *anomaly));
        const std::uint64_t seed = opts.seed;
        data = kernels::draw_direct(lower, shift ? &*shift : nullptr,
                                    [seed](std::size_t t) { return derive_seed(seed, {t}); }, opts.count);
        for (std::size_t i = 0; i < opts.p; ++i) header.push_back("y" + std::to_string(i));
    }
    if (opts.output.has_parent_path()) fs::create_directories(opts.output.parent_path());
    io::write_csv(opts.output, header, data);
    out << json{{"rows", opts.count}, {"columns", header.size()}, {"output", opts.output.string()}}.dump(2) << '\n';
}

}  // namespace cpca::cli

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

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "cpca/commands.hpp"
#include "cpca/error.hpp"
#include "cpca/io.hpp"

namespace {

std::vector<double> grid_or_usage(const std::string& text) {
    return text.empty() ? std::vector<double>{} : cpca::io::parse_grid(text);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compressed PCA residual-subspace anomaly detection"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "cpcad 1.0.0");

    cpca::cli::BuildOptions build;
    auto* build_cmd = app.add_subcommand("build", "Build a model artifact from a JSON config");
    build_cmd->add_option("config", build.config, "Config file")->required()->check(CLI::ExistingFile);
    build_cmd->add_option("-o,--output", build.output_dir, "Artifact directory")->required();

    cpca::cli::DetectOptions detect;
    auto* detect_cmd = app.add_subcommand("detect", "Score observations against an artifact");
    detect_cmd->add_option("artifact", detect.artifact_dir, "Artifact directory")->required();
    detect_cmd->add_option("observations", detect.observations, "Observation CSV")->required();
    detect_cmd->add_option("-o,--output", detect.output, "Output CSV")->required();
    detect_cmd->add_flag("--projected", detect.projected, "Rows are already projected (length p)");

    cpca::cli::PowerOptions power;
    std::string gammas = "10:50:10", cs = "0:20:1";
    auto* power_cmd = app.add_subcommand("power", "Evaluate theoretical power curves");
    power_cmd->add_option("-l", power.l, "Ambient dimension")->capture_default_str();
    power_cmd->add_option("-k", power.k, "Retained components")->capture_default_str();
    power_cmd->add_option("--alpha", power.alpha, "Test level")->capture_default_str();
    power_cmd->add_option("--gamma", gammas, "Anomaly sizes: a,b,c or start:stop:step")->capture_default_str();
    power_cmd->add_option("--c", cs, "Compression ratios: a,b,c or start:stop:step")->capture_default_str();
    power_cmd->add_option("-o,--output", power.output, "Output CSV")->required();

    cpca::cli::ExperimentOptions experiment;
    int threads = 0;
    auto* exp_cmd = app.add_subcommand("experiment", "Run a Monte Carlo experiment plan");
    exp_cmd->add_option("plan", experiment.plan, "Plan file")->required()->check(CLI::ExistingFile);
    exp_cmd->add_option("-o,--output", experiment.output, "Output CSV")->required();
    exp_cmd->add_option("--threads", threads, "Worker threads (overrides the plan)")->check(CLI::PositiveNumber);

    cpca::cli::SimulateOptions sim;
    std::string spectrum;
    double gamma = 0.0;
    auto* sim_cmd = app.add_subcommand("simulate", "Draw observations from the spiked model");
    sim_cmd->add_option("-l", sim.l, "Ambient dimension")->required();
    sim_cmd->add_option("--spectrum", spectrum, "Leading eigenvalues, comma separated");
    auto* gamma_opt = sim_cmd->add_option("--gamma", gamma, "Anomaly size");
    sim_cmd->add_option("--d", sim.d, "Anomaly eigen-coordinate (0-based)")->needs(gamma_opt);
    sim_cmd->add_option("-n,--count", sim.count, "Rows to draw")->required();
    sim_cmd->add_option("--seed", sim.seed, "Seed")->required();
    sim_cmd->add_option("-o,--output", sim.output, "Output CSV")->required();
    auto* compressed = sim_cmd->add_flag("--compressed", sim.compressed, "Draw projected rows directly");
    sim_cmd->add_option("-p", sim.p, "Projected dimension")->needs(compressed);
    sim_cmd->add_option("--projection-seed", sim.projection_seed, "Seed of the projection")->needs(compressed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*build_cmd) {
            cpca::cli::cmd_build(build, std::cout);
        } else if (*detect_cmd) {
            cpca::cli::cmd_detect(detect, std::cout);
        } else if (*power_cmd) {
            power.gammas = grid_or_usage(gammas);
            power.c_grid = grid_or_usage(cs);
            cpca::cli::cmd_power(power, std::cout);
        } else if (*exp_cmd) {
            if (threads > 0) experiment.threads = threads;
            cpca::cli::cmd_experiment(experiment, std::cout);
        } else if (*sim_cmd) {
            sim.spectrum = grid_or_usage(spectrum);
            if (gamma_opt->count() > 0) sim.gamma = gamma;
            if (sim.compressed && sim.p == 0) throw cpca::ValidationError("--compressed needs -p", "USAGE");
            cpca::cli::cmd_simulate(sim, std::cout);
        }
    } catch (const cpca::Error& e) {
        std::cerr << "error: " << e.code() << ": " << e.what() << '\n';
        return e.exit_status();
    } catch (const std::exception& e) {
        std::cerr << "error: INTERNAL: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

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
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cpca/montecarlo.hpp"

// The command-line surface as a library: each command reads its inputs, writes
// its outputs and prints a JSON summary to `out`. Failures are thrown as
// cpca::Error; the executable maps them to exit statuses.
namespace cpca::cli {

namespace fs = std::filesystem;

struct BuildOptions {
    fs::path config;
    fs::path output_dir;
};

struct DetectOptions {
    fs::path artifact_dir;
    fs::path observations;
    fs::path output;
    bool projected = false;
};

struct PowerOptions {
    std::size_t l = 10000;
    std::size_t k = 30;
    double alpha = 0.05;
    std::vector<double> gammas{10, 20, 30, 40, 50};
    std::vector<double> c_grid{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20};
    fs::path output;
};

struct ExperimentOptions {
    fs::path plan;
    fs::path output;
    std::optional<int> threads;
};

struct SimulateOptions {
    std::size_t l = 0;
    std::vector<double> spectrum;
    std::optional<double> gamma;
    std::size_t d = 0;
    std::size_t count = 0;
    std::uint64_t seed = 0;
    fs::path output;
    bool compressed = false;
    std::size_t p = 0;
    std::uint64_t projection_seed = 0;
};

enum class PlanKind { Null, Estimated, Power };

/// A parsed experiment plan file.
struct PlanFile {
    std::string name;
    PlanKind kind = PlanKind::Null;
    ExperimentPlan plan;
    std::vector<double> gamma_grid;
    std::vector<double> c_grid;
    std::optional<int> threads;
};

PlanFile parse_plan(const nlohmann::json& doc);

void cmd_build(const BuildOptions& opts, std::ostream& out);
void cmd_detect(const DetectOptions& opts, std::ostream& out);
void cmd_power(const PowerOptions& opts, std::ostream& out);
void cmd_experiment(const ExperimentOptions& opts, std::ostream& out);
void cmd_simulate(const SimulateOptions& opts, std::ostream& out);

/// CSV writers shared by cmd_experiment and the tests.
void write_experiment_csv(std::ostream& os, const PlanFile& plan, const ExperimentResult& result);
void write_power_csv(std::ostream& os, const PlanFile& plan, const std::vector<PowerRow>& rows);

}  // namespace cpca::cli

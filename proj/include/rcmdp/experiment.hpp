// Copyright 2026 The rcmdp Authors
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

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rcmdp/envgen.hpp"
#include "rcmdp/epigraph.hpp"
#include "rcmdp/lagrangian.hpp"
#include "rcmdp/types.hpp"

namespace rcmdp {

/// Thrown on malformed experiment configuration (CLI exit code 2).
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ExperimentConfig {
    Setting setting = Setting::Finite;
    GenSpec generator;  // per-run seed is substituted from `seeds`
    std::vector<std::string> algorithms;
    BisectionConfig epirc;
    LagrangeConfig lf;
    std::vector<std::uint64_t> seeds;
    std::string output_dir;
    // Wall-clock columns are inherently non-deterministic; tests disable them
    // so identical seeds produce byte-identical CSVs.
    bool record_wall_time = true;
};

/// Parses the JSON mirror of ExperimentConfig, filling per-setting defaults
/// (generator sizes, subroutine iterations/learning rates, budget-fair LF
/// outer length). Throws ConfigError on contradictions such as lf-occ-avg or
/// lp-oracle outside the cmdp setting.
ExperimentConfig config_from_json(const nlohmann::json& j);

struct MetricRow {
    std::uint64_t seed = 0;
    std::string algorithm;
    int k = 0;
    double violation = 0.0;        // max_n Jhat_n - b_n over constraints
    double relative_return = 0.0;  // Jhat_0(pi) - Jhat_0(pi_unif)
    std::optional<double> b0_low;  // epirc only
    std::optional<double> b0_high;
    double wall_ms = 0.0;
};

/// Fig.-4 marking rule: among feasible rows (violation <= 0) the one with the
/// smallest return; if none is feasible, the smallest violation. Ties go to
/// the earliest iteration.
int select_marked_policy(const std::vector<MetricRow>& rows);

std::string metric_rows_to_csv(const std::vector<MetricRow>& rows);
std::vector<MetricRow> metric_rows_from_csv(const std::string& csv);

struct RunResult {
    std::uint64_t seed = 0;
    std::string algorithm;
    bool failed = false;
    std::string error;
    std::vector<MetricRow> rows;
    std::vector<Policy> policies;  // one per row
    int marked = -1;
    std::optional<double> j_star;  // lp-oracle runs only
};

struct ExperimentReport {
    std::vector<RunResult> runs;
    nlohmann::json summary;
    bool all_succeeded = true;
};

/// Runs every seed x algorithm pair (instances are generated once per seed
/// and shared), writes per-run CSV + policy files, an aggregated mean/stderr
/// CSV, and a JSON summary with the marked policies. Per-run failures are
/// recorded without aborting the remaining runs.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Metric rows for a single algorithm on a prepared instance (no file I/O).
/// Exposed for the solve/baseline CLI subcommands and tests.
RunResult run_algorithm(const RCMDPInstance& inst, const ExperimentConfig& cfg,
                        const std::string& algorithm, std::uint64_t seed);

}  // namespace rcmdp

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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rcmdp/experiment.hpp"
#include "rcmdp/json_io.hpp"
#include "rcmdp/uncertainty.hpp"

using namespace rcmdp;
using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

json small_cmdp_config(const std::string& out_dir) {
    json j;
    j["setting"] = "cmdp";
    j["generator"] = {{"num_states", 3}, {"num_actions", 2}, {"gamma", 0.8},
                      {"num_constraints", 1}};
    j["algorithms"] = {"epirc", "lf", "lf-pi-avg", "lf-occ-avg", "lp-oracle"};
    j["epirc"] = {{"outer_iterations", 4},
                  {"subroutine", {{"iterations", 60}, {"learning_rate", 2e-3}}}};
    j["lf"] = {{"outer", 5}, {"inner", 60}, {"alpha_pi", 2e-3}, {"alpha_lambda", 0.01}};
    j["seeds"] = {7, 8};
    j["output_dir"] = out_dir;
    j["record_wall_time"] = false;
    return j;
}

}  // namespace

TEST_CASE("select_marked_policy applies the feasibility-then-return rule") {
    auto row = [](double violation, double relative_return) {
        MetricRow r;
        r.violation = violation;
        r.relative_return = relative_return;
        return r;
    };
    // Feasible rows exist: minimum return among them wins.
    CHECK(select_marked_policy({row(0.2, 1), row(-0.1, 5), row(-0.05, 3)}) == 2);
    // Nothing feasible: minimum violation wins.
    CHECK(select_marked_policy({row(0.3, 0), row(0.1, 0), row(0.2, 0)}) == 1);
    CHECK(select_marked_policy({row(0.7, 2)}) == 0);
    // Ties resolve to the earliest iteration.
    CHECK(select_marked_policy({row(-0.1, 2), row(-0.2, 2)}) == 0);
    CHECK(select_marked_policy({row(0.5, 0), row(0.5, 0)}) == 0);
    CHECK_THROWS_AS(select_marked_policy({}), std::invalid_argument);
}

TEST_CASE("metric rows survive a CSV round trip exactly") {
    std::vector<MetricRow> rows;
    MetricRow a;
    a.seed = 42;
    a.algorithm = "epirc";
    a.k = 3;
    a.violation = -0.12345678901234567;
    a.relative_return = 1.0 / 3.0;
    a.b0_low = 0.5;
    a.b0_high = 1.0 + 1e-15;
    a.wall_ms = 12.5;
    rows.push_back(a);
    MetricRow b;
    b.seed = 43;
    b.algorithm = "lf";
    b.k = 0;
    b.violation = 0.25;
    b.relative_return = -2.75;
    rows.push_back(b);

    const auto parsed = metric_rows_from_csv(metric_rows_to_csv(rows));
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0].seed == 42);
    CHECK(parsed[0].algorithm == "epirc");
    CHECK(parsed[0].k == 3);
    CHECK(parsed[0].violation == a.violation);
    CHECK(parsed[0].relative_return == a.relative_return);
    REQUIRE(parsed[0].b0_low.has_value());
    CHECK(*parsed[0].b0_low == 0.5);
    CHECK(*parsed[0].b0_high == *a.b0_high);
    CHECK(parsed[0].wall_ms == 12.5);
    CHECK_FALSE(parsed[1].b0_low.has_value());
    CHECK(parsed[1].relative_return == -2.75);
}

TEST_CASE("config validation") {
    json j = small_cmdp_config("unused");
    CHECK_NOTHROW(config_from_json(j));

    json bad = j;
    bad["setting"] = "finite";
    CHECK_THROWS_AS(config_from_json(bad), ConfigError);  // lf-occ-avg needs cmdp

    json unknown = j;
    unknown["algorithms"] = {"epic"};
    CHECK_THROWS_AS(config_from_json(unknown), ConfigError);

    json no_seeds = j;
    no_seeds["seeds"] = json::array();
    CHECK_THROWS_AS(config_from_json(no_seeds), ConfigError);
}

TEST_CASE("duplicated seeds give identical runs and zero spread") {
    const auto dir = std::filesystem::temp_directory_path() / "rcmdp_test_dup";
    std::filesystem::remove_all(dir);
    json j = small_cmdp_config(dir.string());
    j["algorithms"] = {"epirc", "lf"};
    j["seeds"] = {7, 7};
    const ExperimentConfig cfg = config_from_json(j);
    const ExperimentReport report = run_experiment(cfg);
    CHECK(report.all_succeeded);

    // Identical seeds overwrite the same per-run files; regenerate the CSVs
    // from the in-memory rows instead.
    REQUIRE(report.runs.size() == 4);
    for (const auto& algorithm : {std::string("epirc"), std::string("lf")}) {
        std::vector<const RunResult*> matching;
        for (const auto& run : report.runs) {
            if (run.algorithm == algorithm) matching.push_back(&run);
        }
        REQUIRE(matching.size() == 2);
        CHECK(metric_rows_to_csv(matching[0]->rows) == metric_rows_to_csv(matching[1]->rows));
    }

    // Aggregate stderr columns are identically zero.
    const std::string aggregate = read_file(dir / "aggregate.csv");
    std::istringstream in(aggregate);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) fields.push_back(field);
        REQUIRE(fields.size() == 7);
        CHECK(std::stod(fields[3]) == 0.0);
        CHECK(std::stod(fields[5]) == 0.0);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("marked policies re-evaluate to their stored metrics") {
    const auto dir = std::filesystem::temp_directory_path() / "rcmdp_test_marked";
    std::filesystem::remove_all(dir);
    const ExperimentConfig cfg = config_from_json(small_cmdp_config(dir.string()));
    const ExperimentReport report = run_experiment(cfg);
    CHECK(report.all_succeeded);

    for (const auto& run : report.runs) {
        REQUIRE(run.marked >= 0);
        const MetricRow& row = run.rows[run.marked];
        const Policy& policy = run.policies[run.marked];
        GenSpec spec = cfg.generator;
        spec.seed = run.seed;
        const RCMDPInstance inst = random_instance(spec);
        const double uniform_return =
            robust_eval(inst, 0, uniform_policy(inst.num_states, inst.num_actions)).value;
        double violation = -std::numeric_limits<double>::infinity();
        for (int n = 1; n <= inst.num_constraints(); ++n) {
            violation =
                std::max(violation, robust_eval(inst, n, policy).value - inst.thresholds(n - 1));
        }
        const double relative = robust_eval(inst, 0, policy).value - uniform_return;
        CHECK(std::abs(violation - row.violation) <= 1e-8);
        CHECK(std::abs(relative - row.relative_return) <= 1e-8);
    }

    // lp-oracle entries carry J* and the gap into the summary.
    bool saw_gap = false;
    for (const auto& entry : report.summary["runs"]) {
        if (entry["algorithm"] == "epirc") {
            CHECK(entry.contains("j_star"));
            CHECK(entry.contains("gap_to_lp"));
            saw_gap = true;
        }
    }
    CHECK(saw_gap);
    std::filesystem::remove_all(dir);
}

TEST_CASE("zero learning rate pins epirc rows to the uniform policy") {
    json j = small_cmdp_config((std::filesystem::temp_directory_path() / "rcmdp_unused").string());
    j["epirc"] = {{"outer_iterations", 3},
                  {"subroutine", {{"iterations", 5}, {"learning_rate", 0.0}}},
                  {"warm_start", false}};
    const ExperimentConfig cfg = config_from_json(j);
    GenSpec spec = cfg.generator;
    spec.seed = 3;
    const RCMDPInstance inst = random_instance(spec);
    const RunResult run = run_algorithm(inst, cfg, "epirc", 3);
    REQUIRE_FALSE(run.failed);
    for (const auto& row : run.rows) {
        CHECK(std::abs(row.relative_return) <= 1e-12);
    }
}

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

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "rcmdp/envgen.hpp"
#include "rcmdp/epigraph.hpp"
#include "rcmdp/exact_eval.hpp"
#include "rcmdp/experiment.hpp"
#include "rcmdp/json_io.hpp"
#include "rcmdp/lagrangian.hpp"
#include "rcmdp/lp_oracle.hpp"
#include "rcmdp/rng.hpp"
#include "rcmdp/uncertainty.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct GenOptions {
    std::string setting = "finite";
    std::uint64_t seed = 0;
    int states = -1;
    int actions = -1;
    double gamma = -1.0;
    int kernels = -1;
    double reg = -1.0;
    int constraints = -1;
};

rcmdp::GenSpec spec_from_options(const GenOptions& o) {
    rcmdp::GenSpec spec =
        rcmdp::GenSpec::defaults(rcmdp::setting_from_name(o.setting), o.seed);
    if (o.states > 0) spec.num_states = o.states;
    if (o.actions > 0) spec.num_actions = o.actions;
    if (o.gamma > 0.0) spec.gamma = o.gamma;
    if (o.kernels > 0) spec.num_kernels = o.kernels;
    if (o.reg > 0.0) spec.kl_reg = o.reg;
    if (o.constraints >= 0) spec.num_constraints = o.constraints;
    return spec;
}

void add_gen_options(CLI::App* cmd, GenOptions& o) {
    cmd->add_option("--setting", o.setting, "Environment setting: finite|kl|cmdp");
    cmd->add_option("--seed", o.seed, "Generator seed");
    cmd->add_option("--states", o.states, "Number of states");
    cmd->add_option("--actions", o.actions, "Number of actions");
    cmd->add_option("--gamma", o.gamma, "Discount factor");
    cmd->add_option("--kernels", o.kernels, "Kernel count (finite setting)");
    cmd->add_option("--reg", o.reg, "KL regularization strength");
    cmd->add_option("--constraints", o.constraints, "Number of constraints");
}

rcmdp::RCMDPInstance resolve_instance(const std::string& instance_path, const GenOptions& gen) {
    if (!instance_path.empty()) return rcmdp::load_instance(instance_path);
    return rcmdp::random_instance(spec_from_options(gen));
}

int checked(bool ok, const std::string& label) {
    std::cout << (ok ? "[ok]   " : "[FAIL] ") << label << "\n";
    return ok ? 0 : 1;
}

int cmd_validate() {
    using namespace rcmdp;
    int failures = 0;
    // Closed-form counterexample returns across the (gamma, delta) grid.
    for (double gamma : {0.2, 0.4, 0.6, 0.9}) {
        const double horizon = 1.0 / (1.0 - gamma);
        for (double delta : {0.0, gamma / 8.0, gamma / 4.0}) {
            const RCMDPInstance inst = counterexample_instance(gamma, delta);
            const auto& kernels = std::get<FiniteSet>(inst.uncertainty).kernels;
            const Policy pi1 = deterministic_policy({0, 0, 0, 0}, 2);
            const Policy pi2 = deterministic_policy({1, 1, 1, 1}, 2);
            const double expected[2][2][2] = {
                {{horizon / 2 + horizon * (gamma + delta) / 4, horizon / 2 + delta / 4},
                 {horizon * (3 - gamma) / 4, horizon * (3 + gamma) / 4}},
                {{horizon * (3 + gamma) / 4, horizon * (3 - gamma) / 4},
                 {horizon / 2 - horizon * delta / 2,
                  horizon / 2 + horizon * gamma / 2 - horizon * delta / 2}}};
            double worst = 0.0;
            for (int p = 0; p < 2; ++p) {
                const Policy& pi = p == 0 ? pi1 : pi2;
                for (int n = 0; n < 2; ++n) {
                    for (int m = 0; m < 2; ++m) {
                        const double j =
                            return_value(pi, kernels[m], inst.costs[n], gamma, inst.mu);
                        worst = std::max(worst, std::abs(j - expected[p][n][m]));
                    }
                }
            }
            char label[128];
            std::snprintf(label, sizeof(label),
                          "counterexample identities gamma=%.2f delta=%.4f (max err %.2e)", gamma,
                          delta, worst);
            failures += checked(worst <= 1e-9, label);
        }
    }

    // Analytic gradient vs finite differences on random instances.
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        GenSpec spec = GenSpec::defaults(Setting::CMDP, seed);
        spec.num_states = 4;
        spec.num_actions = 3;
        spec.gamma = 0.9;
        spec.num_constraints = 1;
        const RCMDPInstance inst = random_instance(spec);
        const auto& kernel = std::get<FiniteSet>(inst.uncertainty).kernels.front();
        const Policy pi = uniform_policy(4, 3);
        const Eigen::MatrixXd grad =
            policy_gradient(pi, kernel, inst.costs[0], inst.gamma, inst.mu);
        const Eigen::MatrixXd fd =
            finite_diff_gradient(pi, kernel, inst.costs[0], inst.gamma, inst.mu, 1e-6);
        double max_rel = 0.0;
        for (int s = 0; s < 4; ++s) {
            for (int a = 0; a < 3; ++a) {
                const double directional = grad(s, a) - grad(s, (a + 1) % 3);
                max_rel = std::max(max_rel, std::abs(fd(s, a) - directional) /
                                                std::max(1.0, std::abs(directional)));
            }
        }
        char label[96];
        std::snprintf(label, sizeof(label), "policy gradient matches finite differences seed=%llu",
                      static_cast<unsigned long long>(seed));
        failures += checked(max_rel <= 1e-4, label);
    }

    // LP optimum equals the exhaustive deterministic minimum (unconstrained).
    for (std::uint64_t seed : {11ULL, 12ULL}) {
        GenSpec spec = GenSpec::defaults(Setting::CMDP, seed);
        spec.num_states = 3;
        spec.num_actions = 3;
        spec.gamma = 0.9;
        spec.num_constraints = 0;
        const RCMDPInstance inst = random_instance(spec);
        const auto& kernel = std::get<FiniteSet>(inst.uncertainty).kernels.front();
        const CMDPSolution sol = solve_cmdp_lp(inst);
        double best = 1e300;
        for (int a0 = 0; a0 < 3; ++a0) {
            for (int a1 = 0; a1 < 3; ++a1) {
                for (int a2 = 0; a2 < 3; ++a2) {
                    best = std::min(best,
                                    return_value(deterministic_policy({a0, a1, a2}, 3), kernel,
                                                 inst.costs[0], inst.gamma, inst.mu));
                }
            }
        }
        char label[96];
        std::snprintf(label, sizeof(label), "LP optimum equals deterministic minimum seed=%llu",
                      static_cast<unsigned long long>(seed));
        failures += checked(sol.feasible && std::abs(sol.optimal_value - best) <= 1e-8, label);
    }

    // LP policy round trip on constrained instances.
    for (std::uint64_t seed : {21ULL, 22ULL}) {
        GenSpec spec = GenSpec::defaults(Setting::CMDP, seed);
        spec.num_states = 5;
        spec.num_actions = 3;
        spec.gamma = 0.9;
        spec.num_constraints = 2;
        const RCMDPInstance inst = random_instance(spec);
        const auto& kernel = std::get<FiniteSet>(inst.uncertainty).kernels.front();
        const CMDPSolution sol = solve_cmdp_lp(inst);
        bool ok = sol.feasible;
        if (ok) {
            ok = std::abs(return_value(sol.policy, kernel, inst.costs[0], inst.gamma, inst.mu) -
                          sol.optimal_value) <= 1e-7;
            for (int n = 0; n < inst.num_constraints() && ok; ++n) {
                ok = return_value(sol.policy, kernel, inst.costs[n + 1], inst.gamma, inst.mu) <=
                     inst.thresholds(n) + 1e-7;
            }
        }
        char label[96];
        std::snprintf(label, sizeof(label), "LP policy reproduces J* and constraints seed=%llu",
                      static_cast<unsigned long long>(seed));
        failures += checked(ok, label);
    }

    std::cout << (failures == 0 ? "all checks passed\n" : "some checks FAILED\n");
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tabular robust constrained MDP solver and benchmark harness"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "Limit OpenMP threads (0 = runtime default)");

    // envgen
    auto* envgen = app.add_subcommand("envgen", "Generate a random instance file");
    GenOptions gen_opts;
    add_gen_options(envgen, gen_opts);
    std::string envgen_out = "instance.json";
    envgen->add_option("--out", envgen_out, "Output instance path");

    // solve
    auto* solve = app.add_subcommand("solve", "Run the epigraph bisection solver");
    GenOptions solve_gen;
    add_gen_options(solve, solve_gen);
    std::string solve_instance;
    std::string solve_out = "solve_out";
    int solve_outer = 15;
    int solve_inner = -1;
    double solve_alpha = -1.0;
    bool solve_no_warm = false;
    solve->add_option("--instance", solve_instance, "Instance JSON (overrides generator options)");
    solve->add_option("--out", solve_out, "Output directory");
    solve->add_option("--outer-iterations", solve_outer, "Bisection iterations K");
    solve->add_option("--inner-iterations", solve_inner, "Subroutine iterations T");
    solve->add_option("--learning-rate", solve_alpha, "Subroutine learning rate");
    solve->add_flag("--no-warm-start", solve_no_warm, "Restart the subroutine from uniform");

    // baseline
    auto* baseline = app.add_subcommand("baseline", "Run the Lagrangian baseline");
    GenOptions base_gen;
    add_gen_options(baseline, base_gen);
    std::string base_instance;
    std::string base_out = "baseline_out";
    std::string base_algorithm = "lf";
    int base_outer = 16;
    int base_inner = -1;
    double base_alpha_pi = -1.0;
    double base_alpha_lambda = 0.01;
    baseline->add_option("--instance", base_instance, "Instance JSON (overrides generator options)");
    baseline->add_option("--out", base_out, "Output directory");
    baseline->add_option("--algorithm", base_algorithm, "lf|lf-pi-avg|lf-occ-avg");
    baseline->add_option("--outer-iterations", base_outer, "Multiplier rounds K");
    baseline->add_option("--inner-iterations", base_inner, "Inner policy steps T");
    baseline->add_option("--alpha-pi", base_alpha_pi, "Policy learning rate");
    baseline->add_option("--alpha-lambda", base_alpha_lambda, "Multiplier learning rate");

    // validate
    auto* validate = app.add_subcommand(
        "validate", "Self-checks: counterexample identities, gradient and LP cross-checks");

    // bench
    auto* bench = app.add_subcommand("bench", "Run a full benchmark from a config file");
    std::string bench_config;
    bench->add_option("--config", bench_config, "Experiment config JSON")->required();

    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif

    try {
        if (envgen->parsed()) {
            const rcmdp::GenSpec spec = spec_from_options(gen_opts);
            const rcmdp::RCMDPInstance inst = rcmdp::random_instance(spec);
            json meta;
            meta["prng"] = rcmdp::Rng::algorithm_name();
            meta["seed"] = spec.seed;
            meta["setting"] = rcmdp::setting_name(spec.setting);
            rcmdp::save_instance(envgen_out, inst, meta);
            std::cout << "wrote " << envgen_out << "\n";
            return 0;
        }

        if (solve->parsed() || baseline->parsed()) {
            const bool is_solve = solve->parsed();
            const GenOptions& gen = is_solve ? solve_gen : base_gen;
            const std::string& instance_path = is_solve ? solve_instance : base_instance;
            const std::string& out_dir = is_solve ? solve_out : base_out;
            const rcmdp::RCMDPInstance inst = resolve_instance(instance_path, gen);

            rcmdp::ExperimentConfig cfg;
            cfg.setting = rcmdp::setting_from_name(gen.setting);
            const bool kl = std::holds_alternative<rcmdp::KLRectangular>(inst.uncertainty);
            const int default_inner = kl ? 1000 : 10000;
            const double default_alpha = kl ? 5e-4 : 5e-5;
            cfg.epirc.outer_iterations = solve_outer;
            cfg.epirc.subroutine.iterations = solve_inner > 0 ? solve_inner : default_inner;
            cfg.epirc.subroutine.learning_rate = solve_alpha > 0 ? solve_alpha : default_alpha;
            cfg.epirc.warm_start = !solve_no_warm;
            cfg.lf.outer = base_outer;
            cfg.lf.inner = base_inner > 0 ? base_inner : default_inner;
            cfg.lf.alpha_pi = base_alpha_pi > 0 ? base_alpha_pi : default_alpha;
            cfg.lf.alpha_lambda = base_alpha_lambda;

            const std::string algorithm = is_solve ? "epirc" : base_algorithm;
            const rcmdp::RunResult run = rcmdp::run_algorithm(inst, cfg, algorithm, gen.seed);
            if (run.failed) {
                std::cerr << "run failed: " << run.error << "\n";
                return 1;
            }
            fs::create_directories(out_dir);
            {
                std::ofstream csv(fs::path(out_dir) / "trace.csv");
                csv << rcmdp::metric_rows_to_csv(run.rows);
            }
            {
                json sol;
                sol["algorithm"] = algorithm;
                sol["marked_k"] = run.rows[run.marked].k;
                sol["marked_violation"] = run.rows[run.marked].violation;
                sol["marked_relative_return"] = run.rows[run.marked].relative_return;
                sol["policy"] = rcmdp::policy_to_json(run.policies[run.marked]);
                std::ofstream out(fs::path(out_dir) / "solution.json");
                out << sol.dump(2) << "\n";
            }
            std::cout << "wrote " << (fs::path(out_dir) / "trace.csv").string() << " and "
                      << (fs::path(out_dir) / "solution.json").string() << "\n";
            return 0;
        }

        if (validate->parsed()) return cmd_validate();

        if (bench->parsed()) {
            std::ifstream in(bench_config);
            if (!in) {
                std::cerr << "cannot open config " << bench_config << "\n";
                return 2;
            }
            json j;
            in >> j;
            const rcmdp::ExperimentConfig cfg = rcmdp::config_from_json(j);
            const rcmdp::ExperimentReport report = rcmdp::run_experiment(cfg);
            int failed = 0;
            for (const auto& run : report.runs) {
                if (run.failed) {
                    ++failed;
                    std::cerr << "run " << run.algorithm << " seed " << run.seed
                              << " failed: " << run.error << "\n";
                }
            }
            std::cout << "completed " << report.runs.size() - failed << "/" << report.runs.size()
                      << " runs; outputs in " << cfg.output_dir << "\n";
            return failed == 0 ? 0 : 1;
        }
    } catch (const rcmdp::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

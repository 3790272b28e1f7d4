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

#include "rcmdp/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "rcmdp/json_io.hpp"
#include "rcmdp/lp_oracle.hpp"
#include "rcmdp/uncertainty.hpp"

namespace rcmdp {
namespace {

using nlohmann::json;

const std::vector<std::string> kKnownAlgorithms = {"epirc", "lf", "lf-pi-avg", "lf-occ-avg",
                                                   "lp-oracle"};

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double constraint_violation(const RCMDPInstance& inst, const std::vector<double>& returns) {
    double v = -std::numeric_limits<double>::infinity();
    for (int n = 1; n < static_cast<int>(returns.size()); ++n) {
        v = std::max(v, returns[n] - inst.thresholds(n - 1));
    }
    return v;
}

struct PolicyMetrics {
    double violation = 0.0;
    double relative_return = 0.0;
};

PolicyMetrics evaluate_policy_metrics(const RCMDPInstance& inst, const Policy& pi,
                                      double uniform_return) {
    std::vector<double> returns(inst.costs.size());
    for (std::size_t n = 0; n < inst.costs.size(); ++n) {
        returns[n] = robust_eval(inst, static_cast<int>(n), pi).value;
    }
    return PolicyMetrics{constraint_violation(inst, returns), returns[0] - uniform_return};
}

RunResult run_epirc(const RCMDPInstance& inst, const ExperimentConfig& cfg, std::uint64_t seed,
                    double uniform_return) {
    RunResult out;
    out.seed = seed;
    out.algorithm = "epirc";
    const SolveResult res = bisection_solve(inst, cfg.epirc);
    for (const OuterRecord& rec : res.trace) {
        MetricRow row;
        row.seed = seed;
        row.algorithm = out.algorithm;
        row.k = rec.k;
        row.violation = constraint_violation(inst, rec.robust_returns);
        row.relative_return = rec.robust_returns[0] - uniform_return;
        row.b0_low = rec.lo;
        row.b0_high = rec.hi;
        row.wall_ms = cfg.record_wall_time ? rec.wall_ms : 0.0;
        out.rows.push_back(std::move(row));
        out.policies.push_back(rec.policy);
    }
    return out;
}

RunResult rows_from_lf_trace(const RCMDPInstance& inst, const std::vector<LagrangeOuterRecord>& trace,
                             const std::string& algorithm, std::uint64_t seed,
                             double uniform_return, bool record_wall_time) {
    RunResult out;
    out.seed = seed;
    out.algorithm = algorithm;
    for (const auto& rec : trace) {
        MetricRow row;
        row.seed = seed;
        row.algorithm = algorithm;
        row.k = rec.k;
        row.violation = rec.violation;
        row.relative_return = rec.objective_return - uniform_return;
        row.wall_ms = record_wall_time ? rec.wall_ms : 0.0;
        out.rows.push_back(std::move(row));
        out.policies.push_back(rec.policy);
    }
    return out;
}

RunResult rows_from_averaged(const RCMDPInstance& inst,
                             const std::vector<LagrangeOuterRecord>& trace,
                             const std::string& algorithm, std::uint64_t seed,
                             double uniform_return, bool occupancy_averaging,
                             bool record_wall_time) {
    RunResult out;
    out.seed = seed;
    out.algorithm = algorithm;
    std::vector<Policy> prefix;
    for (const auto& rec : trace) {
        const auto started = std::chrono::steady_clock::now();
        prefix.push_back(rec.policy);
        const Policy averaged =
            occupancy_averaging ? average_occupancy_policy(inst, prefix) : average_policies(prefix);
        const PolicyMetrics metrics = evaluate_policy_metrics(inst, averaged, uniform_return);
        MetricRow row;
        row.seed = seed;
        row.algorithm = algorithm;
        row.k = rec.k;
        row.violation = metrics.violation;
        row.relative_return = metrics.relative_return;
        row.wall_ms = record_wall_time
                          ? std::chrono::duration<double, std::milli>(
                                std::chrono::steady_clock::now() - started)
                                .count()
                          : 0.0;
        out.rows.push_back(std::move(row));
        out.policies.push_back(averaged);
    }
    return out;
}

RunResult run_lp_oracle(const RCMDPInstance& inst, std::uint64_t seed, double uniform_return) {
    RunResult out;
    out.seed = seed;
    out.algorithm = "lp-oracle";
    const CMDPSolution sol = solve_cmdp_lp(inst);
    if (!sol.feasible) {
        out.failed = true;
        out.error = "LP infeasible: the safe policy set is empty";
        return out;
    }
    out.j_star = sol.optimal_value;
    const PolicyMetrics metrics = evaluate_policy_metrics(inst, sol.policy, uniform_return);
    MetricRow row;
    row.seed = seed;
    row.algorithm = out.algorithm;
    row.k = 0;
    row.violation = metrics.violation;
    row.relative_return = metrics.relative_return;
    out.rows.push_back(std::move(row));
    out.policies.push_back(sol.policy);
    return out;
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig cfg;
    try {
        cfg.setting = setting_from_name(j.at("setting").get<std::string>());
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    cfg.generator = GenSpec::defaults(cfg.setting, 0);
    if (j.contains("generator")) {
        const json& g = j.at("generator");
        if (g.contains("num_states")) cfg.generator.num_states = g.at("num_states").get<int>();
        if (g.contains("num_actions")) cfg.generator.num_actions = g.at("num_actions").get<int>();
        if (g.contains("gamma")) cfg.generator.gamma = g.at("gamma").get<double>();
        if (g.contains("num_kernels")) cfg.generator.num_kernels = g.at("num_kernels").get<int>();
        if (g.contains("kl_reg")) cfg.generator.kl_reg = g.at("kl_reg").get<double>();
        if (g.contains("num_constraints")) {
            cfg.generator.num_constraints = g.at("num_constraints").get<int>();
        }
    }
    if (cfg.setting == Setting::CMDP) cfg.generator.num_kernels = 1;

    cfg.algorithms = j.value("algorithms", std::vector<std::string>{"epirc", "lf"});
    for (const auto& a : cfg.algorithms) {
        if (std::find(kKnownAlgorithms.begin(), kKnownAlgorithms.end(), a) ==
            kKnownAlgorithms.end()) {
            throw ConfigError("unknown algorithm '" + a + "'");
        }
        if ((a == "lf-occ-avg" || a == "lp-oracle") && cfg.setting != Setting::CMDP) {
            throw ConfigError("algorithm '" + a + "' is only defined for the cmdp setting");
        }
    }

    // Per-setting defaults for the subroutine budget.
    const bool kl = cfg.setting == Setting::KL;
    cfg.epirc.outer_iterations = 15;
    cfg.epirc.subroutine.iterations = kl ? 1000 : 10000;
    cfg.epirc.subroutine.learning_rate = kl ? 5e-4 : 5e-5;
    cfg.epirc.warm_start = true;
    if (j.contains("epirc")) {
        const json& e = j.at("epirc");
        if (e.contains("outer_iterations")) {
            cfg.epirc.outer_iterations = e.at("outer_iterations").get<int>();
        }
        if (e.contains("warm_start")) cfg.epirc.warm_start = e.at("warm_start").get<bool>();
        if (e.contains("subroutine")) {
            const json& s = e.at("subroutine");
            if (s.contains("iterations")) {
                cfg.epirc.subroutine.iterations = s.at("iterations").get<int>();
            }
            if (s.contains("learning_rate")) {
                cfg.epirc.subroutine.learning_rate = s.at("learning_rate").get<double>();
            }
        }
    }

    // Budget-fair LF defaults: same inner budget, one extra outer round to
    // cover the bisection's final subroutine call.
    cfg.lf.outer = cfg.epirc.outer_iterations + 1;
    cfg.lf.inner = cfg.epirc.subroutine.iterations;
    cfg.lf.alpha_pi = cfg.epirc.subroutine.learning_rate;
    cfg.lf.alpha_lambda = 0.01;
    if (j.contains("lf")) {
        const json& l = j.at("lf");
        if (l.contains("outer")) cfg.lf.outer = l.at("outer").get<int>();
        if (l.contains("inner")) cfg.lf.inner = l.at("inner").get<int>();
        if (l.contains("alpha_lambda")) cfg.lf.alpha_lambda = l.at("alpha_lambda").get<double>();
        if (l.contains("alpha_pi")) cfg.lf.alpha_pi = l.at("alpha_pi").get<double>();
    }

    cfg.seeds = j.value("seeds", std::vector<std::uint64_t>{});
    if (cfg.seeds.empty()) throw ConfigError("seeds must be a non-empty list");
    cfg.output_dir = j.value("output_dir", std::string("out"));
    cfg.record_wall_time = j.value("record_wall_time", true);
    return cfg;
}

int select_marked_policy(const std::vector<MetricRow>& rows) {
    if (rows.empty()) throw std::invalid_argument("select_marked_policy: empty input");
    int best_feasible = -1;
    int best_any = 0;
    for (int i = 0; i < static_cast<int>(rows.size()); ++i) {
        if (rows[i].violation <= kViolationSignTol &&
            (best_feasible < 0 || rows[i].relative_return < rows[best_feasible].relative_return)) {
            best_feasible = i;
        }
        if (rows[i].violation < rows[best_any].violation) best_any = i;
    }
    return best_feasible >= 0 ? best_feasible : best_any;
}

std::string metric_rows_to_csv(const std::vector<MetricRow>& rows) {
    std::ostringstream os;
    os << "seed,algorithm,k,violation,relative_return,b0_low,b0_high,wall_ms\n";
    for (const auto& r : rows) {
        os << r.seed << ',' << r.algorithm << ',' << r.k << ',' << format_double(r.violation)
           << ',' << format_double(r.relative_return) << ','
           << (r.b0_low ? format_double(*r.b0_low) : "") << ','
           << (r.b0_high ? format_double(*r.b0_high) : "") << ',' << format_double(r.wall_ms)
           << '\n';
    }
    return os.str();
}

std::vector<MetricRow> metric_rows_from_csv(const std::string& csv) {
    std::vector<MetricRow> rows;
    std::istringstream in(csv);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::string field;
        std::istringstream ls(line);
        while (std::getline(ls, field, ',')) fields.push_back(field);
        while (fields.size() < 8) fields.emplace_back();
        MetricRow r;
        r.seed = std::stoull(fields[0]);
        r.algorithm = fields[1];
        r.k = std::stoi(fields[2]);
        r.violation = std::stod(fields[3]);
        r.relative_return = std::stod(fields[4]);
        if (!fields[5].empty()) r.b0_low = std::stod(fields[5]);
        if (!fields[6].empty()) r.b0_high = std::stod(fields[6]);
        r.wall_ms = fields[7].empty() ? 0.0 : std::stod(fields[7]);
        rows.push_back(std::move(r));
    }
    return rows;
}

RunResult run_algorithm(const RCMDPInstance& inst, const ExperimentConfig& cfg,
                        const std::string& algorithm, std::uint64_t seed) {
    const double uniform_return =
        robust_eval(inst, 0, uniform_policy(inst.num_states, inst.num_actions)).value;
    RunResult out;
    try {
        if (algorithm == "epirc") {
            out = run_epirc(inst, cfg, seed, uniform_return);
        } else if (algorithm == "lf") {
            const LagrangeResult lf = lf_solve(inst, cfg.lf);
            out = rows_from_lf_trace(inst, lf.trace, "lf", seed, uniform_return,
                                     cfg.record_wall_time);
        } else if (algorithm == "lf-pi-avg" || algorithm == "lf-occ-avg") {
            const LagrangeResult lf = lf_solve(inst, cfg.lf);
            out = rows_from_averaged(inst, lf.trace, algorithm, seed, uniform_return,
                                     algorithm == "lf-occ-avg", cfg.record_wall_time);
        } else if (algorithm == "lp-oracle") {
            out = run_lp_oracle(inst, seed, uniform_return);
        } else {
            throw ConfigError("unknown algorithm '" + algorithm + "'");
        }
    } catch (const std::exception& e) {
        out.seed = seed;
        out.algorithm = algorithm;
        out.failed = true;
        out.error = e.what();
        return out;
    }
    if (!out.failed && !out.rows.empty()) out.marked = select_marked_policy(out.rows);
    return out;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);

    // One instance per seed, shared across algorithms for comparability.
    std::vector<RCMDPInstance> instances;
    instances.reserve(cfg.seeds.size());
    for (std::uint64_t seed : cfg.seeds) {
        GenSpec spec = cfg.generator;
        spec.seed = seed;
        instances.push_back(random_instance(spec));
    }

    struct Job {
        int seed_index;
        std::string algorithm;
    };
    std::vector<Job> jobs;
    for (int i = 0; i < static_cast<int>(cfg.seeds.size()); ++i) {
        for (const auto& a : cfg.algorithms) jobs.push_back(Job{i, a});
    }

    ExperimentReport report;
    report.runs.resize(jobs.size());
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < static_cast<int>(jobs.size()); ++i) {
        const Job& job = jobs[i];
        report.runs[i] =
            run_algorithm(instances[job.seed_index], cfg, job.algorithm, cfg.seeds[job.seed_index]);
    }

    json summary;
    summary["runs"] = json::array();
    std::vector<MetricRow> all_rows;
    for (const RunResult& run : report.runs) {
        json entry;
        entry["seed"] = run.seed;
        entry["algorithm"] = run.algorithm;
        entry["failed"] = run.failed;
        if (run.failed) {
            entry["error"] = run.error;
            report.all_succeeded = false;
            summary["runs"].push_back(std::move(entry));
            continue;
        }

        const std::string stem =
            run.algorithm + "_seed" + std::to_string(run.seed);
        {
            std::ofstream csv(fs::path(cfg.output_dir) / ("run_" + stem + ".csv"));
            csv << metric_rows_to_csv(run.rows);
        }
        {
            json policies = json::array();
            for (const auto& p : run.policies) policies.push_back(policy_to_json(p));
            std::ofstream pf(fs::path(cfg.output_dir) / ("policies_" + stem + ".json"));
            pf << policies.dump() << "\n";
        }
        all_rows.insert(all_rows.end(), run.rows.begin(), run.rows.end());

        const MetricRow& marked = run.rows[run.marked];
        entry["marked_k"] = marked.k;
        entry["marked_violation"] = marked.violation;
        entry["marked_relative_return"] = marked.relative_return;
        entry["marked_feasible"] = marked.violation <= kViolationSignTol;
        if (run.j_star) entry["j_star"] = *run.j_star;
        summary["runs"].push_back(std::move(entry));
    }

    // Inject the LP optimum into epirc/lf summary entries when available. The
    // relative returns share the uniform baseline, so the difference of
    // relative values equals the gap in absolute return units.
    for (auto& entry : summary["runs"]) {
        if (entry.value("failed", true) || entry["algorithm"] == "lp-oracle") continue;
        for (const RunResult& run : report.runs) {
            if (run.algorithm == "lp-oracle" && !run.failed && run.seed == entry["seed"]) {
                entry["j_star"] = *run.j_star;
                entry["gap_to_lp"] = entry["marked_relative_return"].get<double>() -
                                     run.rows[0].relative_return;
            }
        }
    }

    // Aggregated mean / stderr per (algorithm, k).
    {
        std::ostringstream agg;
        agg << "algorithm,k,violation_mean,violation_stderr,relative_return_mean,"
               "relative_return_stderr,count\n";
        for (const auto& algorithm : cfg.algorithms) {
            int max_k = -1;
            for (const auto& r : all_rows) {
                if (r.algorithm == algorithm) max_k = std::max(max_k, r.k);
            }
            for (int k = 0; k <= max_k; ++k) {
                std::vector<double> violations, returns;
                for (const auto& r : all_rows) {
                    if (r.algorithm == algorithm && r.k == k) {
                        violations.push_back(r.violation);
                        returns.push_back(r.relative_return);
                    }
                }
                if (violations.empty()) continue;
                auto mean_stderr = [](const std::vector<double>& xs) {
                    const double n = static_cast<double>(xs.size());
                    double mean = 0.0;
                    for (double x : xs) mean += x;
                    mean /= n;
                    double var = 0.0;
                    for (double x : xs) var += (x - mean) * (x - mean);
                    const double se = xs.size() > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
                    return std::pair<double, double>(mean, se);
                };
                const auto [vm, vs] = mean_stderr(violations);
                const auto [rm, rs] = mean_stderr(returns);
                agg << algorithm << ',' << k << ',' << format_double(vm) << ','
                    << format_double(vs) << ',' << format_double(rm) << ',' << format_double(rs)
                    << ',' << violations.size() << '\n';
            }
        }
        std::ofstream out(fs::path(cfg.output_dir) / "aggregate.csv");
        out << agg.str();
    }

    report.summary = std::move(summary);
    {
        std::ofstream out(fs::path(cfg.output_dir) / "summary.json");
        out << report.summary.dump(2) << "\n";
    }
    return report;
}

}  // namespace rcmdp

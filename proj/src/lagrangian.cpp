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

#include "rcmdp/lagrangian.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>

#include "rcmdp/epigraph.hpp"

namespace rcmdp {
namespace {

void check_lambda(const RCMDPInstance& inst, const Eigen::VectorXd& lambda) {
    if (static_cast<int>(lambda.size()) != inst.num_constraints()) {
        throw std::invalid_argument("lambda must have length N = " +
                                    std::to_string(inst.num_constraints()));
    }
    if (lambda.size() > 0 && lambda.minCoeff() < 0.0) {
        throw std::invalid_argument("lambda must be non-negative elementwise");
    }
}

struct AllEvals {
    std::vector<EvalResult> evals;  // length N+1
};

AllEvals evaluate_all(const RCMDPInstance& inst, const Policy& pi) {
    const int count = static_cast<int>(inst.costs.size());
    AllEvals out;
    out.evals.resize(count);
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (int n = 0; n < count; ++n) {
        try {
            out.evals[n] = robust_eval(inst, n, pi);
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    return out;
}

double lagrangian_of(const AllEvals& evals, const RCMDPInstance& inst,
                     const Eigen::VectorXd& lambda) {
    double value = evals.evals[0].value;
    for (int n = 1; n < static_cast<int>(evals.evals.size()); ++n) {
        value += lambda(n - 1) * (evals.evals[n].value - inst.thresholds(n - 1));
    }
    return value;
}

Eigen::MatrixXd subgradient_of(const AllEvals& evals, const Eigen::VectorXd& lambda) {
    Eigen::MatrixXd grad = evals.evals[0].gradient;
    for (int n = 1; n < static_cast<int>(evals.evals.size()); ++n) {
        grad += lambda(n - 1) * evals.evals[n].gradient;
    }
    return grad;
}

double max_violation(const AllEvals& evals, const RCMDPInstance& inst) {
    double v = -std::numeric_limits<double>::infinity();
    for (int n = 1; n < static_cast<int>(evals.evals.size()); ++n) {
        v = std::max(v, evals.evals[n].value - inst.thresholds(n - 1));
    }
    return v;
}

}  // namespace

double lagrangian_value(const RCMDPInstance& inst, const Policy& pi,
                        const Eigen::VectorXd& lambda) {
    check_lambda(inst, lambda);
    return lagrangian_of(evaluate_all(inst, pi), inst, lambda);
}

Eigen::MatrixXd lagrangian_subgradient(const RCMDPInstance& inst, const Policy& pi,
                                       const Eigen::VectorXd& lambda) {
    check_lambda(inst, lambda);
    return subgradient_of(evaluate_all(inst, pi), lambda);
}

LagrangeResult lf_solve(const RCMDPInstance& inst, const LagrangeConfig& cfg) {
    if (cfg.outer < 1 || cfg.inner < 1) {
        throw std::invalid_argument("lf_solve requires positive iteration counts");
    }
    if (!(cfg.alpha_lambda > 0.0) || !(cfg.alpha_pi >= 0.0)) {
        throw std::invalid_argument("lf_solve requires positive learning rates");
    }
    const int num_constraints = inst.num_constraints();
    Eigen::VectorXd lambda = cfg.initial_lambda
                                 ? *cfg.initial_lambda
                                 : Eigen::VectorXd::Zero(num_constraints);
    check_lambda(inst, lambda);

    Policy pi = cfg.initial_policy ? *cfg.initial_policy
                                   : uniform_policy(inst.num_states, inst.num_actions);

    LagrangeResult out;
    out.lambda_trajectory.push_back(lambda);
    for (int k = 0; k < cfg.outer; ++k) {
        const auto started = std::chrono::steady_clock::now();

        Policy inner = pi;
        Policy best_policy = pi;
        double best_value = std::numeric_limits<double>::infinity();
        AllEvals best_evals;
        for (int t = 0; t < cfg.inner; ++t) {
            const AllEvals evals = evaluate_all(inst, inner);
            const double value = lagrangian_of(evals, inst, lambda);
            if (value < best_value) {
                best_value = value;
                best_policy = inner;
                best_evals = evals;
            }
            inner = project_policy(inner.probs - cfg.alpha_pi * subgradient_of(evals, lambda));
        }

        pi = best_policy;
        for (int n = 0; n < num_constraints; ++n) {
            const double violation = best_evals.evals[n + 1].value - inst.thresholds(n);
            lambda(n) = std::max(lambda(n) + cfg.alpha_lambda * violation, 0.0);
        }

        LagrangeOuterRecord record;
        record.k = k;
        record.lambda = out.lambda_trajectory.back();
        record.lagrangian = best_value;
        record.violation = num_constraints > 0 ? max_violation(best_evals, inst) : 0.0;
        record.objective_return = best_evals.evals[0].value;
        record.robust_returns.reserve(best_evals.evals.size());
        for (const auto& e : best_evals.evals) record.robust_returns.push_back(e.value);
        record.policy = pi;
        record.wall_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - started)
                             .count();
        out.trace.push_back(std::move(record));
        out.lambda_trajectory.push_back(lambda);
    }
    out.policy = pi;
    return out;
}

Policy average_policies(const std::vector<Policy>& policies) {
    if (policies.empty()) throw std::invalid_argument("average_policies: empty list");
    Eigen::MatrixXd mean = policies.front().probs;
    for (std::size_t i = 1; i < policies.size(); ++i) {
        if (policies[i].probs.rows() != mean.rows() || policies[i].probs.cols() != mean.cols()) {
            throw std::invalid_argument("average_policies: shape mismatch");
        }
        mean += policies[i].probs;
    }
    mean /= static_cast<double>(policies.size());
    return Policy{std::move(mean)};
}

Policy average_occupancy_policy(const RCMDPInstance& inst, const std::vector<Policy>& policies) {
    if (policies.empty()) throw std::invalid_argument("average_occupancy_policy: empty list");
    if (!inst.is_singleton()) {
        throw std::invalid_argument(
            "average_occupancy_policy is well-defined only for a singleton uncertainty set");
    }
    const TransitionKernel& kernel = std::get<FiniteSet>(inst.uncertainty).kernels.front();
    const int S = inst.num_states;
    const int A = inst.num_actions;

    Eigen::MatrixXd mean_q = Eigen::MatrixXd::Zero(S, A);
    for (const Policy& pi : policies) {
        const Eigen::VectorXd d = occupancy(pi, kernel, inst.gamma, inst.mu);
        for (int s = 0; s < S; ++s) mean_q.row(s) += d(s) * pi.probs.row(s);
    }
    mean_q /= static_cast<double>(policies.size());

    Eigen::MatrixXd probs(S, A);
    for (int s = 0; s < S; ++s) {
        const double mass = mean_q.row(s).sum();
        if (mass <= 1e-12) {
            probs.row(s).setConstant(1.0 / A);
        } else {
            probs.row(s) = mean_q.row(s) / mass;
        }
    }
    return Policy{std::move(probs)};
}

}  // namespace rcmdp
